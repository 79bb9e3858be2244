"""Numeric primitives: Hermitian algebra, probability vectors and entropies.

Every value type here is an immutable wrapper around a numpy array that
checks its invariant on construction. Functions accept either the wrapper or
a plain array, so inner loops elsewhere can stay on raw numpy.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .constants import (
    HERMITIAN_TOL,
    NEGATIVE_EIGENVALUE_TOL,
    NORM_TOL,
    PROBABILITY_NEGATIVE_TOL,
    PROBABILITY_SUM_TOL,
    PROJECTOR_EQUAL_TOL,
    RANK_TOL,
    TRACE_TOL,
)
from .exceptions import InvalidDistributionError, InvalidStateError

if sys.version_info >= (3, 10):
    from typing import TypeAlias
else:
    from typing_extensions import TypeAlias

logger = logging.getLogger(__name__)

FloatArray: TypeAlias = NDArray[np.float64]
ComplexArray: TypeAlias = NDArray[np.complex128]


@dataclass(frozen=True, eq=False)
class ProbVector:
    """Probability distribution over a finite message alphabet.

    Parameters
    ----------
    p : array_like
        Non-negative entries summing to one. Entries in
        ``[-1e-12, 0)`` are clipped to zero.
    """

    p: FloatArray

    def __post_init__(self) -> None:
        arr = np.asarray(self.p, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidDistributionError(
                f"Probability vector must be a non-empty 1-D array, got {arr.shape}",
                field="p",
            )
        if not np.all(np.isfinite(arr)):
            raise InvalidDistributionError("Probability vector is not finite", "p")
        if arr.min() < -PROBABILITY_NEGATIVE_TOL:
            raise InvalidDistributionError(
                f"Negative probability {arr.min():.3e}", field="p"
            )
        if abs(arr.sum() - 1.0) > PROBABILITY_SUM_TOL:
            raise InvalidDistributionError(
                f"Probabilities sum to {arr.sum():.12f}, expected 1", field="p"
            )
        object.__setattr__(self, "p", np.clip(arr, 0.0, None))

    def __len__(self) -> int:
        return int(self.p.size)


@dataclass(frozen=True, eq=False)
class HermitianOp:
    """Complex Hermitian matrix.

    The stored matrix is the Hermitian part of the input, after checking the
    input is conjugate-symmetric within ``1e-10`` elementwise.
    """

    entries: ComplexArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", _hermitian_part(self.entries))

    @property
    def d(self) -> int:
        """Matrix dimension."""
        return int(self.entries.shape[0])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Positive semi-definite, trace-one Hermitian matrix."""

    entries: ComplexArray

    def __post_init__(self) -> None:
        mat = _hermitian_part(self.entries)
        trace = float(np.trace(mat).real)
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidStateError(
                f"Density matrix trace is {trace:.12f}, expected 1", field="entries"
            )
        lowest = float(np.linalg.eigvalsh(mat)[0])
        if lowest < -NEGATIVE_EIGENVALUE_TOL:
            raise InvalidStateError(
                f"Density matrix has negative eigenvalue {lowest:.3e}",
                field="entries",
            )
        object.__setattr__(self, "entries", mat)

    @property
    def d(self) -> int:
        """Hilbert space dimension."""
        return int(self.entries.shape[0])

    @classmethod
    def from_pure(cls, state: PureState | ArrayLike) -> DensityMatrix:
        """Build the projector onto a pure state.

        Parameters
        ----------
        state : PureState | array_like
            A pure state, or amplitudes that are normalized first

        Returns
        -------
        DensityMatrix
            ``|psi><psi|``
        """
        if not isinstance(state, PureState):
            state = PureState.from_amplitudes(state)
        return cls(state.projector())

    @classmethod
    def maximally_mixed(cls, d: int) -> DensityMatrix:
        """Return ``identity / d``."""
        return cls(np.eye(d, dtype=np.complex128) / d)


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector in C^d.

    Two pure states are equal when their projectors agree within ``1e-8``,
    so global phases are ignored.
    """

    amplitudes: ComplexArray

    def __post_init__(self) -> None:
        vec = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if vec.size == 0:
            raise InvalidStateError("Pure state has no amplitudes", "amplitudes")
        norm2 = float(np.vdot(vec, vec).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvalidStateError(
                f"Pure state squared norm is {norm2:.12f}, expected 1",
                field="amplitudes",
            )
        object.__setattr__(self, "amplitudes", vec)

    @classmethod
    def from_amplitudes(cls, amplitudes: ArrayLike) -> PureState:
        """Normalize arbitrary non-zero amplitudes into a pure state."""
        vec = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise InvalidStateError("Cannot normalize a zero vector", "amplitudes")
        return cls(vec / norm)

    @property
    def d(self) -> int:
        """Hilbert space dimension."""
        return int(self.amplitudes.size)

    def projector(self) -> ComplexArray:
        """Return ``|psi><psi|`` as a matrix."""
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PureState):
            return NotImplemented
        if other.d != self.d:
            return False
        return bool(
            np.max(np.abs(self.projector() - other.projector())) <= PROJECTOR_EQUAL_TOL
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigen-decomposition with eigenvalues sorted in descending order."""

    eigenvalues: FloatArray
    eigenvectors: ComplexArray

    def reconstruct(self) -> ComplexArray:
        """Return ``V diag(lambda) V^dagger``."""
        vecs = self.eigenvectors
        return (vecs * self.eigenvalues) @ vecs.conj().T


MatrixLike: TypeAlias = Union[HermitianOp, DensityMatrix, ArrayLike]


def as_matrix(value: MatrixLike) -> ComplexArray:
    """Return the complex matrix behind a wrapper or array."""
    if isinstance(value, (HermitianOp, DensityMatrix)):
        return value.entries
    return np.asarray(value, dtype=np.complex128)


def as_density_matrix(value: DensityMatrix | ArrayLike) -> DensityMatrix:
    """Validate ``value`` as a density matrix unless it already is one."""
    if isinstance(value, DensityMatrix):
        return value
    return DensityMatrix(np.asarray(value, dtype=np.complex128))


def _hermitian_part(value: ArrayLike) -> ComplexArray:
    mat = np.asarray(value, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        raise InvalidStateError(f"Expected a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise InvalidStateError("Matrix has non-finite entries")
    deviation = float(np.max(np.abs(mat - mat.conj().T)))
    if deviation > HERMITIAN_TOL:
        raise InvalidStateError(f"Matrix is not Hermitian (deviation {deviation:.3e})")
    return (mat + mat.conj().T) / 2


def entropy_bits(values: ArrayLike) -> float:
    """Return ``-sum v log2 v`` with ``0 log 0 = 0``.

    No validation happens here; callers pass clipped probabilities or
    eigenvalues.
    """
    arr = np.asarray(values, dtype=np.float64)
    arr = arr[arr > 0.0]
    return float(-np.sum(arr * np.log2(arr))) + 0.0


def shannon_entropy(p: ProbVector | ArrayLike) -> float:
    """Shannon entropy of a message distribution, in bits.

    Parameters
    ----------
    p : ProbVector | array_like
        Probability distribution

    Returns
    -------
    float
        ``-sum p_m log2 p_m``

    Examples
    --------
    >>> shannon_entropy([0.25, 0.25, 0.25, 0.25])
    2.0
    """
    if not isinstance(p, ProbVector):
        p = ProbVector(np.asarray(p, dtype=np.float64))
    return entropy_bits(p.p)


def clipped_eigenvalues(rho: DensityMatrix | ArrayLike) -> FloatArray:
    """Eigenvalues of a density matrix clipped to ``[0, 1]``.

    Raises
    ------
    InvalidStateError
        If an eigenvalue is below ``-1e-9`` or the matrix is not Hermitian
    """
    mat = _hermitian_part(as_matrix(rho))
    eigs = np.linalg.eigvalsh(mat)
    if eigs[0] < -NEGATIVE_EIGENVALUE_TOL:
        raise InvalidStateError(f"Negative eigenvalue {eigs[0]:.3e}", "rho")
    return np.clip(eigs, 0.0, 1.0)


def von_neumann_entropy(rho: DensityMatrix | ArrayLike) -> float:
    """Von Neumann entropy of a density matrix, in bits.

    Examples
    --------
    >>> von_neumann_entropy(np.eye(2) / 2)
    1.0
    """
    return entropy_bits(clipped_eigenvalues(rho))


def eigh(op: MatrixLike) -> Spectrum:
    """Eigen-decomposition of a Hermitian matrix, largest eigenvalue first.

    Parameters
    ----------
    op : HermitianOp | DensityMatrix | array_like
        Hermitian matrix

    Returns
    -------
    Spectrum
        Descending eigenvalues and matching orthonormal eigenvectors

    Examples
    --------
    >>> eigh(np.diag([3.0, 1.0, 2.0])).eigenvalues
    array([3., 2., 1.])
    """
    mat = _hermitian_part(as_matrix(op))
    values, vectors = scipy.linalg.eigh(mat)
    return Spectrum(
        eigenvalues=np.ascontiguousarray(values[::-1], dtype=np.float64),
        eigenvectors=np.ascontiguousarray(vectors[:, ::-1], dtype=np.complex128),
    )


def numerical_rank(rho: MatrixLike, tol: float = RANK_TOL) -> int:
    """Number of eigenvalues above ``tol``."""
    values = np.linalg.eigvalsh(_hermitian_part(as_matrix(rho)))
    return int(np.count_nonzero(values > tol))


def projector(vector: ArrayLike) -> ComplexArray:
    """Projector onto the normalized span of ``vector``."""
    vec = np.asarray(vector, dtype=np.complex128).reshape(-1)
    vec = vec / np.linalg.norm(vec)
    return np.outer(vec, vec.conj())


def psd_sqrt(mat: ComplexArray) -> ComplexArray:
    """Square root of a positive semi-definite matrix via its spectrum."""
    values, vectors = np.linalg.eigh(_hermitian_part(mat))
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * roots) @ vectors.conj().T


def fidelity(rho: DensityMatrix | ArrayLike, sigma: DensityMatrix | ArrayLike) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``.

    Returns
    -------
    float
        Value in ``[0, 1]``; 1 for identical states
    """
    root = psd_sqrt(as_matrix(rho))
    inner = root @ as_matrix(sigma) @ root
    values = np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0.0, None)
    return float(min(1.0, np.sum(np.sqrt(values)) ** 2))
