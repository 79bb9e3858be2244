"""Linear dimension witnesses and their evaluation on quantum ensembles."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from .constants import (
    CANONICAL_WITNESSES,
    SIGN_EIGENVALUE_TOL,
    ZERO_EIGENVALUE_TOL,
)
from .exceptions import DimensionMismatchError, ValidationError
from .qcore import (
    ComplexArray,
    DensityMatrix,
    FloatArray,
    as_density_matrix,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WitnessSpec:
    """Coefficient matrix of a linear witness ``sum_xy alpha_xy E_xy``.

    Rows are preparations ``x = 1..n`` and columns are measurements
    ``y = 1..l``.
    """

    alpha: FloatArray
    name: str | None = None

    def __post_init__(self) -> None:
        arr = np.array(self.alpha, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(
                f"Witness coefficients must be a non-empty n x l matrix, "
                f"got shape {arr.shape}",
                field="alpha",
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError("Witness coefficients must be finite", "alpha")
        arr.setflags(write=False)
        object.__setattr__(self, "alpha", arr)

    @property
    def n(self) -> int:
        """Number of preparations."""
        return int(self.alpha.shape[0])

    @property
    def l(self) -> int:  # noqa: E743
        """Number of measurements."""
        return int(self.alpha.shape[1])

    @property
    def label(self) -> str:
        """Name for reports, falling back to the shape."""
        return self.name or f"custom-{self.n}x{self.l}"

    def column_sum_bound(self) -> float:
        """Return ``sum_y |sum_x alpha_xy|``, the value of any repeated state."""
        return float(np.abs(self.alpha.sum(axis=0)).sum())

    def absolute_sum(self) -> float:
        """Return ``sum_xy |alpha_xy|``."""
        return float(np.abs(self.alpha).sum())

    def to_dict(self) -> dict[str, Any]:
        """Serialize to the JSON object used in configuration files."""
        return {
            "n": self.n,
            "l": self.l,
            "alpha": self.alpha.tolist(),
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> WitnessSpec:
        """Build a witness from its JSON object.

        Parameters
        ----------
        data : dict[str, Any]
            Mapping with ``alpha`` and optionally ``n``, ``l`` and ``name``

        Returns
        -------
        WitnessSpec
            The parsed witness
        """
        if "alpha" not in data:
            raise ValidationError("Witness object needs an 'alpha' matrix", "alpha")
        spec = cls(np.asarray(data["alpha"], dtype=np.float64), data.get("name"))
        for key, actual in (("n", spec.n), ("l", spec.l)):
            declared = data.get(key)
            if declared is not None and int(declared) != actual:
                raise ValidationError(
                    f"Declared {key}={declared} does not match alpha ({actual})",
                    field=key,
                )
        return spec


def canonical_witness(name: str) -> WitnessSpec:
    """Return one of the named witnesses I3, I4 or R4.

    Examples
    --------
    >>> canonical_witness("I3").alpha.tolist()
    [[1.0, 1.0], [1.0, -1.0], [-1.0, 0.0]]
    """
    key = name.strip().upper()
    if key not in CANONICAL_WITNESSES:
        raise ValidationError(
            f"Unknown witness '{name}'. Must be one of: "
            f"{', '.join(CANONICAL_WITNESSES)}",
            field="name",
        )
    return WitnessSpec(np.asarray(CANONICAL_WITNESSES[key], dtype=np.float64), key)


@dataclass(frozen=True, eq=False)
class QuantumEnsemble:
    """States ``rho_x`` emitted with uniform prior ``1/n``."""

    states: tuple[DensityMatrix, ...]

    def __post_init__(self) -> None:
        states = tuple(as_density_matrix(state) for state in self.states)
        if not states:
            raise ValidationError("Ensemble needs at least one state", "states")
        dims = {state.d for state in states}
        if len(dims) != 1:
            raise DimensionMismatchError(
                f"Ensemble states have different dimensions: {sorted(dims)}",
                field="states",
            )
        object.__setattr__(self, "states", states)

    @classmethod
    def from_vectors(cls, vectors: Iterable[ArrayLike]) -> QuantumEnsemble:
        """Build an ensemble of pure states from (unnormalized) amplitudes."""
        return cls(tuple(DensityMatrix.from_pure(vec) for vec in vectors))

    @property
    def n(self) -> int:
        """Number of states."""
        return len(self.states)

    @property
    def d(self) -> int:
        """Common Hilbert space dimension."""
        return self.states[0].d

    def matrices(self) -> ComplexArray:
        """Stack the states into an ``(n, d, d)`` array."""
        return np.stack([state.entries for state in self.states])

    def average(self) -> DensityMatrix:
        """Return ``(1/n) sum_x rho_x``."""
        return DensityMatrix(self.matrices().mean(axis=0))


@dataclass(frozen=True, eq=False)
class Measurement:
    """Observable with eigenvalues in {-1, +1}, stored as signed projectors.

    ``minus_basis`` holds orthonormal columns spanning the -1 eigenspace;
    the operator is ``1 - 2 P_minus``. The rank of ``P_minus`` is free, which
    covers both ``1 - 2|m><m|`` and higher-rank forms.
    """

    minus_basis: ComplexArray
    d: int

    def __post_init__(self) -> None:
        basis = np.asarray(self.minus_basis, dtype=np.complex128)
        if basis.ndim == 1:
            basis = basis.reshape(-1, 1)
        if basis.ndim != 2 or basis.shape[0] != self.d:
            raise DimensionMismatchError(
                f"Projector basis shape {basis.shape} does not match d={self.d}",
                field="minus_basis",
            )
        gram = basis.conj().T @ basis
        if basis.shape[1] and np.max(np.abs(gram - np.eye(basis.shape[1]))) > (
            SIGN_EIGENVALUE_TOL
        ):
            raise ValidationError(
                "Projector basis columns are not orthonormal", "minus_basis"
            )
        object.__setattr__(self, "minus_basis", basis)

    @classmethod
    def identity(cls, d: int) -> Measurement:
        """The trivial observable ``+1``."""
        return cls(np.zeros((d, 0), dtype=np.complex128), d)

    @classmethod
    def from_projection(cls, vectors: ArrayLike) -> Measurement:
        """Build ``1 - 2 sum_r |m_r><m_r|`` from one or more vectors.

        Parameters
        ----------
        vectors : array_like
            A single vector, or a sequence of vectors spanning the -1
            eigenspace. They are orthonormalized by QR, so rounded inputs
            that are only approximately orthogonal are accepted.

        Returns
        -------
        Measurement
            The signed-projector observable
        """
        arr = np.asarray(vectors, dtype=np.complex128)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        columns = arr.T
        q, r = np.linalg.qr(columns)
        if np.min(np.abs(np.diag(r))) < SIGN_EIGENVALUE_TOL:
            raise ValidationError("Projection vectors are linearly dependent")
        # QR fixes the span; restore the phase of each input vector
        phases = np.diag(r) / np.abs(np.diag(r))
        return cls(q * phases, columns.shape[0])

    @classmethod
    def from_signs(cls, vectors: ComplexArray, signs: ArrayLike) -> Measurement:
        """Build ``sum_k s_k |v_k><v_k|`` from orthonormal columns and signs."""
        sign_arr = np.asarray(signs)
        return cls(vectors[:, sign_arr < 0], vectors.shape[0])

    @property
    def rank_minus(self) -> int:
        """Rank of the -1 projector."""
        return int(self.minus_basis.shape[1])

    @property
    def op(self) -> ComplexArray:
        """The observable as a ``d x d`` matrix."""
        basis = self.minus_basis
        return np.eye(self.d, dtype=np.complex128) - 2.0 * (basis @ basis.conj().T)

    def signed_projectors(self) -> list[tuple[int, ComplexArray]]:
        """Return ``[(sign, basis)]`` for the -1 and +1 eigenspaces."""
        return [(-1, self.minus_basis), (1, self._plus_basis())]

    def negated(self) -> Measurement:
        """Return ``-M``, swapping the two eigenspaces."""
        return Measurement(self._plus_basis(), self.d)

    def _plus_basis(self) -> ComplexArray:
        if self.rank_minus == 0:
            return np.eye(self.d, dtype=np.complex128)
        return np.asarray(
            scipy.linalg.null_space(self.minus_basis.conj().T), dtype=np.complex128
        )


def _check_shapes(
    ens: QuantumEnsemble, spec: WitnessSpec, meas: Sequence[Measurement] | None = None
) -> None:
    if ens.n != spec.n:
        raise DimensionMismatchError(
            f"Ensemble has {ens.n} states but the witness expects {spec.n}",
            field="states",
        )
    if meas is None:
        return
    if len(meas) != spec.l:
        raise DimensionMismatchError(
            f"Got {len(meas)} measurements but the witness expects {spec.l}",
            field="meas",
        )
    for y, m in enumerate(meas):
        if m.d != ens.d:
            raise DimensionMismatchError(
                f"Measurement {y} acts on dimension {m.d}, states have {ens.d}",
                field="meas",
            )


def expectation_table(
    ens: QuantumEnsemble, meas: Sequence[Measurement]
) -> FloatArray:
    """Return ``E[x, y] = tr(rho_x M_y)`` as an ``n x l`` real array."""
    rhos = ens.matrices()
    ops = np.stack([m.op for m in meas])
    table = np.einsum("xij,yji->xy", rhos, ops)
    return np.asarray(table.real, dtype=np.float64)


def quantum_value(
    ens: QuantumEnsemble, meas: Sequence[Measurement], spec: WitnessSpec
) -> float:
    """Witness value ``sum_xy alpha_xy tr(rho_x M_y)``.

    Parameters
    ----------
    ens : QuantumEnsemble
        The ``n`` prepared states
    meas : Sequence[Measurement]
        The ``l`` observables
    spec : WitnessSpec
        Witness coefficients

    Returns
    -------
    float
        The witness value
    """
    _check_shapes(ens, spec, meas)
    return float(np.sum(spec.alpha * expectation_table(ens, meas)))


def witness_operators(rhos: ComplexArray, alpha: FloatArray) -> ComplexArray:
    """Return ``rho^(y) = sum_x alpha_xy rho_x`` stacked over ``y``."""
    return np.einsum("xy,xij->yij", alpha, rhos)


def bound_from_matrices(rhos: ComplexArray, alpha: FloatArray) -> float:
    """Eigenvalue-sum bound on raw ``(n, d, d)`` state matrices."""
    ops = witness_operators(rhos, alpha)
    return float(np.abs(np.linalg.eigvalsh(ops)).sum())


def eigen_sum_bound(ens: QuantumEnsemble, spec: WitnessSpec) -> float:
    """Upper bound ``sum_y sum_k |lambda_yk|`` on the witness over all measurements.

    ``lambda_yk`` are the eigenvalues of ``rho^(y)``. The bound is attained
    by the measurements from :func:`recover_measurements`.
    """
    _check_shapes(ens, spec)
    return bound_from_matrices(ens.matrices(), spec.alpha)


def measurements_from_matrices(
    rhos: ComplexArray, alpha: FloatArray
) -> list[Measurement]:
    """Sign-operator measurements for raw state matrices."""
    result = []
    for op in witness_operators(rhos, alpha):
        values, vectors = np.linalg.eigh(op)
        # zero eigenvalues take +1
        signs = np.where(values < -ZERO_EIGENVALUE_TOL, -1, 1)
        result.append(Measurement.from_signs(vectors, signs))
    return result


def recover_measurements(ens: QuantumEnsemble, spec: WitnessSpec) -> list[Measurement]:
    """Measurements ``M_y = sum_k sign(lambda_yk) |v_yk><v_yk|`` saturating the bound.

    Returns
    -------
    list[Measurement]
        One observable per column of ``spec.alpha``
    """
    _check_shapes(ens, spec)
    return measurements_from_matrices(ens.matrices(), spec.alpha)

