"""Rank-1 decompositions that keep an expectation value fixed.

Any density matrix can be written as a mixture of pure states that all share
its expectation value ``tr(rho M)`` for a given Hermitian ``M``. The
construction works in the eigenbasis of ``rho``: a rank-2 state splits into
two real superpositions of its eigenvectors, and a higher-rank state sheds
two such pure states at a time while its remainder loses rank. Applying the
decomposition to every state of an ensemble, against the operator that the
state sees in the witness, gives rank-1 ensembles with the same witness
value and no larger average entropy.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import scipy.optimize

from .constants import (
    BISECTION_XTOL,
    DIAGONAL_TIE_TOL,
    MAX_COMBINATIONS,
    NORM_TOL,
    RANK_TOL,
)
from .exceptions import EnumerationLimitError, ValidationError
from .qcore import (
    ComplexArray,
    DensityMatrix,
    FloatArray,
    HermitianOp,
    MatrixLike,
    as_density_matrix,
    as_matrix,
    eigh,
    numerical_rank,
    von_neumann_entropy,
)
from .witness import Measurement, QuantumEnsemble, WitnessSpec, quantum_value

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SplitResult:
    """Weighted parts of a decomposition, with an optional remainder.

    ``sum(weights) + remainder weight = 1`` and the weighted sum of the
    parts and remainder reconstructs the input.
    """

    parts: tuple[tuple[float, DensityMatrix], ...]
    remainder: Optional[tuple[float, DensityMatrix]] = None
    roots: Optional[tuple[float, float]] = None
    branch: str = ""

    @property
    def weights(self) -> FloatArray:
        """Weights of the parts, excluding the remainder."""
        return np.array([w for w, _ in self.parts])

    def reconstruct(self) -> ComplexArray:
        """Weighted sum of parts and remainder."""
        total = sum(w * part.entries for w, part in self.parts)
        if self.remainder is not None:
            total = total + self.remainder[0] * self.remainder[1].entries
        return np.asarray(total, dtype=np.complex128)

    def to_dict(self) -> dict[str, Any]:
        """Serialize weights and matrices (real and imaginary parts)."""

        def encode(weight: float, state: DensityMatrix) -> dict[str, Any]:
            return {
                "weight": weight,
                "real": state.entries.real.tolist(),
                "imag": state.entries.imag.tolist(),
            }

        return {
            "branch": self.branch,
            "roots": list(self.roots) if self.roots else None,
            "parts": [encode(w, s) for w, s in self.parts],
            "remainder": encode(*self.remainder) if self.remainder else None,
        }


@dataclass(frozen=True, eq=False)
class EnsembleReduction:
    """Rank-1 ensemble produced by :func:`reduce_ensemble`.

    ``ensemble`` lives in the ``dimension``-dimensional span of the chosen
    pure states, expressed in the orthonormal columns of ``frame``.
    ``embedded`` holds the same states in the original space, where the
    original measurements still apply.
    """

    ensemble: QuantumEnsemble
    dimension: int
    frame: ComplexArray
    embedded: QuantumEnsemble
    choice: tuple[int, ...]
    entropy_before: float
    entropy_after: float
    witness_before: float
    witness_after: float


def _support(rho: DensityMatrix) -> tuple[FloatArray, ComplexArray]:
    spec = eigh(rho)
    keep = spec.eigenvalues > RANK_TOL
    values = spec.eigenvalues[keep]
    return values / values.sum(), spec.eigenvectors[:, keep]


def _operator(M: MatrixLike) -> ComplexArray:  # noqa: N803
    if isinstance(M, HermitianOp):
        return M.entries
    return HermitianOp(as_matrix(M)).entries


def _bisect(g: Callable[[float], float], lo: float, hi: float) -> float:
    return float(scipy.optimize.bisect(g, lo, hi, xtol=BISECTION_XTOL, maxiter=200))


def equal_expectation_roots(a: float, b: float, c: float) -> tuple[float, float]:
    """Roots of ``g(t) = a cos^2 t + b sin^2 t + c sin 2t`` on each side of zero.

    With ``a > 0 > b`` the function is positive at 0 and negative at
    ``+-pi/2``, so there is exactly one root in ``(0, pi/2)`` and one in
    ``(-pi/2, 0)``.
    """

    def g(t: float) -> float:
        return a * math.cos(t) ** 2 + b * math.sin(t) ** 2 + c * math.sin(2 * t)

    theta1 = _bisect(g, 0.0, math.pi / 2)
    theta2 = _bisect(g, -math.pi / 2, 0.0)
    return theta1, theta2


def _superposition(
    vectors: ComplexArray, i: int, j: int, theta: float
) -> DensityMatrix:
    vec = math.cos(theta) * vectors[:, i] + math.sin(theta) * vectors[:, j]
    return DensityMatrix.from_pure(vec)


def split_rank2(
    rho: DensityMatrix | MatrixLike, M: MatrixLike  # noqa: N803
) -> SplitResult:
    """Split a state of rank at most two into two pure states with equal ``tr(. M)``.

    Parameters
    ----------
    rho : DensityMatrix | array_like
        State with third-largest eigenvalue below ``1e-8``
    M : HermitianOp | array_like
        Hermitian operator whose expectation must be preserved

    Returns
    -------
    SplitResult
        Two rank-1 parts (one part of weight 1 for a pure input)

    Raises
    ------
    ValidationError
        If ``rho`` has rank above two

    Examples
    --------
    >>> res = split_rank2(np.diag([0.3, 0.7]), np.eye(2))
    >>> sorted(res.weights.round(3).tolist())
    [0.3, 0.7]
    """
    state = as_density_matrix(rho)
    op = _operator(M)
    values, vectors = _support(state)
    rank = values.size
    if rank == 1:
        pure = DensityMatrix.from_pure(vectors[:, 0])
        return SplitResult(((1.0, pure),), branch="rank1")
    if rank > 2:
        raise ValidationError(
            f"split_rank2 needs rank <= 2, got rank {rank}; use peel first", "rho"
        )

    m = vectors.conj().T @ op @ vectors
    diag = m.diagonal().real
    i, j = (0, 1) if diag[0] >= diag[1] else (1, 0)
    t = values[i] * diag[i] + values[j] * diag[j]
    a, b = diag[i] - t, diag[j] - t
    if diag[i] - diag[j] <= DIAGONAL_TIE_TOL or a <= 0.0 or b >= 0.0:
        logger.debug("split_rank2: equal diagonal, splitting along eigenvectors")
        parts = (
            (float(values[i]), DensityMatrix.from_pure(vectors[:, i])),
            (float(values[j]), DensityMatrix.from_pure(vectors[:, j])),
        )
        return SplitResult(parts, branch="case1")

    theta1, theta2 = equal_expectation_roots(a, b, float(m[i, j].real))
    s1, s2 = math.sin(2 * theta1), math.sin(2 * theta2)
    mu0, mu1 = -s2 / (s1 - s2), s1 / (s1 - s2)
    parts = (
        (mu0, _superposition(vectors, i, j, theta1)),
        (mu1, _superposition(vectors, i, j, theta2)),
    )
    return SplitResult(parts, roots=(theta1, theta2), branch="case2")


def peel(rho: DensityMatrix | MatrixLike, M: MatrixLike) -> SplitResult:  # noqa: N803
    """Remove two pure states from a state of rank above two.

    Both removed states have ``tr(. M) = tr(rho M)``, and the remainder is a
    valid state of strictly lower rank with the same expectation value.

    Parameters
    ----------
    rho : DensityMatrix | array_like
        State of rank ``r > 2``
    M : HermitianOp | array_like
        Hermitian operator

    Returns
    -------
    SplitResult
        Two rank-1 parts plus ``(mu', rho')``

    Raises
    ------
    ValidationError
        If ``rho`` has rank two or less
    """
    state = as_density_matrix(rho)
    op = _operator(M)
    values, vectors = _support(state)
    rank = values.size
    if rank <= 2:
        raise ValidationError(
            f"peel needs rank > 2, got rank {rank}; use split_rank2", "rho"
        )

    m = vectors.conj().T @ op @ vectors
    diag = m.diagonal().real
    i, j = int(np.argmax(diag)), int(np.argmin(diag))
    rest = values.copy()

    if diag[i] - diag[j] <= DIAGONAL_TIE_TOL:
        i, j = 0, 1
        parts = (
            (float(values[i]), DensityMatrix.from_pure(vectors[:, i])),
            (float(values[j]), DensityMatrix.from_pure(vectors[:, j])),
        )
        rest[[i, j]] = 0.0
        weight = float(1.0 - values[i] - values[j])
        return SplitResult(
            parts, remainder=(weight, _remainder(rest, vectors)), branch="case1"
        )

    t = float(values @ diag)
    theta1, theta2 = equal_expectation_roots(
        diag[i] - t, diag[j] - t, float(m[i, j].real)
    )
    s1, s2 = math.sin(2 * theta1), math.sin(2 * theta2)
    c1, c2 = math.cos(theta1) ** 2, math.cos(theta2) ** 2
    cos_term = s1 * c2 - s2 * c1
    sin_term = s1 * (1.0 - c2) - s2 * (1.0 - c1)

    if cos_term / values[i] > sin_term / values[j]:
        branch = "case2.1"
        scale = values[i] / cos_term
        rest[j] = values[j] - values[i] * sin_term / cos_term
        rest[i] = 0.0
    else:
        branch = "case2.2"
        scale = values[j] / sin_term
        rest[i] = values[i] - values[j] * cos_term / sin_term
        rest[j] = 0.0
    mu0, mu1 = -s2 * scale, s1 * scale
    weight = float(1.0 - (s1 - s2) * scale)
    rest = np.clip(rest, 0.0, None)
    parts = (
        (float(mu0), _superposition(vectors, i, j, theta1)),
        (float(mu1), _superposition(vectors, i, j, theta2)),
    )
    logger.debug(f"peel: rank {rank}, {branch}, remainder weight {weight:.6g}")
    return SplitResult(
        parts,
        remainder=(weight, _remainder(rest, vectors)),
        roots=(theta1, theta2),
        branch=branch,
    )


def _remainder(values: FloatArray, vectors: ComplexArray) -> DensityMatrix:
    mat = (vectors * values) @ vectors.conj().T
    return DensityMatrix(mat / np.trace(mat).real)


def rank1_decompose(
    rho: DensityMatrix | MatrixLike, M: MatrixLike  # noqa: N803
) -> SplitResult:
    """Decompose a state into pure states that all share ``tr(rho M)``.

    Peels two parts at a time until the remainder has rank two or less, then
    splits the remainder.

    Returns
    -------
    SplitResult
        Rank-1 parts with weights summing to one and no remainder
    """
    current = as_density_matrix(rho)
    op = _operator(M)
    parts: list[tuple[float, DensityMatrix]] = []
    scale = 1.0
    while numerical_rank(current) > 2:
        step = peel(current, op)
        parts.extend((scale * w, s) for w, s in step.parts)
        assert step.remainder is not None
        scale *= step.remainder[0]
        current = step.remainder[1]
    final = split_rank2(current, op)
    parts.extend((scale * w, s) for w, s in final.parts)
    return SplitResult(tuple(parts), branch="rank1-decomposition")


def _leading_vector(state: DensityMatrix) -> ComplexArray:
    return eigh(state).eigenvectors[:, 0]


def gram_schmidt(vectors: Sequence[ComplexArray]) -> ComplexArray:
    """Orthonormal basis of the span of ``vectors``, built in order.

    Vectors already in the span of earlier ones are skipped.
    """
    frame: list[ComplexArray] = []
    for vec in vectors:
        residual = np.asarray(vec, dtype=np.complex128).copy()
        for basis in frame:
            residual = residual - np.vdot(basis, residual) * basis
        norm = float(np.linalg.norm(residual))
        if norm > NORM_TOL:
            frame.append(residual / norm)
    return np.column_stack(frame)


def reduce_ensemble(
    ens: QuantumEnsemble, meas: Sequence[Measurement], spec: WitnessSpec
) -> EnsembleReduction:
    """Replace an ensemble by a rank-1 ensemble in at most ``n`` dimensions.

    Each state ``rho_x`` is decomposed against ``M^(x) = sum_y alpha_xy M_y``.
    Picking one part per state keeps the witness value; the combination with
    the lowest average entropy is kept (first one in scan order on ties) and
    re-expressed in the orthonormal frame spanned by the chosen states.

    Parameters
    ----------
    ens : QuantumEnsemble
        Input states, any dimension
    meas : Sequence[Measurement]
        Observables of the witness
    spec : WitnessSpec
        Witness coefficients

    Returns
    -------
    EnsembleReduction
        The compressed ensemble, its dimension, the frame and diagnostics

    Raises
    ------
    EnumerationLimitError
        If the number of part combinations exceeds ``10**6``
    """
    witness_before = quantum_value(ens, meas, spec)
    ops = np.einsum("xy,yij->xij", spec.alpha, np.stack([m.op for m in meas]))
    decompositions = [
        rank1_decompose(state, op) for state, op in zip(ens.states, ops)
    ]
    counts = [len(dec.parts) for dec in decompositions]
    total = math.prod(counts)
    if total > MAX_COMBINATIONS:
        raise EnumerationLimitError(
            f"{total} part combinations exceed the scan limit",
            count=total,
            limit=MAX_COMBINATIONS,
        )
    logger.debug(f"reduce_ensemble: parts per state {counts}, {total} combinations")

    projectors = [np.stack([s.entries for _, s in dec.parts]) for dec in decompositions]
    best_entropy = math.inf
    best_choice: tuple[int, ...] = tuple(0 for _ in counts)
    for choice in itertools.product(*(range(c) for c in counts)):
        avg = sum(projectors[x][k] for x, k in enumerate(choice)) / ens.n
        entropy = von_neumann_entropy(avg)
        if entropy < best_entropy - 1e-12:
            best_entropy, best_choice = entropy, choice

    chosen = [decompositions[x].parts[k][1] for x, k in enumerate(best_choice)]
    vectors = [_leading_vector(state) for state in chosen]
    frame = gram_schmidt(vectors)
    compressed = QuantumEnsemble.from_vectors(frame.conj().T @ vec for vec in vectors)
    embedded = QuantumEnsemble(tuple(chosen))
    return EnsembleReduction(
        ensemble=compressed,
        dimension=int(frame.shape[1]),
        frame=frame,
        embedded=embedded,
        choice=best_choice,
        entropy_before=von_neumann_entropy(ens.average()),
        entropy_after=von_neumann_entropy(compressed.average()),
        witness_before=witness_before,
        witness_after=quantum_value(embedded, meas, spec),
    )
