"""Minimal von Neumann entropy at a fixed witness value.

The search runs over pure states in dimension ``n``, parameterized by
hyperspherical angles with the first state pinned to ``|0>``. Measurements
never enter the search: for a given ensemble the best witness value is the
eigenvalue-sum bound, and the sign-operator measurements attain it. The
constraint ``bound(states) = W`` is handled by a quadratic penalty with an
increasing schedule, followed by a Newton projection onto the constraint and
an optional equality-constrained refinement.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import scipy.optimize

from .classical import min_classical_entropy, mixture_witness
from .config import OptimizationConfig
from .constants import (
    CURVE_MONOTONE_TOL,
    FEASIBILITY_TOL,
    GRADIENT_STEP,
    POLISH_MAX_STEPS,
)
from .exceptions import (
    ConvergenceError,
    EntropyWitnessError,
    InfeasibleError,
    ValidationError,
)
from .qcore import ComplexArray, FloatArray, PureState, entropy_bits
from .witness import (
    Measurement,
    QuantumEnsemble,
    WitnessSpec,
    bound_from_matrices,
    measurements_from_matrices,
)

logger = logging.getLogger(__name__)

KINDS = ("classical", "quantum")


@dataclass(frozen=True, eq=False)
class StateAngles:
    """Hyperspherical angles of ``n`` pure states in dimension ``n``.

    ``theta`` and ``phi`` hold the lower-triangular entries row by row:
    state ``x + 1`` (for ``x = 1 .. n-1``) uses the ``x`` entries of row
    ``x``. Angles are in radians.
    """

    theta: FloatArray
    phi: FloatArray

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=np.float64).reshape(-1)
        phi = np.asarray(self.phi, dtype=np.float64).reshape(-1)
        if theta.shape != phi.shape:
            raise ValidationError(
                f"theta and phi differ in size ({theta.size} vs {phi.size})", "phi"
            )
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @property
    def n(self) -> int:
        """Number of states implied by the triangular size."""
        return _states_for_size(self.theta.size)

    @classmethod
    def zeros(cls, n: int) -> StateAngles:
        """All angles zero, so every state is ``|0>``."""
        size = triangular_size(n)
        return cls(np.zeros(size), np.zeros(size))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> StateAngles:
        """Draw ``theta`` uniform on ``[0, pi/2]`` and ``phi`` on ``[0, 2 pi)``."""
        size = triangular_size(n)
        theta = rng.uniform(0.0, math.pi / 2, size)
        return cls(theta, rng.uniform(0.0, 2 * math.pi, size))

    @classmethod
    def from_vector(cls, x: FloatArray) -> StateAngles:
        """Split a flat parameter vector ``[theta..., phi...]``."""
        half = x.size // 2
        return cls(x[:half], x[half:])

    def to_vector(self) -> FloatArray:
        """Flatten to ``[theta..., phi...]``."""
        return np.concatenate([self.theta, self.phi])


def triangular_size(n: int) -> int:
    """Number of angles of each kind for ``n`` states."""
    if n < 1:
        raise ValidationError(f"Need at least one state, got n={n}", "n")
    return n * (n - 1) // 2


def _states_for_size(size: int) -> int:
    n = int(round((1 + math.sqrt(1 + 8 * size)) / 2))
    if triangular_size(n) != size:
        raise ValidationError(f"{size} angles do not form a triangular array", "theta")
    return n


def _hyperspherical(theta: FloatArray, phi: FloatArray) -> ComplexArray:
    sines = np.concatenate(([1.0], np.cumprod(np.sin(theta))))
    cosines = np.concatenate((np.cos(theta), [1.0]))
    phases = np.concatenate(([1.0], np.exp(1j * phi)))
    return sines * cosines * phases


def state_vectors(angles: StateAngles, n: int) -> ComplexArray:
    """Amplitudes of the parameterized states as rows of an ``(n, n)`` array."""
    if angles.theta.size != triangular_size(n):
        raise ValidationError(
            f"Expected {triangular_size(n)} angles for n={n}, got {angles.theta.size}",
            field="theta",
        )
    vectors = np.zeros((n, n), dtype=np.complex128)
    vectors[0, 0] = 1.0
    start = 0
    for x in range(1, n):
        row = slice(start, start + x)
        vectors[x, : x + 1] = _hyperspherical(angles.theta[row], angles.phi[row])
        start += x
    return vectors


def build_states(angles: StateAngles, n: int) -> list[PureState]:
    """Pure states of the hyperspherical parameterization.

    State ``x`` (1-based) is supported on the first ``x`` coordinates and
    has unit norm for any angles.

    Examples
    --------
    >>> states = build_states(StateAngles.zeros(3), 3)
    >>> [s.amplitudes.real.tolist() for s in states]
    [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]
    """
    return [PureState(vec) for vec in state_vectors(angles, n)]


def _ensemble_matrices(x: FloatArray, n: int) -> ComplexArray:
    vectors = state_vectors(StateAngles.from_vector(x), n)
    return np.einsum("xi,xj->xij", vectors, vectors.conj())


def _average_entropy(rhos: ComplexArray) -> float:
    avg = rhos.mean(axis=0)
    values = np.clip(np.linalg.eigvalsh(avg), 0.0, 1.0)
    return entropy_bits(values)


class _Problem:
    """Entropy and bound of a parameter vector for one witness; picklable."""

    def __init__(self, alpha: FloatArray, target: float) -> None:
        self.alpha = alpha
        self.target = target
        self.n = alpha.shape[0]

    def entropy(self, x: FloatArray) -> float:
        return _average_entropy(_ensemble_matrices(x, self.n))

    def bound(self, x: FloatArray) -> float:
        return bound_from_matrices(_ensemble_matrices(x, self.n), self.alpha)

    def residual(self, x: FloatArray) -> float:
        return self.bound(x) - self.target

    def penalized(self, x: FloatArray, weight: float) -> float:
        rhos = _ensemble_matrices(x, self.n)
        gap = bound_from_matrices(rhos, self.alpha) - self.target
        return _average_entropy(rhos) + weight * gap * gap


def _gradient(fun: Callable[[FloatArray], float], x: FloatArray) -> FloatArray:
    grad = np.empty_like(x)
    for k in range(x.size):
        step = np.zeros_like(x)
        step[k] = GRADIENT_STEP
        grad[k] = (fun(x + step) - fun(x - step)) / (2 * GRADIENT_STEP)
    return grad


def _polish(problem: _Problem, x: FloatArray) -> FloatArray:
    """Newton steps along the constraint gradient until the residual vanishes."""
    for _ in range(POLISH_MAX_STEPS):
        gap = problem.residual(x)
        if abs(gap) <= FEASIBILITY_TOL:
            break
        grad = _gradient(problem.bound, x)
        norm2 = float(grad @ grad)
        if norm2 < 1e-18:
            break
        x = x - gap * grad / norm2
    return x


@dataclass(frozen=True)
class StartOutcome:
    """Result of one optimizer start."""

    index: int
    entropy: float
    residual: float
    x: FloatArray = field(repr=False)

    def converged(self, tol: float) -> bool:
        """Whether the start satisfied the constraint within ``tol``."""
        return abs(self.residual) <= tol


def _run_start(
    problem: _Problem, cfg: OptimizationConfig, index: int, seed: np.random.SeedSequence
) -> StartOutcome:
    rng = np.random.default_rng(seed)
    x = StateAngles.random(problem.n, rng).to_vector()
    if x.size == 0:
        return StartOutcome(index, problem.entropy(x), problem.residual(x), x)

    options = {
        "maxiter": cfg.max_iters,
        "xatol": cfg.objective_tol,
        "fatol": cfg.objective_tol,
        "adaptive": True,
    }
    for weight in cfg.penalty_schedule:
        result = scipy.optimize.minimize(
            problem.penalized, x, args=(weight,), method="Nelder-Mead", options=options
        )
        x = result.x
    x = _polish(problem, x)
    entropy, residual = problem.entropy(x), problem.residual(x)

    if cfg.refine and abs(residual) <= cfg.constraint_tol:
        refined = scipy.optimize.minimize(
            problem.entropy,
            x,
            method="SLSQP",
            constraints=[{"type": "eq", "fun": problem.residual}],
            options={"maxiter": 200, "ftol": cfg.objective_tol},
        )
        candidate = _polish(problem, refined.x)
        cand_entropy, cand_residual = (
            problem.entropy(candidate),
            problem.residual(candidate),
        )
        if abs(cand_residual) <= cfg.constraint_tol and cand_entropy < entropy:
            x, entropy, residual = candidate, cand_entropy, cand_residual

    logger.debug(f"start {index}: S={entropy:.6f} residual={residual:.2e}")
    return StartOutcome(index, entropy, residual, x)


def _run_starts(problem: _Problem, cfg: OptimizationConfig) -> list[StartOutcome]:
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.starts)
    indices = range(cfg.starts)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(
                pool.map(
                    _run_start,
                    [problem] * cfg.starts,
                    [cfg] * cfg.starts,
                    indices,
                    seeds,
                )
            )
    else:
        outcomes = [_run_start(problem, cfg, k, seeds[k]) for k in indices]
    return outcomes


@dataclass(frozen=True, eq=False)
class QuantumSolution:
    """Best ensemble found by :func:`solve_quantum` with diagnostics."""

    entropy: float
    ensemble: QuantumEnsemble
    measurements: list[Measurement]
    residual: float
    starts_converged: int
    starts: int


def quantum_maximum(spec: WitnessSpec) -> float:
    """Largest eigenvalue-sum bound over ensembles in dimension ``n``.

    Orthonormal states give ``rho^(y)`` the eigenvalues ``alpha_xy``, and the
    trace norm of ``sum_x alpha_xy rho_x`` never exceeds ``sum_x |alpha_xy|``,
    so the maximum is ``sum_xy |alpha_xy|``.

    Examples
    --------
    >>> from entropy_witness.witness import canonical_witness
    >>> quantum_maximum(canonical_witness("I4"))
    9.0
    """
    return spec.absolute_sum()


def estimate_quantum_maximum(spec: WitnessSpec, cfg: OptimizationConfig) -> float:
    """Numerical maximum of the eigenvalue-sum bound by multistart search.

    Used to cross-check :func:`quantum_maximum`.
    """
    problem = _Problem(spec.alpha, 0.0)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.starts)
    best = -math.inf
    for seed in seeds:
        x0 = StateAngles.random(problem.n, np.random.default_rng(seed)).to_vector()
        if x0.size == 0:
            best = max(best, problem.bound(x0))
            continue
        result = scipy.optimize.minimize(
            lambda x: -problem.bound(x),
            x0,
            method="Nelder-Mead",
            options={"maxiter": cfg.max_iters, "adaptive": True},
        )
        best = max(best, -float(result.fun))
    logger.debug(f"Estimated quantum maximum for {spec.label}: {best:.6f}")
    return best


def _zero_entropy_solution(
    spec: WitnessSpec, W: float  # noqa: N803
) -> QuantumSolution:
    """A repeated pure state with rank-1 measurements tuned to reach ``W``."""
    d = max(spec.n, 2)
    columns = spec.alpha.sum(axis=0)
    total = float(np.abs(columns).sum())
    vectors = np.zeros((spec.n, d), dtype=np.complex128)
    vectors[:, 0] = 1.0
    ensemble = QuantumEnsemble.from_vectors(vectors)

    measurements = []
    for c_y in columns:
        target = 1.0 if total == 0.0 else math.copysign(1.0, c_y) * W / total
        # <0| (1 - 2|m><m|) |0> = 1 - 2 cos^2 t
        cos_t = math.sqrt(max(0.0, (1.0 - target) / 2.0))
        m = np.zeros(d, dtype=np.complex128)
        m[0], m[1] = cos_t, math.sqrt(max(0.0, 1.0 - cos_t**2))
        measurements.append(Measurement.from_projection(m))
    return QuantumSolution(0.0, ensemble, measurements, 0.0, 0, 0)


def solve_quantum(
    spec: WitnessSpec, W: float, cfg: Optional[OptimizationConfig] = None  # noqa: N803
) -> QuantumSolution:
    """Run the minimizer and keep its diagnostics.

    See :func:`min_quantum_entropy` for the contract.
    """
    cfg = cfg or OptimizationConfig()
    top = quantum_maximum(spec)
    if abs(W) > top + FEASIBILITY_TOL:
        raise InfeasibleError(
            f"W={W} is outside the quantum range [-{top:.6g}, {top:.6g}]",
            value=W,
            bound=top,
        )
    if abs(W) <= spec.column_sum_bound() + FEASIBILITY_TOL:
        logger.debug(f"W={W} reachable by a repeated pure state, S=0")
        return _zero_entropy_solution(spec, W)

    problem = _Problem(spec.alpha, abs(W))
    outcomes = _run_starts(problem, cfg)
    converged = [o for o in outcomes if o.converged(cfg.constraint_tol)]
    if not converged:
        best = min(outcomes, key=lambda o: (abs(o.residual), o.index))
        raise ConvergenceError(
            f"No start reached the constraint tolerance {cfg.constraint_tol:g} "
            f"for W={W} (best residual {abs(best.residual):.3e})",
            best_residual=abs(best.residual),
            best=best,
        )
    best = min(converged, key=lambda o: (o.entropy, o.index))

    rhos = _ensemble_matrices(best.x, problem.n)
    vectors = state_vectors(StateAngles.from_vector(best.x), problem.n)
    ensemble = QuantumEnsemble.from_vectors(vectors)
    measurements = measurements_from_matrices(rhos, spec.alpha)
    if W < 0:
        measurements = [m.negated() for m in measurements]
    logger.info(
        f"{spec.label} W={W}: S={best.entropy:.6f} "
        f"({len(converged)}/{len(outcomes)} starts converged)"
    )
    return QuantumSolution(
        entropy=best.entropy,
        ensemble=ensemble,
        measurements=measurements,
        residual=abs(best.residual),
        starts_converged=len(converged),
        starts=len(outcomes),
    )


def min_quantum_entropy(
    spec: WitnessSpec, W: float, cfg: Optional[OptimizationConfig] = None  # noqa: N803
) -> tuple[float, QuantumEnsemble, list[Measurement]]:
    """Smallest average-state entropy of ensembles reaching witness value ``W``.

    Parameters
    ----------
    spec : WitnessSpec
        Witness coefficients
    W : float
        Target value, ``|W|`` at most :func:`quantum_maximum`
    cfg : OptimizationConfig, optional
        Multistart settings; defaults when omitted

    Returns
    -------
    tuple[float, QuantumEnsemble, list[Measurement]]
        Entropy in bits (an upper bound on the true minimum), rank-1 states
        in dimension ``n`` and measurements whose witness value is ``W``

    Raises
    ------
    InfeasibleError
        If ``|W|`` exceeds the quantum maximum
    ConvergenceError
        If no start met ``constraint_tol``
    """
    solution = solve_quantum(spec, W, cfg)
    return solution.entropy, solution.ensemble, solution.measurements


@dataclass(frozen=True)
class CurveSample:
    """One point of an entropy curve."""

    W: float  # noqa: N815
    value: float
    residual: float = 0.0
    starts_converged: Optional[int] = None
    repaired: bool = False
    error: Optional[str] = None


@dataclass(frozen=True)
class EntropyCurve:
    """Minimal entropy sampled over increasing witness values."""

    kind: str
    samples: tuple[CurveSample, ...]
    witness: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValidationError(f"Curve kind must be one of {KINDS}", "kind")
        grid = [s.W for s in self.samples]
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("Curve W values must be strictly increasing", "W")

    def values(self) -> FloatArray:
        """Entropy values, ``nan`` where a point failed."""
        return np.array([s.value for s in self.samples])

    def rows(self) -> list[dict[str, Any]]:
        """Rows with the CSV columns ``W, value, residual, starts_converged``."""
        return [
            {
                "W": s.W,
                "value": s.value,
                "residual": s.residual,
                "starts_converged": s.starts_converged,
            }
            for s in self.samples
        ]

    def to_dict(self) -> dict[str, Any]:
        """Serialize for JSON reports."""
        return {
            "kind": self.kind,
            "witness": self.witness,
            "samples": [
                {**row, "repaired": s.repaired, "error": s.error}
                for row, s in zip(self.rows(), self.samples)
            ],
        }


def _monotone_repair(samples: list[CurveSample]) -> list[CurveSample]:
    """Lower each sample to the smallest later value when it exceeds it."""
    repaired = list(samples)
    running = math.inf
    for k in range(len(samples) - 1, -1, -1):
        sample = samples[k]
        if math.isnan(sample.value):
            continue
        if sample.value - running > CURVE_MONOTONE_TOL:
            logger.debug(
                f"Repairing curve at W={sample.W}: {sample.value:.6f} -> {running:.6f}"
            )
            repaired[k] = CurveSample(
                sample.W,
                running,
                sample.residual,
                sample.starts_converged,
                repaired=True,
            )
        running = min(running, repaired[k].value)
    return repaired


def entropy_curve(
    spec: WitnessSpec,
    kind: str,
    W_grid: Sequence[float],  # noqa: N803
    cfg: Optional[OptimizationConfig] = None,
) -> EntropyCurve:
    """Minimal classical or quantum entropy at each grid value.

    Failures at single points are recorded in the sample (``value`` is
    ``nan``) rather than raised. Quantum samples that exceed a later sample
    by more than ``2e-3`` are lowered to it, since the exact minimum is
    non-decreasing and every later value is an upper bound.
    """
    if kind not in KINDS:
        raise ValidationError(f"Curve kind must be one of {KINDS}", "kind")
    grid = [float(w) for w in W_grid]
    if not grid:
        raise ValidationError("W grid is empty", "W_grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("W grid must be strictly increasing", "W_grid")

    samples: list[CurveSample] = []
    for w in grid:
        try:
            if kind == "classical":
                h, mix = min_classical_entropy(spec, w)
                residual = abs(mixture_witness(mix, spec) - w)
                samples.append(CurveSample(w, h, residual))
            else:
                sol = solve_quantum(spec, w, cfg)
                samples.append(
                    CurveSample(w, sol.entropy, sol.residual, sol.starts_converged)
                )
        except EntropyWitnessError as e:
            logger.warning(f"{kind} curve point W={w} failed: {e}")
            samples.append(CurveSample(w, math.nan, math.nan, error=str(e)))

    if kind == "quantum":
        samples = _monotone_repair(samples)
    return EntropyCurve(kind, tuple(samples), spec.label)


@dataclass(frozen=True)
class GapReport:
    """Classical and quantum minima at one witness value."""

    W: float  # noqa: N815
    H_min: float  # noqa: N815
    S_min: float  # noqa: N815
    witness: str = ""
    gap: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gap", self.H_min - self.S_min)

    def to_dict(self) -> dict[str, Any]:
        """Serialize for JSON reports."""
        return {
            "witness": self.witness,
            "W": self.W,
            "H_min": self.H_min,
            "S_min": self.S_min,
            "gap": self.gap,
        }


def gap_report(
    spec: WitnessSpec, W: float, cfg: Optional[OptimizationConfig] = None  # noqa: N803
) -> GapReport:
    """Classical minus quantum minimal entropy at ``W``.

    Examples
    --------
    >>> from entropy_witness.witness import canonical_witness
    >>> gap_report(canonical_witness("R4"), 0.0).gap
    0.0
    """
    h_min, _ = min_classical_entropy(spec, W)
    s_min = solve_quantum(spec, W, cfg).entropy
    return GapReport(W, h_min, s_min, spec.label)
