"""Simulation of the two-photon polarization experiment.

Four basis states are encoded in the polarizations of a signal and an idler
photon. Half- and quarter-wave plates prepare a state and project onto a
measurement state; detections are coincidences between output ports
``a``/``c`` (signal) and ``b``/``d`` (idler).

Angles are stored in degrees and converted to radians only inside the
state formulas.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Optional

import numpy as np

from .certificates import certificate
from .config import SimConfig
from .constants import (
    CASES,
    ESTIMATORS,
    LEAKAGE_TOL,
    MESSAGE_PORTS,
    MODES,
    PORTS,
)
from .exceptions import InvalidStateError, ValidationError
from .qcore import (
    ComplexArray,
    DensityMatrix,
    FloatArray,
    PureState,
    shannon_entropy,
    von_neumann_entropy,
)
from .tables import (
    CLASSICAL_PREPARATION,
    QUANTUM_MEASUREMENT,
    QUANTUM_PREPARATION,
)
from .validators import ensure_probabilities, validate_case, validate_mode

if TYPE_CHECKING:
    from .tomo import TomographyDataset

logger = logging.getLogger(__name__)

_STAGE_WITNESS = 0
_STAGE_TOMOGRAPHY = 1
_STAGE_CLASSICAL = 2


@dataclass(frozen=True)
class WavePlateSetting:
    """Rotation angles in degrees of the signal and idler wave plates.

    A preparation uses ``h_s``, ``q_s`` and ``h_i``; a projection also uses
    the idler quarter-wave plate ``q_i``.
    """

    h_s: float
    q_s: float
    h_i: float
    q_i: float = 0.0
    label: str = ""

    def __post_init__(self) -> None:
        angles = (self.h_s, self.q_s, self.h_i, self.q_i)
        if not all(math.isfinite(a) for a in angles):
            raise ValidationError(
                f"Wave-plate angles must be finite: {angles}", field="angle"
            )

    @classmethod
    def from_row(cls, row: tuple[float, ...], label: str = "") -> WavePlateSetting:
        """Build a setting from a table row ``(h_s, q_s, h_i[, q_i])``."""
        h_s, q_s, h_i, *rest = (float(a) for a in row)
        return cls(h_s, q_s, h_i, rest[0] if rest else 0.0, label=label)

    def jittered(self, rng: np.random.Generator, std: float) -> WavePlateSetting:
        """Copy with independent Gaussian errors of ``std`` degrees per plate."""
        noise = rng.normal(0.0, std, 4) if std > 0 else np.zeros(4)
        return replace(
            self,
            h_s=self.h_s + float(noise[0]),
            q_s=self.q_s + float(noise[1]),
            h_i=self.h_i + float(noise[2]),
            q_i=self.q_i + float(noise[3]),
        )


def _prepared_pair(h: float, q: float) -> tuple[complex, complex]:
    h2, q2 = math.radians(2 * h), math.radians(2 * q)
    a = complex(math.cos(q2 - h2), -math.cos(h2)) / math.sqrt(2)
    b = complex(math.sin(q2 - h2), -math.sin(h2)) / math.sqrt(2)
    return a, b


def _projected_pair(h: float, q: float) -> tuple[complex, complex]:
    h2, q2 = math.radians(2 * h), math.radians(2 * q)
    return complex(math.cos(q2 - h2), math.cos(h2)), complex(
        math.sin(q2 - h2), math.sin(h2)
    )


def prepare_state(setting: WavePlateSetting) -> PureState:
    """Prepared four-level state for the given preparation angles.

    The idler half-wave plate splits the signal state between the
    ``{|0>, |1>}`` and ``{|3>, |2>}`` blocks.

    Examples
    --------
    >>> psi = prepare_state(WavePlateSetting(0.0, 0.0, 0.0))
    >>> np.abs(psi.amplitudes).round(6).tolist()
    [1.0, 0.0, 0.0, 0.0]
    """
    a, b = _prepared_pair(setting.h_s, setting.q_s)
    hi2 = math.radians(2 * setting.h_i)
    c, s = math.cos(hi2), math.sin(hi2)
    return PureState(np.array([a * c, b * c, b * s, a * s], dtype=np.complex128))


def projection_state(setting: WavePlateSetting) -> PureState:
    """Four-level state a coincidence at ports ``a`` and ``b`` projects onto."""
    a_s, b_s = _projected_pair(setting.h_s, setting.q_s)
    a_i, b_i = _projected_pair(setting.h_i, setting.q_i)
    vec = 0.5 * np.array([a_s * a_i, b_s * a_i, b_s * b_i, a_s * b_i])
    return PureState(vec.astype(np.complex128))


def born_probability(m: PureState, psi: PureState) -> float:
    """Return ``|<m|psi>|^2`` clipped to ``[0, 1]``."""
    return float(min(1.0, max(0.0, abs(np.vdot(m.amplitudes, psi.amplitudes)) ** 2)))


@dataclass(frozen=True, eq=False)
class CoincidenceRecord:
    """Coincidence counts per port pair collected over ``duration`` seconds."""

    counts: dict[str, float]
    duration: float
    setting: str = ""

    def __post_init__(self) -> None:
        unknown = set(self.counts) - set(PORTS)
        if unknown:
            raise ValidationError(f"Unknown port pairs {sorted(unknown)}", "counts")
        if any(v < 0 for v in self.counts.values()):
            raise ValidationError("Coincidence counts must be non-negative", "counts")
        object.__setattr__(
            self, "counts", {p: float(self.counts.get(p, 0.0)) for p in PORTS}
        )

    @property
    def total(self) -> float:
        """Sum of the counts over all port pairs."""
        return float(sum(self.counts.values()))

    def row(self) -> dict[str, Any]:
        """CSV row: setting, one ``D_<ports>`` column per pair, duration."""
        return {
            "setting": self.setting,
            **{f"D_{p}": self.counts[p] for p in PORTS},
            "duration": self.duration,
        }


def simulate_counts(
    probabilities: Mapping[str, float],
    cfg: SimConfig,
    rng: Optional[np.random.Generator] = None,
    duration: Optional[float] = None,
    setting: str = "",
) -> CoincidenceRecord:
    """Draw Poisson coincidence counts for one setting.

    Parameters
    ----------
    probabilities : Mapping[str, float]
        Probability per port pair; missing pairs have probability 0
    cfg : SimConfig
        Rates and seed; with ``cfg.exact`` the counts are the Poisson means
    rng : numpy.random.Generator, optional
        Source of randomness, defaults to one seeded with ``cfg.seed``
    duration : float, optional
        Counting time in seconds, defaults to ``cfg.duration_per_setting``
    setting : str
        Identifier stored on the record

    Returns
    -------
    CoincidenceRecord
        Counts with mean ``p * pair_rate * duration + dark_rate * duration``

    Raises
    ------
    InvalidDistributionError
        If a probability is negative, the sum exceeds one or a port is unknown
    """
    ensure_probabilities(probabilities)
    p = np.array([float(probabilities.get(port, 0.0)) for port in PORTS])
    dur = cfg.duration_per_setting if duration is None else duration
    means = np.clip(p, 0.0, None) * cfg.pair_rate * dur + cfg.dark_rate * dur
    if cfg.exact:
        counts = means
    else:
        generator = rng if rng is not None else np.random.default_rng(cfg.seed)
        counts = generator.poisson(means).astype(np.float64)
    return CoincidenceRecord(dict(zip(PORTS, counts.tolist())), dur, setting)


def expectation(rec: CoincidenceRecord, formula: str) -> float:
    """Estimate an expectation value from a coincidence record.

    ``formula`` names an entry of :data:`~entropy_witness.constants.ESTIMATORS`,
    e.g. ``"quantum-I3"`` or ``"classical-R4-M2"``. The estimate is the
    signed count sum over the formula's port pairs divided by their total.

    Examples
    --------
    >>> rec = CoincidenceRecord({"ab": 50, "cb": 25, "cd": 25}, 30.0)
    >>> expectation(rec, "classical-I3-M1")
    0.5
    """
    signs = ESTIMATORS.get(formula)
    if signs is None:
        raise ValidationError(f"Unknown estimator '{formula}'", field="formula")
    denominator = sum(rec.counts[p] for p in signs)
    if denominator <= 0:
        raise ValidationError(
            f"Estimator '{formula}' has no counts in setting '{rec.setting}'",
            field="counts",
        )
    return float(sum(sign * rec.counts[p] for p, sign in signs.items()) / denominator)


def _rng(cfg: SimConfig, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=key))


def _check_case(case: str, mode: str) -> str:
    name = case.upper()
    if not validate_case(name):
        raise ValidationError(f"Unknown case '{case}'. Must be one of {CASES}", "case")
    if not validate_mode(mode):
        raise ValidationError(f"Unknown mode '{mode}'. Must be one of {MODES}", "mode")
    return name


def _jitter(cfg: SimConfig) -> float:
    return 0.0 if cfg.exact else cfg.angle_jitter_deg


def _plate(
    row: tuple[float, ...], rng: np.random.Generator, cfg: SimConfig
) -> WavePlateSetting:
    return WavePlateSetting.from_row(row).jittered(rng, _jitter(cfg))


@dataclass(frozen=True, eq=False)
class ProtocolReport:
    """Outcome of one simulated run of the witness experiment."""

    case: str
    mode: str
    value: float
    entropy: float
    expectations: FloatArray
    events: list[CoincidenceRecord]
    tomography: Optional[TomographyDataset] = None
    states: list[DensityMatrix] = field(default_factory=list)
    message_distribution: Optional[FloatArray] = None

    def rows(self) -> list[dict[str, Any]]:
        """Per-event count table."""
        return [event.row() for event in self.events]

    def to_dict(self) -> dict[str, Any]:
        """Summary values for JSON reports."""
        data: dict[str, Any] = {
            "case": self.case,
            "mode": self.mode,
            "w": self.value,
            "entropy": self.entropy,
            "expectations": self.expectations.tolist(),
        }
        if self.message_distribution is not None:
            data["message_distribution"] = self.message_distribution.tolist()
        if self.states:
            data["states"] = [
                {"real": s.entries.real.tolist(), "imag": s.entries.imag.tolist()}
                for s in self.states
            ]
        return data


def _quantum_events(
    case: str, cfg: SimConfig, trial: int
) -> tuple[FloatArray, list[CoincidenceRecord], list[PureState]]:
    prep_rows = QUANTUM_PREPARATION[case]
    meas_rows = QUANTUM_MEASUREMENT[case]
    plus_ports = [p for p, sign in ESTIMATORS[f"quantum-{case}"].items() if sign > 0]
    nominal = [prepare_state(WavePlateSetting.from_row(row)) for row in prep_rows]
    if case == "I3":
        leak = max(abs(psi.amplitudes[3]) for psi in nominal)
        if leak > LEAKAGE_TOL:
            raise InvalidStateError(
                f"I3 preparation leaks {leak:.3e} into the fourth level", "setting"
            )

    table = np.zeros((len(prep_rows), len(meas_rows)))
    events = []
    for x, prow in enumerate(prep_rows):
        for y, mrow in enumerate(meas_rows):
            rng = _rng(cfg, trial, _STAGE_WITNESS, x, y)
            psi = prepare_state(_plate(prow, rng, cfg))
            m = projection_state(_plate(mrow, rng, cfg))
            p_minus = born_probability(m, psi)
            probs = {"ab": p_minus}
            probs.update({p: (1.0 - p_minus) / len(plus_ports) for p in plus_ports})
            rec = simulate_counts(probs, cfg, rng, setting=f"E{x + 1}{y + 1}")
            table[x, y] = expectation(rec, f"quantum-{case}")
            events.append(rec)
    return table, events, nominal


def _tomography_counts(
    case: str, cfg: SimConfig, trial: int, settings: list[WavePlateSetting]
) -> FloatArray:
    prep_rows = QUANTUM_PREPARATION[case]
    counts = np.zeros((len(prep_rows), len(settings)))
    for x, prow in enumerate(prep_rows):
        for j, nu in enumerate(settings):
            rng = _rng(cfg, trial, _STAGE_TOMOGRAPHY, x, j)
            psi = prepare_state(_plate(prow, rng, cfg))
            proj = projection_state(nu.jittered(rng, _jitter(cfg)))
            rec = simulate_counts({"ab": born_probability(proj, psi)}, cfg, rng)
            counts[x, j] = rec.counts["ab"]
    return counts


def _run_quantum(case: str, cfg: SimConfig, trial: int) -> ProtocolReport:
    from .tomo import (
        TomographyDataset,
        average_state,
        reconstruct_dataset,
        tomo_settings,
    )

    spec = certificate(case).spec()
    table, events, _ = _quantum_events(case, cfg, trial)
    ts = tomo_settings(case)
    data = TomographyDataset(_tomography_counts(case, cfg, trial, list(ts.settings)))
    states = reconstruct_dataset(data, ts, cfg.tomography)
    avg = average_state(states)
    entropy = von_neumann_entropy(avg)
    value = float(np.sum(spec.alpha * table))
    logger.debug(f"quantum {case} trial {trial}: w={value:.6f} S={entropy:.6f}")
    return ProtocolReport(case, "quantum", value, entropy, table, events, data, states)


def _run_classical(case: str, cfg: SimConfig, trial: int) -> ProtocolReport:
    cert = certificate(case)
    spec = cert.spec()
    mixture = cert.mixture()
    if mixture is None:
        raise ValidationError(f"No classical mixture for case {case}", "case")
    weights = mixture.weights
    preparations = CLASSICAL_PREPARATION[case]
    n, n_meas = spec.n, spec.l

    table = np.zeros((n, n_meas))
    events = []
    port_totals = dict.fromkeys(PORTS, 0.0)
    for x in range(n):
        for y in range(n_meas):
            merged = dict.fromkeys(PORTS, 0.0)
            duration = 0.0
            for lam, q in enumerate(weights):
                rng = _rng(cfg, trial, _STAGE_CLASSICAL, x, y, lam)
                row = preparations[lam][x]
                psi = prepare_state(_plate(row, rng, cfg))
                # measurement plates all at 0 deg: basis state |k> exits at its port
                probs = {
                    port: float(abs(psi.amplitudes[k]) ** 2)
                    for k, port in enumerate(MESSAGE_PORTS)
                }
                rec = simulate_counts(
                    probs,
                    cfg,
                    rng,
                    duration=q * cfg.duration_per_setting,
                    setting=f"E{x + 1}{y + 1}-L{lam + 1}",
                )
                events.append(rec)
                duration += rec.duration
                for port in PORTS:
                    merged[port] += rec.counts[port]
            combined = CoincidenceRecord(merged, duration, f"E{x + 1}{y + 1}")
            table[x, y] = expectation(combined, f"classical-{case}-M{y + 1}")
            for port in PORTS:
                port_totals[port] += merged[port]

    grand = sum(port_totals.values())
    if grand <= 0:
        raise ValidationError("No counts collected in classical run", "counts")
    dist = np.array([port_totals[port] / grand for port in MESSAGE_PORTS])
    entropy = shannon_entropy(dist)
    value = float(np.sum(spec.alpha * table))
    logger.debug(f"classical {case} trial {trial}: w={value:.6f} H={entropy:.6f}")
    return ProtocolReport(
        case, "classical", value, entropy, table, events, message_distribution=dist
    )


def run_protocol(
    case: str, mode: str, cfg: Optional[SimConfig] = None, trial: int = 0
) -> ProtocolReport:
    """Simulate the full witness experiment for one case.

    Parameters
    ----------
    case : str
        ``"I3"``, ``"I4"`` or ``"R4"``
    mode : str
        ``"quantum"`` prepares the optimal quantum states, measures the
        witness events and reconstructs the states by tomography.
        ``"classical"`` prepares basis states per strategy of the optimal
        mixture, counting each for ``q_lambda * duration_per_setting``.
    cfg : SimConfig, optional
        Simulation settings
    trial : int
        Index mixed into every derived seed, used for repeated runs

    Returns
    -------
    ProtocolReport
        Witness value and entropy (von Neumann for quantum mode, Shannon of
        the port totals for classical mode)

    Notes
    -----
    Each setting draws from its own generator derived from ``cfg.seed``, so
    a report depends only on the seed and the trial index.
    """
    cfg = cfg or SimConfig()
    name = _check_case(case, mode)
    logger.debug(f"Running {mode} protocol for {name} with seed {cfg.seed}")
    if mode == "quantum":
        return _run_quantum(name, cfg, trial)
    return _run_classical(name, cfg, trial)


@dataclass(frozen=True, eq=False)
class ErrorBudget:
    """Sample statistics of repeated simulated runs."""

    case: str
    mode: str
    values: FloatArray
    entropies: FloatArray

    @property
    def trials(self) -> int:
        """Number of runs."""
        return int(self.values.size)

    @property
    def std_value(self) -> float:
        """Sample standard deviation of the witness value."""
        return float(np.std(self.values, ddof=1))

    @property
    def std_entropy(self) -> float:
        """Sample standard deviation of the entropy."""
        return float(np.std(self.entropies, ddof=1))

    def to_dict(self) -> dict[str, Any]:
        """Means and standard deviations for reports."""
        return {
            "case": self.case,
            "mode": self.mode,
            "trials": self.trials,
            "mean_w": float(np.mean(self.values)),
            "std_w": self.std_value,
            "mean_entropy": float(np.mean(self.entropies)),
            "std_entropy": self.std_entropy,
        }


def error_budget(
    case: str, mode: str, cfg: Optional[SimConfig] = None, trials: int = 20
) -> ErrorBudget:
    """Monte-Carlo spread of the witness value and entropy.

    Every trial redraws the angle errors and the Poisson counts.

    Raises
    ------
    ValidationError
        If fewer than two trials are requested
    """
    if trials < 2:
        raise ValidationError(f"Need at least 2 trials, got {trials}", "trials")
    cfg = cfg or SimConfig()
    reports = [run_protocol(case, mode, cfg, trial=t) for t in range(trials)]
    budget = ErrorBudget(
        case.upper(),
        mode,
        np.array([r.value for r in reports]),
        np.array([r.entropy for r in reports]),
    )
    logger.debug(f"Error budget {case}/{mode}: {budget.to_dict()}")
    return budget


def setting_vectors(settings: list[WavePlateSetting]) -> ComplexArray:
    """Stack the projection states of several settings row-wise."""
    return np.stack([projection_state(s).amplitudes for s in settings])
