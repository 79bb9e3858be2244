"""Quantum state tomography from coincidence counts.

Each prepared state is measured with ``s**2`` projections ``|nu_j>``; the
count of setting ``j`` is proportional to ``<nu_j|rho|nu_j>``. A fixed set of
matrices ``M_j`` inverts this map linearly, and a maximum-likelihood step
repairs estimates that are not positive semi-definite.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import scipy.optimize
from numpy.typing import ArrayLike

from .constants import (
    MLE_MAX_ITERS,
    MLE_SEED_MIXING,
    MLE_TOL,
    NEGATIVE_EIGENVALUE_TOL,
)
from .exceptions import (
    ConvergenceError,
    DimensionMismatchError,
    ParseError,
    ValidationError,
)
from .polsim import WavePlateSetting, setting_vectors
from .qcore import ComplexArray, DensityMatrix, FloatArray
from .tables import TOMOGRAPHY_QUQUART, TOMOGRAPHY_QUTRIT, reconstruction_matrices

logger = logging.getLogger(__name__)

TOMOGRAPHY_CASES: dict[str, int] = {"I3": 3, "I4": 4, "R4": 4, "I4R4": 4}
CSV_COLUMNS = ("state_index", "setting_index", "count")


@dataclass(frozen=True, eq=False)
class TomographySettings:
    """Projection settings and linear reconstruction matrices for one dimension.

    Projection states are four-level; for ``s = 3`` only their first three
    amplitudes enter the model.
    """

    case: str
    settings: tuple[WavePlateSetting, ...]
    recon_matrices: ComplexArray

    def __post_init__(self) -> None:
        s = self.recon_matrices.shape[1]
        if len(self.settings) != s * s or self.recon_matrices.shape[0] != s * s:
            raise ValidationError(
                f"Tomography in d={s} needs {s * s} settings, got "
                f"{len(self.settings)}",
                field="settings",
            )

    @property
    def s(self) -> int:
        """Dimension of the reconstructed states."""
        return int(self.recon_matrices.shape[1])

    def projection_vectors(self) -> ComplexArray:
        """``(s**2, s)`` array of the projection states, truncated to ``s`` levels."""
        return setting_vectors(list(self.settings))[:, : self.s]

    def design_matrix(self) -> ComplexArray:
        """Rows map a flattened ``rho`` to ``<nu_j|rho|nu_j>``."""
        nu = self.projection_vectors()
        return np.einsum("ja,jb->jab", nu.conj(), nu).reshape(len(nu), -1)

    def probabilities(self, rho: ArrayLike) -> FloatArray:
        """``<nu_j|rho|nu_j>`` for every setting."""
        nu = self.projection_vectors()
        mat = np.asarray(rho, dtype=np.complex128)
        return np.asarray(
            np.einsum("ja,ab,jb->j", nu.conj(), mat, nu).real, dtype=np.float64
        )

    def normalization(self) -> FloatArray:
        """``tr(M_j)`` per setting, the weights of the total-flux estimate."""
        return np.asarray(
            np.trace(self.recon_matrices, axis1=1, axis2=2).real, dtype=np.float64
        )


def tomo_settings(case: str) -> TomographySettings:
    """Settings for the states of a witness case.

    ``"I3"`` uses nine settings in three dimensions; ``"I4"``, ``"R4"`` and
    ``"I4R4"`` share sixteen settings in four dimensions.

    Raises
    ------
    ValidationError
        If the case is unknown
    """
    s = TOMOGRAPHY_CASES.get(case.upper())
    if s is None:
        raise ValidationError(
            f"Unknown tomography case '{case}'. Must be one of "
            f"{', '.join(TOMOGRAPHY_CASES)}",
            field="case",
        )
    rows = TOMOGRAPHY_QUTRIT if s == 3 else TOMOGRAPHY_QUQUART
    settings = tuple(
        WavePlateSetting.from_row(row, label=f"nu{j + 1}") for j, row in enumerate(rows)
    )
    return TomographySettings(case.upper(), settings, reconstruction_matrices(s))


@dataclass(frozen=True, eq=False)
class TomographyDataset:
    """Counts ``D_ab(nu_j)`` per prepared state (rows) and setting (columns)."""

    counts: FloatArray

    def __post_init__(self) -> None:
        arr = np.asarray(self.counts, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(
                f"Counts must be a (states, settings) table, got {arr.shape}",
                field="counts",
            )
        if np.any(arr < 0):
            raise ValidationError("Counts must be non-negative", field="counts")
        object.__setattr__(self, "counts", arr)

    @property
    def n_states(self) -> int:
        """Number of prepared states."""
        return int(self.counts.shape[0])

    def totals(self) -> FloatArray:
        """Total count per prepared state."""
        return np.asarray(self.counts.sum(axis=1), dtype=np.float64)

    def to_csv(self, path: Union[str, Path]) -> None:
        """Write one ``state_index, setting_index, count`` row per entry."""
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_COLUMNS)
            for (x, j), count in np.ndenumerate(self.counts):
                value = int(count) if float(count).is_integer() else repr(float(count))
                writer.writerow([x, j, value])

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> TomographyDataset:
        """Read counts written by :meth:`to_csv`.

        Missing ``(state, setting)`` pairs count as zero.

        Raises
        ------
        ParseError
            If the file lacks the expected columns or holds a bad row
        """
        entries: dict[tuple[int, int], float] = {}
        try:
            with open(path, newline="", encoding="utf-8") as handle:
                reader = csv.DictReader(handle)
                missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
                if missing:
                    raise ParseError(
                        f"Counts file lacks columns {sorted(missing)}", str(path)
                    )
                for line, row in enumerate(reader, start=2):
                    try:
                        key = (int(row["state_index"]), int(row["setting_index"]))
                        entries[key] = float(row["count"])
                    except (TypeError, ValueError) as e:
                        raise ParseError(
                            f"Bad counts row at line {line}: {e}", str(path)
                        ) from e
        except OSError as e:
            raise ParseError(f"Cannot read counts file: {e}", str(path)) from e
        if not entries:
            raise ParseError("Counts file has no rows", str(path))
        if min(min(key) for key in entries) < 0:
            raise ParseError("Indices must be non-negative", str(path))
        n_states = max(x for x, _ in entries) + 1
        n_settings = max(j for _, j in entries) + 1
        counts = np.zeros((n_states, n_settings))
        for (x, j), value in entries.items():
            counts[x, j] = value
        logger.debug(f"Read {len(entries)} counts from {path}")
        return cls(counts)


def forward_counts(
    rho: ArrayLike, ts: TomographySettings, total: float = 1.0
) -> FloatArray:
    """Noiseless counts ``total * <nu_j|rho|nu_j>``."""
    return total * np.clip(ts.probabilities(rho), 0.0, None)


def linear_reconstruct(counts: ArrayLike, ts: TomographySettings) -> ComplexArray:
    """Invert counts of one state with the reconstruction matrices.

    The estimate is ``sum_j M_j D_j / sum_j tr(M_j) D_j``. The denominator is
    the count total over the settings forming a complete basis, so the
    estimate has trace one for any counts.

    Returns
    -------
    ComplexArray
        Hermitian, trace-one ``s x s`` matrix; it may have negative eigenvalues

    Raises
    ------
    ValidationError
        If the counts have the wrong length or a zero total
    """
    d = np.asarray(counts, dtype=np.float64).reshape(-1)
    if d.size != ts.s**2:
        raise ValidationError(
            f"Expected {ts.s ** 2} counts, got {d.size}", field="counts"
        )
    denominator = float(ts.normalization() @ d)
    if denominator <= 0:
        raise ValidationError("Counts have a zero total", field="counts")
    rho = np.einsum("j,jab->ab", d, ts.recon_matrices) / denominator
    return np.asarray((rho + rho.conj().T) / 2, dtype=np.complex128)


def psd_projection(mat: ArrayLike) -> DensityMatrix:
    """Clip negative eigenvalues of a Hermitian matrix and renormalize."""
    arr = np.asarray(mat, dtype=np.complex128)
    values, vectors = np.linalg.eigh((arr + arr.conj().T) / 2)
    values = np.clip(values, 0.0, None)
    if values.sum() <= 0:
        return DensityMatrix.maximally_mixed(arr.shape[0])
    return DensityMatrix((vectors * (values / values.sum())) @ vectors.conj().T)


def _tril_size(s: int) -> int:
    return s * (s - 1) // 2


def _unpack(params: FloatArray, s: int) -> ComplexArray:
    rows, cols = np.tril_indices(s, -1)
    k = _tril_size(s)
    lower = np.zeros((s, s), dtype=np.complex128)
    lower[np.diag_indices(s)] = params[:s]
    lower[rows, cols] = params[s : s + k] + 1j * params[s + k :]
    rho = lower @ lower.conj().T
    return np.asarray(rho / np.trace(rho).real, dtype=np.complex128)


def _pack(rho: ComplexArray) -> FloatArray:
    s = rho.shape[0]
    lower = np.linalg.cholesky(rho)
    rows, cols = np.tril_indices(s, -1)
    return np.concatenate(
        [lower[np.diag_indices(s)].real, lower[rows, cols].real, lower[rows, cols].imag]
    )


def _negative_log_likelihood(
    rho: ComplexArray, counts: FloatArray, ts: TomographySettings, flux: float
) -> float:
    mu = flux * np.clip(ts.probabilities(rho), 0.0, None)
    observed = counts > 0
    log_mu = np.log(np.maximum(mu[observed], np.finfo(float).tiny))
    return float(mu.sum() - np.sum(counts[observed] * log_mu))


def mle_repair(counts: ArrayLike, ts: TomographySettings) -> DensityMatrix:
    """Maximum-likelihood density matrix for the counts of one state.

    Counts are modeled as Poisson with means ``N <nu_j|rho|nu_j>``, where the
    flux ``N`` is fixed to the observed total over the complete basis. The
    state is parameterized as ``T T^dagger / tr(T T^dagger)`` with ``T``
    lower triangular and optimized with L-BFGS-B from the positive part of
    the linear estimate. A linear estimate that is already positive
    semi-definite is returned unchanged.

    Raises
    ------
    ConvergenceError
        If the optimizer stops on its iteration limit; ``best`` holds the
        last iterate as a DensityMatrix
    """
    d = np.asarray(counts, dtype=np.float64).reshape(-1)
    linear = linear_reconstruct(d, ts)
    if np.linalg.eigvalsh(linear)[0] >= -NEGATIVE_EIGENVALUE_TOL:
        return psd_projection(linear)

    s = ts.s
    flux = float(ts.normalization() @ d)
    seed = psd_projection(linear)
    start = (1 - MLE_SEED_MIXING) * seed.entries + MLE_SEED_MIXING * np.eye(s) / s
    seed_nll = _negative_log_likelihood(seed.entries, d, ts, flux)

    def objective(params: FloatArray) -> float:
        return _negative_log_likelihood(_unpack(params, s), d, ts, flux)

    result = scipy.optimize.minimize(
        objective,
        _pack(start),
        method="L-BFGS-B",
        options={"maxiter": MLE_MAX_ITERS, "ftol": MLE_TOL},
    )
    best = DensityMatrix(_unpack(result.x, s))
    if result.status == 1:
        raise ConvergenceError(
            f"Maximum-likelihood fit did not converge in {MLE_MAX_ITERS} iterations",
            best_residual=float(result.fun),
            best=best,
        )
    logger.debug(
        f"MLE repair: nll {seed_nll:.6f} -> {result.fun:.6f} in {result.nit} iterations"
    )
    if result.fun > seed_nll:
        return seed
    return best


def reconstruct(
    counts: ArrayLike, ts: TomographySettings, method: str = "mle"
) -> DensityMatrix:
    """Reconstruct one state with ``"mle"`` or ``"linear"`` (clipped) inversion."""
    if method == "mle":
        return mle_repair(counts, ts)
    if method == "linear":
        return psd_projection(linear_reconstruct(counts, ts))
    raise ValidationError(f"Unknown tomography method '{method}'", field="method")


def average_state(states: Sequence[DensityMatrix]) -> DensityMatrix:
    """Arithmetic mean of density matrices of equal dimension.

    Raises
    ------
    ValidationError
        If the list is empty; DimensionMismatchError if the dimensions differ
    """
    if not states:
        raise ValidationError("Cannot average an empty list of states", "states")
    dims = {state.d for state in states}
    if len(dims) != 1:
        raise DimensionMismatchError(
            f"States have different dimensions {sorted(dims)}", field="states"
        )
    return DensityMatrix(np.mean([state.entries for state in states], axis=0))


def reconstruct_dataset(
    data: TomographyDataset, ts: TomographySettings, method: str = "mle"
) -> list[DensityMatrix]:
    """Reconstruct every prepared state of a dataset."""
    if data.counts.shape[1] != ts.s**2:
        raise ValidationError(
            f"Dataset has {data.counts.shape[1]} settings, expected {ts.s ** 2}",
            field="counts",
        )
    return [reconstruct(row, ts, method) for row in data.counts]
