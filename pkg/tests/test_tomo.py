"""Unit tests for the tomo module."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from entropy_witness.exceptions import (
    DimensionMismatchError,
    ParseError,
    ValidationError,
)
from entropy_witness.qcore import DensityMatrix, fidelity
from entropy_witness.tables import reconstruction_matrices
from entropy_witness.tomo import (
    TomographySettings,
    TomographyDataset,
    average_state,
    forward_counts,
    linear_reconstruct,
    mle_repair,
    psd_projection,
    reconstruct,
    reconstruct_dataset,
    tomo_settings,
)


@pytest.fixture
def qutrit_settings() -> TomographySettings:
    """Nine-setting tomography in three dimensions.

    Returns
    -------
    TomographySettings
        Settings for the I3 states
    """
    return tomo_settings("I3")


def real_qubit_state(theta: float, s: int) -> np.ndarray:
    """``cos|0> + sin|1>`` as an ``s``-level density matrix."""
    vec = np.zeros(s)
    vec[:2] = np.cos(theta), np.sin(theta)
    return np.outer(vec, vec).astype(np.complex128)


class TestSettings:
    """Test cases for the tomography settings."""

    def test_qutrit(self, qutrit_settings: TomographySettings) -> None:
        """Test three-level tomography uses nine settings."""
        assert qutrit_settings.s == 3
        assert len(qutrit_settings.settings) == 9
        first = qutrit_settings.settings[0]
        assert (first.h_s, first.q_s, first.h_i, first.q_i) == (0.0, 0.0, 0.0, 0.0)

    @pytest.mark.parametrize("case", ["I4", "R4", "i4r4"])
    def test_ququart(self, case: str) -> None:
        """Test four-level cases share sixteen settings."""
        ts = tomo_settings(case)
        assert ts.s == 4
        assert len(ts.settings) == 16
        first = ts.settings[0]
        assert (first.h_s, first.q_s, first.h_i, first.q_i) == (45.0, 0.0, 45.0, 0.0)

    def test_unknown_case(self) -> None:
        """Test unknown cases raise."""
        with pytest.raises(ValidationError):
            tomo_settings("I5")

    def test_design_matrix_complete(self, qutrit_settings: TomographySettings) -> None:
        """Test the nine projections determine a qutrit state."""
        design = qutrit_settings.design_matrix()
        assert design.shape == (9, 9)
        assert np.linalg.matrix_rank(design) == 9

    def test_reconstruction_matrices(self) -> None:
        """Test the qutrit matrices are Hermitian and span all 3x3 operators."""
        mats = reconstruction_matrices(3)
        assert mats.shape == (9, 3, 3)
        assert np.allclose(mats, mats.conj().transpose(0, 2, 1))
        assert np.linalg.matrix_rank(mats.reshape(9, 9)) == 9
        with pytest.raises(ValidationError):
            reconstruction_matrices(5)


    def test_basis_settings(self, qutrit_settings: TomographySettings) -> None:
        """Test the first three qutrit settings project onto basis states."""
        nu = qutrit_settings.projection_vectors()[:3]
        assert np.allclose(np.abs(nu), np.eye(3))
        assert qutrit_settings.normalization()[:3].tolist() == [1.0, 1.0, 1.0]


class TestLinearReconstruct:
    """Test cases for linear inversion."""

    @pytest.mark.parametrize("case", ["I3", "I4"])
    def test_ground_state(self, case: str) -> None:
        """Test noiseless counts of |0> reconstruct |0><0|."""
        ts = tomo_settings(case)
        rho = np.zeros((ts.s, ts.s), dtype=np.complex128)
        rho[0, 0] = 1.0
        estimate = linear_reconstruct(forward_counts(rho, ts, 1000.0), ts)
        assert np.allclose(estimate, rho, atol=1e-10)

    @pytest.mark.parametrize("theta", [0.0, 0.3, np.pi / 4, 1.2, np.pi / 2])
    def test_real_qubit_subspace(
        self, qutrit_settings: TomographySettings, theta: float
    ) -> None:
        """Test real superpositions of |0> and |1> are recovered exactly."""
        rho = real_qubit_state(theta, 3)
        counts = forward_counts(rho, qutrit_settings, 500.0)
        assert np.allclose(linear_reconstruct(counts, qutrit_settings), rho, atol=1e-9)

    def test_unit_trace(self, qutrit_settings: TomographySettings) -> None:
        """Test arbitrary positive counts give a trace-one Hermitian estimate."""
        counts = np.random.default_rng(8).uniform(1.0, 100.0, 9)
        estimate = linear_reconstruct(counts, qutrit_settings)
        assert np.trace(estimate).real == pytest.approx(1.0)
        assert np.allclose(estimate, estimate.conj().T)

    def test_zero_counts(self, qutrit_settings: TomographySettings) -> None:
        """Test an all-zero count vector raises."""
        with pytest.raises(ValidationError):
            linear_reconstruct(np.zeros(9), qutrit_settings)

    def test_wrong_length(self, qutrit_settings: TomographySettings) -> None:
        """Test a count vector of the wrong length raises."""
        with pytest.raises(ValidationError):
            linear_reconstruct(np.ones(16), qutrit_settings)


class TestRepair:
    """Test cases for positivity repair."""

    def test_psd_projection(self) -> None:
        """Test negative eigenvalues are clipped and the trace restored."""
        repaired = psd_projection(np.diag([1.2, -0.2, 0.0]))
        assert np.allclose(repaired.entries, np.diag([1.0, 0.0, 0.0]))

    def test_mle_keeps_physical_estimate(
        self, qutrit_settings: TomographySettings
    ) -> None:
        """Test noiseless counts of a pure state come back unchanged."""
        rho = real_qubit_state(0.4, 3)
        counts = forward_counts(rho, qutrit_settings, 1000.0)
        estimate = mle_repair(counts, qutrit_settings)
        assert fidelity(estimate, DensityMatrix(rho)) >= 1 - 1e-6

    def test_mle_repairs_negative_estimate(
        self, qutrit_settings: TomographySettings
    ) -> None:
        """Test counts with a non-physical linear estimate give a valid state."""
        counts = np.zeros(9)
        counts[1] = 100.0
        assert np.linalg.eigvalsh(linear_reconstruct(counts, qutrit_settings))[0] < 0
        estimate = mle_repair(counts, qutrit_settings)
        assert np.linalg.eigvalsh(estimate.entries)[0] >= -1e-9
        assert np.trace(estimate.entries).real == pytest.approx(1.0)

    @pytest.mark.slow
    def test_mle_under_shot_noise(self, qutrit_settings: TomographySettings) -> None:
        """Test Poisson counts at 27000 per setting give fidelity above 0.99."""
        vec = np.array([0.7972, 0.6037, 0.0])
        rho = np.outer(vec, vec) / (vec @ vec)
        expected = forward_counts(rho, qutrit_settings, 27000.0)
        rng = np.random.default_rng(21)
        fidelities = [
            fidelity(mle_repair(rng.poisson(expected), qutrit_settings), rho)
            for _ in range(20)
        ]
        assert np.mean(fidelities) >= 0.99


    def test_unknown_method(self, qutrit_settings: TomographySettings) -> None:
        """Test an unknown reconstruction method raises."""
        with pytest.raises(ValidationError):
            reconstruct(np.ones(9), qutrit_settings, method="bayes")


class TestDatasets:
    """Test cases for count tables and averaging."""

    def test_reconstruct_dataset(self, qutrit_settings: TomographySettings) -> None:
        """Test every row of a dataset is reconstructed."""
        states = [real_qubit_state(t, 3) for t in (0.0, 0.7)]
        counts = np.stack([forward_counts(r, qutrit_settings, 900.0) for r in states])
        result = reconstruct_dataset(
            TomographyDataset(counts), qutrit_settings, "linear"
        )
        assert len(result) == 2
        for estimate, rho in zip(result, states):
            assert np.allclose(estimate.entries, rho, atol=1e-9)

    def test_dataset_shape_mismatch(self, qutrit_settings: TomographySettings) -> None:
        """Test a dataset with the wrong number of settings raises."""
        with pytest.raises(ValidationError):
            reconstruct_dataset(TomographyDataset(np.ones((2, 16))), qutrit_settings)

    def test_negative_counts(self) -> None:
        """Test datasets reject negative counts."""
        with pytest.raises(ValidationError):
            TomographyDataset(np.array([[1.0, -1.0]]))

    def test_average_state(self) -> None:
        """Test averaging two basis states gives the mixed state."""
        avg = average_state(
            [DensityMatrix(np.diag([1.0, 0.0])), DensityMatrix(np.diag([0.0, 1.0]))]
        )
        assert np.allclose(avg.entries, np.eye(2) / 2)

    def test_average_errors(self) -> None:
        """Test empty and mixed-dimension lists raise."""
        with pytest.raises(ValidationError):
            average_state([])
        with pytest.raises(DimensionMismatchError):
            average_state(
                [DensityMatrix.maximally_mixed(2), DensityMatrix.maximally_mixed(3)]
            )

    def test_csv_round_trip(self, tmp_path: Path) -> None:
        """Test counts survive a write and read."""
        data = TomographyDataset(np.array([[3.0, 0.0, 2.5], [1.0, 4.0, 0.0]]))
        path = tmp_path / "counts.csv"
        data.to_csv(path)
        assert np.array_equal(TomographyDataset.from_csv(path).counts, data.counts)

    def test_csv_bad_row(self, tmp_path: Path) -> None:
        """Test a non-numeric count raises ParseError."""
        path = tmp_path / "counts.csv"
        path.write_text("state_index,setting_index,count\n0,0,many\n")
        with pytest.raises(ParseError):
            TomographyDataset.from_csv(path)

    def test_csv_missing_columns(self, tmp_path: Path) -> None:
        """Test a file without the count columns raises ParseError."""
        path = tmp_path / "counts.csv"
        path.write_text("x,y\n0,0\n")
        with pytest.raises(ParseError):
            TomographyDataset.from_csv(path)
