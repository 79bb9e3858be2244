"""Unit tests for the qcore module."""

from __future__ import annotations

import numpy as np
import pytest

from entropy_witness.exceptions import InvalidDistributionError, InvalidStateError
from entropy_witness.qcore import (
    DensityMatrix,
    HermitianOp,
    ProbVector,
    PureState,
    eigh,
    fidelity,
    numerical_rank,
    shannon_entropy,
    von_neumann_entropy,
)


@pytest.fixture
def rng() -> np.random.Generator:
    """Create a seeded random generator.

    Returns
    -------
    numpy.random.Generator
        Generator with a fixed seed
    """
    return np.random.default_rng(7)


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    """Random complex Hermitian matrix."""
    mat = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return mat + mat.conj().T


def random_density(rng: np.random.Generator, d: int) -> np.ndarray:
    """Random full-rank density matrix."""
    mat = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = mat @ mat.conj().T
    return rho / np.trace(rho).real


class TestProbVector:
    """Test cases for probability vectors."""

    def test_valid_vector(self) -> None:
        """Test that a valid distribution is accepted."""
        p = ProbVector(np.array([0.25, 0.75]))
        assert len(p) == 2

    def test_tiny_negative_entries_are_clipped(self) -> None:
        """Test round-off below zero is clipped."""
        p = ProbVector(np.array([1.0 + 5e-13, -5e-13]))
        assert p.p.min() == 0.0

    def test_invalid_vectors(self) -> None:
        """Test negative entries and wrong sums are rejected."""
        with pytest.raises(InvalidDistributionError):
            ProbVector(np.array([1.1, -0.1]))
        with pytest.raises(InvalidDistributionError):
            ProbVector(np.array([0.5, 0.6]))
        with pytest.raises(InvalidDistributionError):
            ProbVector(np.array([]))


class TestEntropies:
    """Test cases for Shannon and von Neumann entropies."""

    def test_shannon_entropy_values(self) -> None:
        """Test known Shannon entropies."""
        assert shannon_entropy([1.0, 0.0, 0.0]) == 0.0
        assert shannon_entropy([0.5, 0.5]) == pytest.approx(1.0)
        assert shannon_entropy([0.25] * 4) == pytest.approx(2.0)
        assert shannon_entropy([0.5630, 0.3333, 0.1037]) == pytest.approx(
            1.334, abs=1e-3
        )

    def test_shannon_entropy_rejects_invalid(self) -> None:
        """Test that invalid distributions raise."""
        with pytest.raises(InvalidDistributionError):
            shannon_entropy([0.7, 0.7])

    def test_von_neumann_entropy_values(self) -> None:
        """Test known von Neumann entropies."""
        assert von_neumann_entropy(np.diag([5 / 8, 3 / 8])) == pytest.approx(
            0.954, abs=1e-3
        )
        assert von_neumann_entropy(np.diag([0.5, 0.25, 0.25])) == pytest.approx(
            1.5, abs=1e-6
        )
        assert von_neumann_entropy(DensityMatrix.maximally_mixed(4)) == pytest.approx(
            2.0
        )

    def test_pure_state_has_zero_entropy(self, rng: np.random.Generator) -> None:
        """Test that rank-1 states have zero entropy."""
        vec = rng.normal(size=3) + 1j * rng.normal(size=3)
        rho = DensityMatrix.from_pure(vec)
        assert von_neumann_entropy(rho) == pytest.approx(0.0, abs=1e-8)

    def test_von_neumann_matches_shannon_of_spectrum(
        self, rng: np.random.Generator
    ) -> None:
        """Test that the entropy of a state is that of its eigenvalues."""
        rho = random_density(rng, 4)
        spectrum = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
        assert von_neumann_entropy(rho) == pytest.approx(
            shannon_entropy(spectrum / spectrum.sum()), abs=1e-9
        )

    def test_negative_eigenvalue_raises(self) -> None:
        """Test that real negative eigenvalues are errors."""
        with pytest.raises(InvalidStateError):
            von_neumann_entropy(np.diag([1.1, -0.1]))


class TestMatrices:
    """Test cases for Hermitian operators, density matrices and pure states."""

    def test_hermitian_op_rejects_non_hermitian(self) -> None:
        """Test that asymmetric matrices are rejected."""
        with pytest.raises(InvalidStateError):
            HermitianOp(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_density_matrix_checks(self) -> None:
        """Test trace and positivity checks."""
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.eye(2))
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.diag([1.5, -0.5]))
        assert DensityMatrix(np.diag([0.5, 0.5])).d == 2

    def test_pure_state_norm(self) -> None:
        """Test that unnormalized amplitudes are rejected unless normalized."""
        with pytest.raises(InvalidStateError):
            PureState(np.array([1.0, 1.0]))
        state = PureState.from_amplitudes([1.0, 1.0])
        assert np.vdot(state.amplitudes, state.amplitudes).real == pytest.approx(1.0)

    def test_pure_state_equality_ignores_phase(self) -> None:
        """Test global-phase invariant equality."""
        a = PureState.from_amplitudes([1.0, 1.0j])
        b = PureState.from_amplitudes([1.0j, -1.0])
        c = PureState.from_amplitudes([1.0, -1.0j])
        assert a == b
        assert a != c


class TestEigh:
    """Test cases for the eigen-decomposition."""

    def test_descending_order(self) -> None:
        """Test eigenvalues come largest first."""
        spectrum = eigh(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(spectrum.eigenvalues, [3.0, 2.0, 1.0])

    def test_reconstruction(self, rng: np.random.Generator) -> None:
        """Test V diag(lambda) V^dagger reproduces the input."""
        mat = random_hermitian(rng, 4)
        spectrum = eigh(mat)
        vecs = spectrum.eigenvectors
        assert np.allclose(spectrum.reconstruct(), mat, atol=1e-8)
        assert np.allclose(vecs.conj().T @ vecs, np.eye(4), atol=1e-9)
        assert spectrum.eigenvalues.sum() == pytest.approx(
            np.trace(mat).real, abs=1e-9
        )


class TestHelpers:
    """Test cases for rank and fidelity helpers."""

    def test_numerical_rank(self) -> None:
        """Test rank counts eigenvalues above the tolerance."""
        assert numerical_rank(np.diag([0.5, 0.5, 0.0])) == 2
        assert numerical_rank(np.diag([1.0, 1e-12])) == 1

    def test_fidelity(self, rng: np.random.Generator) -> None:
        """Test fidelity of identical and orthogonal states."""
        rho = random_density(rng, 3)
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-8)
        assert fidelity(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) == pytest.approx(
            0.0, abs=1e-12
        )
