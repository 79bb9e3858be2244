"""Unit tests for the decomp module."""

from __future__ import annotations

import numpy as np
import pytest

from entropy_witness.certificates import certificate
from entropy_witness.decomp import (
    equal_expectation_roots,
    gram_schmidt,
    peel,
    rank1_decompose,
    reduce_ensemble,
    split_rank2,
)
from entropy_witness.exceptions import ValidationError
from entropy_witness.qcore import DensityMatrix, numerical_rank
from entropy_witness.witness import Measurement, QuantumEnsemble


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    """Random complex Hermitian matrix."""
    mat = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return mat + mat.conj().T


def random_state(rng: np.random.Generator, d: int, rank: int) -> np.ndarray:
    """Random density matrix of the given rank."""
    vecs = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = vecs @ vecs.conj().T
    return rho / np.trace(rho).real


def expectation(rho: np.ndarray, op: np.ndarray) -> float:
    """Return tr(rho op)."""
    return float(np.trace(rho @ op).real)


def noisy_ensemble(d: int, noise: float) -> tuple[QuantumEnsemble, list[Measurement]]:
    """I3 optimal states and measurements embedded in d dimensions with noise."""
    cert = certificate("I3")
    states = []
    for vec in cert.states:
        padded = np.zeros(d, dtype=np.complex128)
        padded[:3] = vec / np.linalg.norm(vec)
        pure = np.outer(padded, padded.conj())
        states.append(DensityMatrix((1 - noise) * pure + noise * np.eye(d) / d))
    meas = []
    for vecs in cert.minus_vectors:
        padded = np.zeros((len(vecs), d), dtype=np.complex128)
        padded[:, :3] = vecs
        meas.append(Measurement.from_projection(padded))
    return QuantumEnsemble(tuple(states)), meas


class TestEqualExpectationRoots:
    """Test cases for the root finder."""

    def test_symmetric_roots(self) -> None:
        """Test g(t) = cos 2t has roots at +-pi/4."""
        theta1, theta2 = equal_expectation_roots(1.0, -1.0, 0.0)
        assert theta1 == pytest.approx(np.pi / 4, abs=1e-10)
        assert theta2 == pytest.approx(-np.pi / 4, abs=1e-10)

    def test_random_roots(self) -> None:
        """Test one root on each side of zero, each solving g(t) = 0."""
        rng = np.random.default_rng(2)
        for _ in range(200):
            a, b = rng.uniform(0.01, 3.0), -rng.uniform(0.01, 3.0)
            c = rng.uniform(-3.0, 3.0)
            theta1, theta2 = equal_expectation_roots(a, b, c)
            assert 0.0 < theta1 < np.pi / 2
            assert -np.pi / 2 < theta2 < 0.0
            for t in (theta1, theta2):
                g = a * np.cos(t) ** 2 + b * np.sin(t) ** 2 + c * np.sin(2 * t)
                assert abs(g) < 1e-10


class TestSplitRank2:
    """Test cases for the rank-2 split."""

    def test_maximally_mixed_qubit(self) -> None:
        """Test splitting I/2 against a Pauli Z."""
        result = split_rank2(np.eye(2) / 2, np.diag([1.0, -1.0]))
        assert result.weights.tolist() == pytest.approx([0.5, 0.5])
        assert result.roots is not None
        assert sorted(abs(t) for t in result.roots) == pytest.approx(
            [np.pi / 4, np.pi / 4]
        )
        for _, part in result.parts:
            assert expectation(part.entries, np.diag([1.0, -1.0])) == pytest.approx(
                0.0, abs=1e-10
            )

    def test_pure_input(self) -> None:
        """Test a pure state is returned as its own single part."""
        result = split_rank2(np.diag([1.0, 0.0, 0.0]), np.eye(3))
        assert len(result.parts) == 1
        assert result.weights.tolist() == [1.0]

    def test_rank_three_rejected(self) -> None:
        """Test states of rank above two raise."""
        with pytest.raises(ValidationError):
            split_rank2(np.eye(3) / 3, np.diag([1.0, 0.0, -1.0]))

    def test_random_pairs(self) -> None:
        """Test weights, reconstruction and equal expectations on random inputs."""
        rng = np.random.default_rng(11)
        for k in range(200):
            d = 2 + k % 3
            rho = random_state(rng, d, 2)
            op = random_hermitian(rng, d)
            result = split_rank2(rho, op)
            target = expectation(rho, op)
            assert result.weights.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.allclose(result.reconstruct(), rho, atol=1e-8)
            for weight, part in result.parts:
                assert weight >= -1e-12
                assert numerical_rank(part) == 1
                assert expectation(part.entries, op) == pytest.approx(
                    target, abs=1e-8
                )


class TestPeel:
    """Test cases for the rank-reducing peel."""

    def test_remainder_loses_rank(self) -> None:
        """Test the remainder has lower rank and the same expectation."""
        rng = np.random.default_rng(5)
        rho = random_state(rng, 4, 4)
        op = random_hermitian(rng, 4)
        result = peel(rho, op)
        assert result.remainder is not None
        weight, rest = result.remainder
        assert numerical_rank(rest) < 4
        assert result.weights.sum() + weight == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(result.reconstruct(), rho, atol=1e-8)
        assert expectation(rest.entries, op) == pytest.approx(
            expectation(rho, op), abs=1e-7
        )

    def test_low_rank_rejected(self) -> None:
        """Test rank-2 states must use the split instead."""
        with pytest.raises(ValidationError):
            peel(np.diag([0.5, 0.5, 0.0]), np.eye(3))

    def test_flat_operator(self) -> None:
        """Test an operator constant on the support peels off eigenvectors."""
        result = peel(np.eye(3) / 3, 2.0 * np.eye(3))
        assert result.branch == "case1"
        assert result.roots is None
        assert result.weights.tolist() == pytest.approx([1 / 3, 1 / 3])
        assert result.remainder is not None
        weight, rest = result.remainder
        assert weight == pytest.approx(1 / 3)
        assert numerical_rank(rest) == 1
        assert np.allclose(result.reconstruct(), np.eye(3) / 3, atol=1e-12)

    def test_diagonal_operator(self) -> None:
        """Test a diagonal state and operator against the closed form."""
        rho = np.diag([0.5, 0.3, 0.2])
        op = np.diag([1.0, 0.0, -1.0])
        result = peel(rho, op)
        theta = np.arctan(np.sqrt(0.7 / 1.3))
        assert result.branch == "case2.2"
        assert result.roots == pytest.approx((theta, -theta), abs=1e-10)
        assert result.remainder is not None
        weight, rest = result.remainder
        # remainder keeps the middle level and part of the first
        assert weight == pytest.approx(3 / 7, abs=1e-10)
        assert np.allclose(rest.entries, np.diag([0.3, 0.7, 0.0]), atol=1e-10)
        for _, part in result.parts:
            assert expectation(part.entries, op) == pytest.approx(0.3, abs=1e-10)

    def test_random_peels(self) -> None:
        """Test weights, rank loss and expectations on seeded random states."""
        rng = np.random.default_rng(17)
        branches: set[str] = set()
        for k in range(200):
            rank = 3 + k % 2
            d = rank + (k // 2) % 2
            rho = random_state(rng, d, rank)
            op = random_hermitian(rng, d)
            target = expectation(rho, op)
            result = peel(rho, op)
            branches.add(result.branch)
            assert result.roots is not None
            theta1, theta2 = result.roots
            assert 0.0 < theta1 < np.pi / 2
            assert -np.pi / 2 < theta2 < 0.0
            assert result.remainder is not None
            weight, rest = result.remainder
            assert weight >= -1e-12
            assert np.all(result.weights >= -1e-12)
            assert result.weights.sum() + weight == pytest.approx(1.0, abs=1e-9)
            assert numerical_rank(rest) < rank
            assert np.allclose(result.reconstruct(), rho, atol=1e-8)
            assert expectation(rest.entries, op) == pytest.approx(target, abs=1e-8)
            for _, part in result.parts:
                assert numerical_rank(part) == 1
                assert expectation(part.entries, op) == pytest.approx(
                    target, abs=1e-9
                )
        assert branches == {"case2.1", "case2.2"}


class TestRank1Decompose:
    """Test cases for the full decomposition."""

    def test_seeded_instances(self) -> None:
        """Test weights, purity and expectations for d = 2 .. 6."""
        rng = np.random.default_rng(29)
        for k in range(120):
            d = 2 + k % 5
            rho = random_state(rng, d, d)
            op = random_hermitian(rng, d)
            target = expectation(rho, op)
            result = rank1_decompose(rho, op)
            assert result.weights.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(result.weights >= -1e-12)
            assert len(result.parts) <= 2 * d - 2
            for _, part in result.parts:
                purity = np.trace(part.entries @ part.entries).real
                assert purity == pytest.approx(1.0, abs=1e-9)
                assert expectation(part.entries, op) == pytest.approx(
                    target, abs=1e-9
                )

    def test_random_states(self) -> None:
        """Test every part is pure and shares the expectation value."""
        rng = np.random.default_rng(23)
        for d in (3, 4, 5):
            rho = random_state(rng, d, d)
            op = random_hermitian(rng, d)
            result = rank1_decompose(rho, op)
            target = expectation(rho, op)
            assert result.remainder is None
            assert result.weights.sum() == pytest.approx(1.0, abs=1e-8)
            assert np.allclose(result.reconstruct(), rho, atol=1e-8)
            assert len(result.parts) <= 2 * d - 2
            for _, part in result.parts:
                assert numerical_rank(part) == 1
                assert expectation(part.entries, op) == pytest.approx(
                    target, abs=1e-7
                )
        assert "parts" in result.to_dict()


class TestReduceEnsemble:
    """Test cases for the ensemble compression."""

    def test_noisy_ensemble(self) -> None:
        """Test noise is removed without changing the witness value."""
        ens, meas = noisy_ensemble(3, 0.1)
        reduction = reduce_ensemble(ens, meas, certificate("I3").spec())
        assert reduction.witness_after == pytest.approx(
            reduction.witness_before, abs=1e-7
        )
        assert reduction.entropy_after < reduction.entropy_before
        for state in reduction.ensemble.states:
            assert numerical_rank(state) == 1

    def test_embedded_ensemble(self) -> None:
        """Test states in six dimensions compress to at most three."""
        ens, meas = noisy_ensemble(6, 0.05)
        reduction = reduce_ensemble(ens, meas, certificate("I3").spec())
        assert reduction.dimension <= 3
        assert reduction.ensemble.d == reduction.dimension
        vectors = np.stack(
            [np.linalg.eigh(s.entries)[1][:, -1] for s in reduction.embedded.states]
        )
        assert np.linalg.matrix_rank(vectors @ vectors.conj().T, tol=1e-8) <= 3
        assert reduction.entropy_after <= reduction.entropy_before + 1e-8

    def test_gram_schmidt_skips_dependent(self) -> None:
        """Test dependent vectors add no frame columns."""
        frame = gram_schmidt([np.array([1.0, 0.0]), np.array([2.0, 0.0])])
        assert frame.shape == (2, 1)
