"""Unit tests for the witness module."""

from __future__ import annotations

import numpy as np
import pytest

from entropy_witness.certificates import certificate
from entropy_witness.exceptions import DimensionMismatchError, ValidationError
from entropy_witness.witness import (
    Measurement,
    QuantumEnsemble,
    WitnessSpec,
    canonical_witness,
    eigen_sum_bound,
    expectation_table,
    quantum_value,
    recover_measurements,
)


@pytest.fixture
def i3_ensemble() -> QuantumEnsemble:
    """Create the optimal I3 qutrit ensemble.

    Returns
    -------
    QuantumEnsemble
        Three pure states in dimension three
    """
    return certificate("I3").ensemble()


class TestWitnessSpec:
    """Test cases for witness coefficient matrices."""

    def test_canonical_witnesses(self) -> None:
        """Test shapes and derived sums of the named witnesses."""
        i3, i4, r4 = (canonical_witness(name) for name in ("I3", "i4", "R4"))
        assert (i3.n, i3.l) == (3, 2)
        assert (i4.n, i4.l) == (4, 3)
        assert (r4.n, r4.l) == (4, 2)
        assert i3.column_sum_bound() == 1.0
        assert i4.column_sum_bound() == 3.0
        assert r4.column_sum_bound() == 0.0
        assert i3.absolute_sum() == 5.0
        assert i4.absolute_sum() == 9.0
        assert i4.name == "I4"

    def test_unknown_name(self) -> None:
        """Test that unknown names raise."""
        with pytest.raises(ValidationError):
            canonical_witness("I5")

    def test_invalid_coefficients(self) -> None:
        """Test shape and finiteness checks."""
        with pytest.raises(ValidationError):
            WitnessSpec(np.array([1.0, 2.0]))
        with pytest.raises(ValidationError):
            WitnessSpec(np.array([[1.0, np.nan]]))

    def test_dict_round_trip(self) -> None:
        """Test serialization to and from the config object."""
        spec = WitnessSpec.from_dict({"alpha": [[1, 2], [3, 4]], "name": "custom"})
        data = spec.to_dict()
        assert data["n"] == 2 and data["l"] == 2
        assert WitnessSpec.from_dict(data).alpha.tolist() == [[1.0, 2.0], [3.0, 4.0]]
        assert WitnessSpec(np.eye(2)).label == "custom-2x2"

    def test_declared_shape_must_match(self) -> None:
        """Test that n and l are checked against alpha."""
        with pytest.raises(ValidationError):
            WitnessSpec.from_dict({"alpha": [[1, 2]], "n": 2})
        with pytest.raises(ValidationError):
            WitnessSpec.from_dict({"n": 1})


class TestMeasurement:
    """Test cases for signed-projector observables."""

    def test_from_projection(self) -> None:
        """Test 1 - 2|m><m| for a basis vector."""
        m = Measurement.from_projection([1.0, 0.0])
        assert np.allclose(m.op, np.diag([-1.0, 1.0]))
        assert m.rank_minus == 1
        assert np.allclose(m.negated().op, np.diag([1.0, -1.0]))

    def test_rank_two_projection(self) -> None:
        """Test a rank-2 -1 eigenspace from two vectors."""
        m = Measurement.from_projection([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        assert m.rank_minus == 2
        assert np.allclose(m.op, np.diag([-1.0, -1.0, 1.0]))

    def test_eigenvalues_are_signs(self) -> None:
        """Test every eigenvalue is +1 or -1."""
        m = Measurement.from_projection([0.6, 0.8j, 0.0])
        values = np.linalg.eigvalsh(m.op)
        assert np.allclose(np.abs(values), 1.0, atol=1e-8)

    def test_identity(self) -> None:
        """Test the trivial observable."""
        assert np.allclose(Measurement.identity(3).op, np.eye(3))

    def test_dependent_vectors_raise(self) -> None:
        """Test linearly dependent projection vectors are rejected."""
        with pytest.raises(ValidationError):
            Measurement.from_projection([[1.0, 0.0], [2.0, 0.0]])


class TestQuantumValue:
    """Test cases for witness evaluation."""

    def test_identity_measurements_sum_coefficients(self) -> None:
        """Test that +1 observables give the sum of all coefficients."""
        spec = canonical_witness("I3")
        ens = QuantumEnsemble.from_vectors([[1, 0], [0, 1], [1, 1]])
        meas = [Measurement.identity(2)] * 2
        assert quantum_value(ens, meas, spec) == pytest.approx(1.0)
        assert expectation_table(ens, meas).shape == (3, 2)

    def test_certificate_values(self) -> None:
        """Test the I3 and R4 constructions reach their reference values."""
        for name, expected in (("I3", 3.622), ("R4", 5.211)):
            cert = certificate(name)
            value = quantum_value(cert.ensemble(), cert.measurements(), cert.spec())
            assert value == pytest.approx(expected, abs=2e-3)

    def test_shape_mismatch(self) -> None:
        """Test mismatched ensemble or measurement counts raise."""
        spec = canonical_witness("I3")
        ens = QuantumEnsemble.from_vectors([[1, 0], [0, 1]])
        with pytest.raises(DimensionMismatchError):
            quantum_value(ens, [Measurement.identity(2)] * 2, spec)
        ens3 = QuantumEnsemble.from_vectors([[1, 0], [0, 1], [1, 1]])
        with pytest.raises(DimensionMismatchError):
            quantum_value(ens3, [Measurement.identity(2)], spec)
        with pytest.raises(DimensionMismatchError):
            quantum_value(ens3, [Measurement.identity(3)] * 2, spec)

    def test_mixed_dimensions_rejected(self) -> None:
        """Test that ensemble states must share a dimension."""
        with pytest.raises(DimensionMismatchError):
            QuantumEnsemble.from_vectors([[1, 0], [1, 0, 0]])


class TestEigenSumBound:
    """Test cases for the bound and the measurements saturating it."""

    def test_saturation(self, i3_ensemble: QuantumEnsemble) -> None:
        """Test recovered measurements reach the bound."""
        spec = canonical_witness("I3")
        bound = eigen_sum_bound(i3_ensemble, spec)
        meas = recover_measurements(i3_ensemble, spec)
        assert quantum_value(i3_ensemble, meas, spec) == pytest.approx(bound, abs=1e-8)
        assert bound >= 3.622 - 2e-3
        for m in meas:
            assert np.allclose(np.abs(np.linalg.eigvalsh(m.op)), 1.0, atol=1e-8)

    def test_bound_dominates_any_measurement(
        self, i3_ensemble: QuantumEnsemble
    ) -> None:
        """Test the bound is at least the certificate's value."""
        cert = certificate("I3")
        spec = cert.spec()
        value = quantum_value(i3_ensemble, cert.measurements(), spec)
        assert eigen_sum_bound(i3_ensemble, spec) >= value - 1e-9

    def test_repeated_state_gives_column_sum(self) -> None:
        """Test identical states reach only the column-sum bound."""
        spec = canonical_witness("I4")
        ens = QuantumEnsemble.from_vectors([[1, 0, 0, 0]] * 4)
        assert eigen_sum_bound(ens, spec) == pytest.approx(spec.column_sum_bound())

    def test_sign_split(self) -> None:
        """Test a traceless witness operator yields both signs."""
        spec = WitnessSpec(np.array([[1.0], [-1.0]]))
        ens = QuantumEnsemble.from_vectors([[1, 0], [1, 1]])
        (m,) = recover_measurements(ens, spec)
        assert m.rank_minus == 1
        values = np.sort(np.linalg.eigvalsh(m.op))
        assert np.allclose(values, [-1.0, 1.0])
