"""Unit tests for the validators module."""

from __future__ import annotations

import pytest

from entropy_witness.exceptions import InvalidDistributionError
from entropy_witness.validators import (
    ensure_probabilities,
    suggest_witness,
    validate_case,
    validate_grid,
    validate_mode,
    validate_probabilities,
    validate_witness_matrix,
    validate_witness_name,
)


class TestValidators:
    """Test cases for validation functions."""

    def test_validate_witness_name(self) -> None:
        """Test witness name validation."""
        assert validate_witness_name("I3") is True
        assert validate_witness_name(" r4 ") is True

        # Not canonical
        assert validate_witness_name("I5") is False
        assert validate_witness_name("mixed-sign") is False

        # Bad characters
        assert validate_witness_name("I 3") is False
        assert validate_witness_name("") is False

    def test_validate_case_and_mode(self) -> None:
        """Test simulation case and mode validation."""
        assert validate_case("i3") is True
        assert validate_case("R4") is True
        assert validate_case("I5") is False

        # Modes are case sensitive
        assert validate_mode("quantum") is True
        assert validate_mode("Quantum") is False

    def test_validate_grid(self) -> None:
        """Test grid validation."""
        assert validate_grid(0.0, 1.0, 3) == (True, None)

        # A single point may have any stop
        assert validate_grid(1.0, 1.0, 1) == (True, None)

        is_valid, error = validate_grid(1.0, 1.0, 2)
        assert is_valid is False
        assert error is not None and "must exceed" in error

        is_valid, error = validate_grid(0.0, float("inf"), 2)
        assert is_valid is False
        assert error == "Grid bounds must be finite"

        is_valid, error = validate_grid(0.0, 1.0, 0)
        assert is_valid is False

    def test_validate_witness_matrix(self) -> None:
        """Test witness coefficient validation."""
        assert validate_witness_matrix([[1, 0.5], [-1, 2]]) == (True, None)

        is_valid, error = validate_witness_matrix([[]])
        assert is_valid is False
        assert error == "Witness coefficients must not be empty"

        is_valid, error = validate_witness_matrix([[1, float("nan")]])
        assert is_valid is False

        is_valid, error = validate_witness_matrix([["a", "b"]])
        assert is_valid is False
        assert error == "Witness coefficients must be numbers"

    def test_validate_probabilities(self) -> None:
        """Test per-port probability validation."""
        assert validate_probabilities({"ab": 0.5, "cb": 0.5}) == (True, None)

        # A lossy setting may sum to less than one
        assert validate_probabilities({"ab": 0.1}) == (True, None)

        is_valid, error = validate_probabilities({"ab": 0.5, "zz": 0.1})
        assert is_valid is False
        assert error is not None and "zz" in error

        is_valid, error = validate_probabilities({"ab": -0.5})
        assert is_valid is False

    def test_ensure_probabilities(self) -> None:
        """Test invalid probabilities raise with the field set."""
        ensure_probabilities({"cd": 1.0})
        with pytest.raises(InvalidDistributionError) as exc_info:
            ensure_probabilities({"ab": 0.7, "cd": 0.7})
        assert exc_info.value.field == "probabilities"

    def test_suggest_witness(self) -> None:
        """Test witness suggestions."""
        assert suggest_witness("i") == ["I3", "I4"]
        assert suggest_witness("R") == ["R4"]
        assert suggest_witness("") == ["I3", "I4", "R4"]
        assert suggest_witness("X") == []
