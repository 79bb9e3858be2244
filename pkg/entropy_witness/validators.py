"""Validation functions for the entropy-witness package."""

from __future__ import annotations

import math
import re
from collections.abc import Mapping

import numpy as np
from numpy.typing import ArrayLike

from .constants import (
    CANONICAL_WITNESSES,
    CASES,
    MODES,
    PORTS,
    PROBABILITY_NEGATIVE_TOL,
    PROBABILITY_SUM_TOL,
    WITNESS_NAME_PATTERN,
)
from .exceptions import InvalidDistributionError


def validate_witness_name(name: str) -> bool:
    """Validate that a name refers to a canonical witness.

    Parameters
    ----------
    name : str
        The witness name to validate

    Returns
    -------
    bool
        True if valid, False otherwise

    Examples
    --------
    >>> validate_witness_name("I3")
    True
    >>> validate_witness_name("r4")
    True
    >>> validate_witness_name("X")
    False
    """
    if not re.match(WITNESS_NAME_PATTERN, name.strip()):
        return False
    return name.strip().upper() in CANONICAL_WITNESSES


def validate_case(case: str) -> bool:
    """Validate a simulation case name (case insensitive).

    Examples
    --------
    >>> validate_case("i4")
    True
    >>> validate_case("I5")
    False
    """
    return case.strip().upper() in CASES


def validate_mode(mode: str) -> bool:
    """Validate a simulation mode.

    Examples
    --------
    >>> validate_mode("classical")
    True
    """
    return mode in MODES


def validate_grid(start: float, stop: float, points: int) -> tuple[bool, str | None]:
    """Validate an evenly spaced grid of witness values.

    Parameters
    ----------
    start : float
        First value
    stop : float
        Last value
    points : int
        Number of samples

    Returns
    -------
    tuple[bool, Optional[str]]
        (is_valid, error_message) - error_message is None if valid

    Examples
    --------
    >>> validate_grid(3.0, 3.6, 5)
    (True, None)
    >>> validate_grid(3.0, 2.0, 5)
    (False, 'Grid stop 2.0 must exceed start 3.0')
    """
    if points < 1:
        return False, f"Grid needs at least one point, got {points}"
    if not (math.isfinite(start) and math.isfinite(stop)):
        return False, "Grid bounds must be finite"
    if points > 1 and stop <= start:
        return False, f"Grid stop {stop} must exceed start {start}"
    return True, None


def validate_witness_matrix(alpha: ArrayLike) -> tuple[bool, str | None]:
    """Validate a coefficient matrix before building a witness.

    Examples
    --------
    >>> validate_witness_matrix([[1, 1], [1, -1]])
    (True, None)
    >>> validate_witness_matrix([1, 2])
    (False, 'Witness coefficients must be an n x l matrix, got 1 dims')
    """
    try:
        arr = np.asarray(alpha, dtype=np.float64)
    except (TypeError, ValueError):
        return False, "Witness coefficients must be numbers"
    if arr.ndim != 2:
        return (
            False,
            f"Witness coefficients must be an n x l matrix, got {arr.ndim} dims",
        )
    if arr.size == 0:
        return False, "Witness coefficients must not be empty"
    if not np.all(np.isfinite(arr)):
        return False, "Witness coefficients must be finite"
    return True, None


def validate_probabilities(
    probabilities: Mapping[str, float],
) -> tuple[bool, str | None]:
    """Validate per-port probabilities of one measurement setting.

    Examples
    --------
    >>> validate_probabilities({"ab": 0.25, "cd": 0.75})
    (True, None)
    >>> validate_probabilities({"ab": 0.8, "cd": 0.8})
    (False, 'Port probabilities sum to 1.6, more than 1')
    """
    unknown = sorted(set(probabilities) - set(PORTS))
    if unknown:
        return False, f"Unknown port pairs {unknown}"
    values = [float(v) for v in probabilities.values()]
    if any(v < -PROBABILITY_NEGATIVE_TOL for v in values):
        return False, "Port probabilities must be non-negative"
    total = sum(values)
    if total > 1.0 + PROBABILITY_SUM_TOL:
        return False, f"Port probabilities sum to {total:.6g}, more than 1"
    return True, None


def ensure_probabilities(probabilities: Mapping[str, float]) -> None:
    """Raise :class:`InvalidDistributionError` for invalid port probabilities."""
    is_valid, message = validate_probabilities(probabilities)
    if not is_valid:
        raise InvalidDistributionError(message or "", field="probabilities")


def suggest_witness(user_input: str) -> list[str]:
    """Suggest canonical witness names based on partial input.

    Examples
    --------
    >>> suggest_witness("i")
    ['I3', 'I4']
    """
    prefix = user_input.strip().upper()
    return [name for name in CANONICAL_WITNESSES if name.startswith(prefix)]
