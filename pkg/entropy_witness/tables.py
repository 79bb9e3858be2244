"""Wave-plate angle settings and linear tomography matrices.

Preparation rows are ``(h_s, q_s, h_i)`` and measurement rows are
``(h_s, q_s, h_i, q_i)``, all in degrees.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ValidationError
from .qcore import ComplexArray

# Preparation of the witness states
QUANTUM_PREPARATION: dict[str, tuple[tuple[float, float, float], ...]] = {
    "I3": (
        (0.0, 0.0, 0.0),
        (18.57, 37.14, 0.0),
        (-24.69, -49.38, 0.0),
    ),
    "I4": (
        (0.0, 0.0, 0.0),
        (16.83, 33.66, 0.0),
        (35.95, 71.89, 0.0),
        (17.27, 34.54, 11.13),
    ),
    "R4": (
        (0.0, 0.0, 0.0),
        (33.55, 33.55, 0.0),
        (0.0, 33.55, 0.0),
        (33.55, 67.09, 0.0),
    ),
}

# Preparation of basis states, per strategy index of the classical mixture
CLASSICAL_PREPARATION: dict[str, tuple[tuple[tuple[float, float, float], ...], ...]] = {
    "I3": (
        ((0.0, 0.0, 0.0), (45.0, 90.0, 0.0), (45.0, 90.0, 45.0)),
        ((0.0, 0.0, 0.0), (45.0, 90.0, 0.0), (0.0, 0.0, 0.0)),
    ),
    "I4": (
        ((0.0, 0.0, 0.0), (45.0, 90.0, 0.0), (45.0, 90.0, 45.0), (0.0, 0.0, 0.0)),
        ((0.0, 0.0, 0.0), (45.0, 90.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
    ),
    "R4": (
        ((0.0, 0.0, 0.0), (45.0, 90.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 45.0)),
        ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 45.0)),
    ),
}

# Witness measurements
QUANTUM_MEASUREMENT: dict[str, tuple[tuple[float, float, float, float], ...]] = {
    "I3": (
        (-31.53, -63.06, 0.0, 0.0),
        (31.79, 63.57, 0.0, 0.0),
    ),
    "I4": (
        (17.26, 34.53, 39.07, 78.15),
        (-42.85, -85.70, 0.0, 0.0),
        (30.92, 61.84, 0.0, 0.0),
    ),
    "R4": (
        (50.52, 78.54, 0.0, 0.0),
        (28.02, 78.54, 0.0, 0.0),
    ),
}

# Tomography projections, s = 3
TOMOGRAPHY_QUTRIT: tuple[tuple[float, float, float, float], ...] = (
    (0.0, 0.0, 0.0, 0.0),
    (45.0, 0.0, 0.0, 0.0),
    (45.0, 0.0, 45.0, 0.0),
    (45.0, 0.0, 22.5, 0.0),
    (45.0, 0.0, 22.5, 45.0),
    (22.5, 45.0, 22.5, 45.0),
    (22.5, 45.0, 22.5, 90.0),
    (22.5, 45.0, 0.0, 90.0),
    (22.5, 0.0, 0.0, 90.0),
)

# Tomography projections, s = 4
TOMOGRAPHY_QUQUART: tuple[tuple[float, float, float, float], ...] = (
    (45.0, 0.0, 45.0, 0.0),
    (45.0, 0.0, 0.0, 0.0),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 0.0, 45.0, 0.0),
    (22.5, 0.0, 45.0, 0.0),
    (22.5, 0.0, 0.0, 0.0),
    (22.5, 45.0, 0.0, 0.0),
    (22.5, 45.0, 45.0, 0.0),
    (22.5, 45.0, 22.5, 0.0),
    (22.5, 45.0, 22.5, 45.0),
    (22.5, 0.0, 22.5, 45.0),
    (45.0, 0.0, 22.5, 45.0),
    (0.0, 0.0, 22.5, 45.0),
    (0.0, 0.0, 22.5, 90.0),
    (45.0, 0.0, 22.5, 90.0),
    (22.5, 0.0, 22.5, 90.0),
)

_I = 1j

# Linear reconstruction matrices, s = 3, in settings order
_QUTRIT_MATRICES = (
    0.5 * np.array([[2, -1 + _I, 0], [-1 - _I, 0, 0], [0, 0, 0]]),
    0.5 * np.array([[0, -1 + _I, 1 - _I], [-1 - _I, 2, -1 + _I], [1 + _I, -1 - _I, 0]]),
    0.5 * np.array([[0, 0, -2 * _I], [0, 0, -1 + _I], [2 * _I, -1 - _I, 2]]),
    np.array([[0, 0, _I], [0, 0, -_I], [-_I, _I, 0]]),
    np.array([[0, 0, -1], [0, 0, 1], [-1, 1, 0]]),
    np.array([[0, 0, 2], [0, 0, 0], [2, 0, 0]]),
    np.array([[0, 0, 2 * _I], [0, 0, 0], [-2 * _I, 0, 0]]),
    np.array([[0, 1, -1 - _I], [1, 0, 0], [-1 + _I, 0, 0]]),
    np.array([[0, -_I, 0], [_I, 0, 0], [0, 0, 0]]),
)

# Linear reconstruction matrices, s = 4, in settings order
_QUQUART_MATRICES = (
    0.5
    * np.array(
        [
            [0, 0, 1, 0],
            [0, 0, -1 - _I, _I],
            [1, -1 + _I, 2, -1 - _I],
            [0, -_I, -1 + _I, 0],
        ]
    ),
    0.5
    * np.array(
        [
            [0, -1 + _I, 1, 0],
            [-1 - _I, 2, -1 - _I, _I],
            [1, -1 + _I, 0, 0],
            [0, -_I, 0, 0],
        ]
    ),
    0.5
    * np.array(
        [
            [2, -1 + _I, 1, -1 - _I],
            [-1 - _I, 0, 0, _I],
            [1, 0, 0, 0],
            [-1 + _I, -_I, 0, 0],
        ]
    ),
    0.5
    * np.array(
        [
            [0, 0, 1, -1 - _I],
            [0, 0, 0, _I],
            [1, 0, 0, -1 - _I],
            [-1 + _I, -_I, -1 + _I, 2],
        ]
    ),
    0.5
    * np.array(
        [
            [0, 0, -1 + _I, 0],
            [0, 0, 0, 1 - _I],
            [-1 - _I, 0, 0, 2 * _I],
            [0, 1 + _I, -2 * _I, 0],
        ]
    ),
    0.5
    * np.array(
        [
            [0, -2 * _I, -1 + _I, 0],
            [2 * _I, 0, 0, 1 - _I],
            [-1 - _I, 0, 0, 0],
            [0, 1 + _I, 0, 0],
        ]
    ),
    0.5
    * np.array(
        [
            [0, 2, -1 + _I, 0],
            [2, 0, 0, -1 + _I],
            [-1 - _I, 0, 0, 0],
            [0, -1 - _I, 0, 0],
        ]
    ),
    0.5
    * np.array(
        [
            [0, 0, -1 + _I, 0],
            [0, 0, 0, -1 + _I],
            [-1 - _I, 0, 0, 2],
            [0, -1 - _I, 2, 0],
        ]
    ),
    np.array([[0, 0, -_I, 0], [0, 0, 0, -_I], [_I, 0, 0, 0], [0, _I, 0, 0]]),
    np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]),
    np.array([[0, 0, -_I, 0], [0, 0, 0, _I], [_I, 0, 0, 0], [0, -_I, 0, 0]]),
    0.5
    * np.array(
        [
            [0, 0, -1 + _I, 0],
            [0, 0, 2, -1 - _I],
            [-1 - _I, 2, 0, 0],
            [0, -1 + _I, 0, 0],
        ]
    ),
    0.5
    * np.array(
        [
            [0, 0, -1 + _I, 2],
            [0, 0, 0, -1 - _I],
            [-1 - _I, 0, 0, 0],
            [2, -1 + _I, 0, 0],
        ]
    ),
    0.5
    * np.array(
        [
            [0, 0, -1 - _I, 2 * _I],
            [0, 0, 0, 1 - _I],
            [-1 + _I, 0, 0, 0],
            [-2 * _I, 1 + _I, 0, 0],
        ]
    ),
    0.5
    * np.array(
        [
            [0, 0, -1 - _I, 0],
            [0, 0, 2 * _I, 1 - _I],
            [-1 + _I, -2 * _I, 0, 0],
            [0, 1 + _I, 0, 0],
        ]
    ),
    np.array([[0, 0, 1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, -1, 0, 0]]),
)


def reconstruction_matrices(s: int) -> ComplexArray:
    """Stack of the ``s**2`` linear reconstruction matrices for ``s`` in {3, 4}."""
    source = {3: _QUTRIT_MATRICES, 4: _QUQUART_MATRICES}.get(s)
    if source is None:
        raise ValidationError(f"No reconstruction matrices for s={s}", field="s")
    return np.stack([np.asarray(m, dtype=np.complex128) for m in source])
