"""Explicit optimal ensembles, measurements and classical mixtures.

Each :class:`Certificate` pins down one construction by its amplitudes (as
printed, to four decimals) and the vectors spanning the -1 eigenspace of
every measurement. The reference values are the witness value and
entropies the construction is known to reach.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from numpy.typing import ArrayLike

from .classical import DeterministicStrategy, StrategyMixture
from .exceptions import ValidationError
from .qcore import ComplexArray, DensityMatrix
from .witness import Measurement, QuantumEnsemble, WitnessSpec, canonical_witness

logger = logging.getLogger(__name__)

# Optimal point per canonical witness: W, H_min, S_min, gap
TABLE_ONE: dict[str, tuple[float, float, float, float]] = {
    "I3": (3.622, 1.334, 0.897, 0.437),
    "I4": (5.760, 1.223, 0.829, 0.394),
    "R4": (5.211, 1.356, 0.888, 0.468),
}

# Witness whose classical minimum is not reached by one- and two-message mixtures
MIXED_SIGN_ALPHA = (
    (0.4955, 0.7775),
    (-0.6092, -0.6572),
    (0.0048, -0.5283),
    (-0.5877, 0.8258),
)
MIXED_SIGN_BOUNDS = (1.1144, 3.4854, 4.4764, 4.4860)
MIXED_SIGN_ENTROPY_FLOOR = 0.811


@dataclass(frozen=True, eq=False)
class Certificate:
    """A concrete ensemble and measurement set for a witness.

    ``minus_vectors[y]`` lists the vectors spanning the -1 eigenspace of
    ``M_y``; one vector gives ``1 - 2|m><m|``.
    """

    name: str
    witness: str
    states: tuple[ComplexArray, ...]
    minus_vectors: tuple[tuple[ComplexArray, ...], ...]
    value: float
    entropy: float
    strategies: tuple[tuple[ArrayLike, ArrayLike, float], ...] = field(
        default=(), repr=False
    )
    classical_entropy: Optional[float] = None

    def spec(self) -> WitnessSpec:
        """The witness the certificate is built for."""
        return canonical_witness(self.witness)

    def ensemble(self) -> QuantumEnsemble:
        """States normalized from the stored amplitudes."""
        return QuantumEnsemble.from_vectors(self.states)

    def measurements(self) -> list[Measurement]:
        """One observable per witness column."""
        return [
            Measurement.from_projection(np.array(vecs)) for vecs in self.minus_vectors
        ]

    def mixture(self) -> Optional[StrategyMixture]:
        """The optimal classical mixture, when the certificate has one."""
        if not self.strategies:
            return None
        return StrategyMixture(
            tuple(
                (DeterministicStrategy(np.asarray(P), np.asarray(E)), q)
                for P, E, q in self.strategies
            )
        )

    def to_dict(self) -> dict[str, Any]:
        """Reference values and shapes for reports."""
        return {
            "name": self.name,
            "witness": self.witness,
            "d": int(np.asarray(self.states[0]).size),
            "value": self.value,
            "entropy": self.entropy,
            "classical_entropy": self.classical_entropy,
        }


def _vec(*amplitudes: complex) -> ComplexArray:
    return np.array(amplitudes, dtype=np.complex128)


def _renormalized_weights(*q: float) -> tuple[float, ...]:
    # printed weights are rounded to four decimals
    total = sum(q)
    return tuple(w / total for w in q)


def _i3() -> Certificate:
    E = [[1, 1, -1], [1, -1, 1]]
    q1, q2 = _renormalized_weights(0.3111, 0.6889)
    return Certificate(
        name="I3",
        witness="I3",
        states=(_vec(1, 0, 0), _vec(0.7972, 0.6037, 0), _vec(0.6511, -0.7590, 0)),
        minus_vectors=((_vec(0.4531, -0.8914, 0),), (_vec(0.4451, 0.8955, 0),)),
        value=3.622,
        entropy=0.897,
        strategies=(
            (np.eye(3, dtype=int), E, q1),
            ([[1, 0, 1], [0, 1, 0], [0, 0, 0]], E, q2),
        ),
        classical_entropy=1.334,
    )


def _i4() -> Certificate:
    E = [[1, 1, 1, -1], [1, 1, -1, 1], [1, -1, 1, 1]]
    q1, q2 = _renormalized_weights(0.3802, 0.6198)
    return Certificate(
        name="I4",
        witness="I4",
        states=(
            _vec(1, 0, 0, 0),
            _vec(0.8323, 0.5543, 0, 0),
            _vec(0.3108, 0.9505, 0, 0),
            _vec(0.7623, 0.5247, 0.2148, 0.3121),
        ),
        minus_vectors=(
            (_vec(0.1692, 0.1164, 0.5549, 0.8062),),
            (_vec(0.0750, -0.9972, 0, 0),),
            (_vec(0.4721, 0.8816, 0, 0),),
        ),
        value=5.760,
        entropy=0.829,
        strategies=(
            ([[1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0]], E, q1),
            ([[1, 0, 1, 1], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]], E, q2),
        ),
        classical_entropy=1.223,
    )


def _r4() -> Certificate:
    E = [[1, 1, -1, -1], [1, -1, 1, -1]]
    q1, q2 = _renormalized_weights(0.6056, 0.3944)
    return Certificate(
        name="R4",
        witness="R4",
        states=(
            _vec(1, 0, 0, 0),
            _vec(0.7588, 0.2363 - 0.6070j, 0, 0),
            _vec(0.7588, 0.2363 + 0.6070j, 0, 0),
            _vec(0.3893, 0.9211, 0, 0),
        ),
        minus_vectors=(
            (_vec(0.1515 - 0.3891j, 0.9087, 0, 0),),
            (_vec(0.1515 + 0.3891j, 0.9087, 0, 0),),
        ),
        value=5.211,
        entropy=0.888,
        strategies=(
            ([[1, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]], E, q1),
            ([[1, 1, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]], E, q2),
        ),
        classical_entropy=1.356,
    )


def _ququart_i4() -> Certificate:
    return Certificate(
        name="ququart-I4",
        witness="I4",
        states=(
            _vec(1, 0, 0, 0),
            _vec(0.8290, 0.5592, 0, 0),
            _vec(0.7660, -0.6428, 0, 0),
            _vec(0.8844, -0.0191, -0.1204, 0.4506),
        ),
        minus_vectors=(
            (_vec(0.2229, -0.0058, -0.2516, 0.9418),),
            (_vec(0.4838, -0.8752, 0, 0),),
            (_vec(0.4695, 0.8829, 0, 0),),
        ),
        value=6.0,
        entropy=0.9122,
    )


def _qutrit_r4() -> Certificate:
    norm = math.sqrt(10 + 2 * math.sqrt(5))
    a, b = (math.sqrt(5) + 1) / norm, 2 / norm
    r = 1 / math.sqrt(2)
    return Certificate(
        name="qutrit-R4",
        witness="R4",
        states=(_vec(0, 0, 1), _vec(r, -r, 0), _vec(r, r, 0), _vec(1, 0, 0)),
        minus_vectors=((_vec(a, b, 0),), (_vec(a, -b, 0),)),
        value=6.472,
        entropy=1.5,
    )


def _ququart_r4() -> Certificate:
    return Certificate(
        name="ququart-R4",
        witness="R4",
        states=(
            _vec(1, 0, 0, 0),
            _vec(0.5892, 0.5736, 0.5690, 0),
            _vec(-0.6257, 0.5584, 0.0293, 0.5439),
            _vec(0.0175, 0.9998, 0, 0),
        ),
        minus_vectors=(
            (
                _vec(-0.2925, 0.8860, -0.0987, 0.3460),
                _vec(-0.1432, -0.3525, 0.3117, 0.8707),
            ),
            (
                _vec(0.2906, 0.8847, 0.3496, -0.1030),
                _vec(0.1143, -0.3604, 0.8911, 0.2511),
            ),
        ),
        value=6.472,
        entropy=1.418,
    )


def _qubit_observable(theta: float, phi: float = 0.0) -> ComplexArray:
    """``2|m><m| - 1`` for ``|m> = (cos(theta/2), e^{i phi} sin(theta/2))``."""
    m = _vec(math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2))
    return 2.0 * np.outer(m, m.conj()) - np.eye(2)


def _top_eigenvector(op: ComplexArray) -> ComplexArray:
    _, vectors = np.linalg.eigh(op)
    return vectors[:, -1]


def qubit_i4_bound(theta: float, phi: float, varphi: float) -> float:
    """Best I4 value of qubit states for the measurement angles given.

    The three observables are ``2|m_k><m_k| - 1`` with ``|m_1> = |0>``,
    ``|m_2>`` at polar angle ``theta`` and ``|m_3>`` at polar angle ``phi``
    with relative phase ``varphi``. Each state aligns with the top
    eigenvector of the operator it multiplies in the witness, so the value
    is the sum of the four largest eigenvalues. Its maximum over all angles
    is 6, reached at ``theta = pi/3`` when
    ``cos(theta) cos(phi) + sin(theta) sin(phi) cos(varphi) = 0``.

    Examples
    --------
    >>> round(qubit_i4_bound(math.pi / 3, math.pi / 2, math.pi / 2), 12)
    6.0
    """
    overlap = 2 * math.cos(theta) * math.cos(phi) + 2 * math.sin(theta) * math.sin(
        phi
    ) * math.cos(varphi)
    base = 3 + 2 * math.cos(theta)
    return (
        math.sqrt(max(0.0, base + overlap))
        + math.sqrt(max(0.0, base - overlap))
        + math.sqrt(max(0.0, 2 - 2 * math.cos(theta)))
        + 1.0
    )


def qubit_i4(
    theta: float = math.pi / 3, phi: float = math.pi / 2, varphi: float = math.pi / 2
) -> Certificate:
    """Qubit I4 ensemble attaining :func:`qubit_i4_bound`.

    With the default angles the witness equals 6 and the average state is
    ``diag(5/8, 3/8)``, whose entropy is 0.954 bit.
    """
    m1 = _qubit_observable(0.0)
    m2 = _qubit_observable(theta)
    m3 = _qubit_observable(phi, varphi)
    combos = (m1 + m2 + m3, m1 + m2 - m3, m1 - m2, -m1)
    states = tuple(_top_eigenvector(op) for op in combos)
    # -1 eigenspace of 2|m><m| - 1 is the orthogonal complement of m
    minus = tuple((_top_eigenvector(-op),) for op in (m1, m2, m3))
    avg = DensityMatrix(np.mean([np.outer(v, v.conj()) for v in states], axis=0))
    values = np.clip(np.linalg.eigvalsh(avg.entries), 0.0, 1.0)
    entropy = float(-sum(v * math.log2(v) for v in values if v > 0))
    logger.debug(f"qubit I4 certificate: average spectrum {values.round(6).tolist()}")
    return Certificate(
        name="qubit-I4",
        witness="I4",
        states=states,
        minus_vectors=minus,
        value=qubit_i4_bound(theta, phi, varphi),
        entropy=entropy,
    )


_BUILDERS = {
    "I3": _i3,
    "I4": _i4,
    "R4": _r4,
    "ququart-I4": _ququart_i4,
    "qubit-I4": qubit_i4,
    "qutrit-R4": _qutrit_r4,
    "ququart-R4": _ququart_r4,
}

CERTIFICATE_NAMES: tuple[str, ...] = tuple(_BUILDERS)


def certificate(name: str) -> Certificate:
    """Look up a certificate by name.

    Raises
    ------
    ValidationError
        If the name is unknown
    """
    builder = _BUILDERS.get(name)
    if builder is None:
        raise ValidationError(
            f"Unknown certificate '{name}'. Must be one of: "
            f"{', '.join(CERTIFICATE_NAMES)}",
            field="name",
        )
    return builder()


def mixed_sign_witness() -> WitnessSpec:
    """Four-preparation, two-measurement witness with irregular coefficients."""
    return WitnessSpec(np.array(MIXED_SIGN_ALPHA), name="mixed-sign")


def certificate_values(
    names: Sequence[str] = CERTIFICATE_NAMES,
) -> list[dict[str, Any]]:
    """Reference values of several certificates, for reports."""
    return [certificate(name).to_dict() for name in names]
