"""Deterministic-strategy model of the classical prepare-and-measure scenario.

A deterministic strategy sends message ``m(x)`` for preparation ``x`` and
answers ``E[y, m]`` to measurement ``y``. Shared randomness mixes strategies.
The maximum witness value over strategies using at most ``d`` messages is the
classical bound ``L_d``. For a fixed partition of the preparations into
messages, the best answers are the signs of the block sums of ``alpha``, so
bounds only need the partitions.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .constants import (
    FEASIBILITY_TOL,
    MAX_ENUMERATION,
    MAX_STRATEGY_CELLS,
    WEIGHT_SUM_TOL,
)
from .exceptions import (
    DimensionMismatchError,
    EnumerationLimitError,
    InfeasibleError,
    ValidationError,
)
from .qcore import FloatArray, ProbVector, entropy_bits
from .witness import WitnessSpec

logger = logging.getLogger(__name__)

IntArray = NDArray[np.int64]


@dataclass(frozen=True, eq=False)
class DeterministicStrategy:
    """Message assignment ``P`` (m_max x n, one-hot columns) and answers ``E``.

    ``E`` is ``l x m_max`` with entries in {-1, +1}.
    """

    P: IntArray
    E: IntArray

    def __post_init__(self) -> None:
        p_mat = np.array(self.P, dtype=np.int64)
        e_mat = np.array(self.E, dtype=np.int64)
        if p_mat.ndim != 2 or e_mat.ndim != 2:
            raise ValidationError("P and E must be matrices", field="P")
        one_hot = np.all((p_mat == 0) | (p_mat == 1)) and np.all(p_mat.sum(axis=0) == 1)
        if not one_hot:
            raise ValidationError("Every column of P must be one-hot", field="P")
        if not np.all(np.abs(e_mat) == 1):
            raise ValidationError("Entries of E must be +1 or -1", field="E")
        if e_mat.shape[1] != p_mat.shape[0]:
            raise DimensionMismatchError(
                f"E has {e_mat.shape[1]} message columns, P has "
                f"{p_mat.shape[0]} message rows",
                field="E",
            )
        p_mat.setflags(write=False)
        e_mat.setflags(write=False)
        object.__setattr__(self, "P", p_mat)
        object.__setattr__(self, "E", e_mat)

    @classmethod
    def from_assignment(
        cls, messages: Sequence[int], E: ArrayLike, m_max: int | None = None
    ) -> DeterministicStrategy:
        """Build a strategy from the message sent for each preparation.

        Parameters
        ----------
        messages : Sequence[int]
            ``messages[x]`` is the message index used for preparation ``x``
        E : array_like
            ``l x m_max`` answer table
        m_max : int | None
            Alphabet size, defaults to the number of preparations

        Returns
        -------
        DeterministicStrategy
            The strategy
        """
        n = len(messages)
        size = n if m_max is None else m_max
        p_mat = np.zeros((size, n), dtype=np.int64)
        p_mat[list(messages), np.arange(n)] = 1
        return cls(p_mat, np.asarray(E, dtype=np.int64))

    @property
    def n(self) -> int:
        """Number of preparations."""
        return int(self.P.shape[1])

    @property
    def l(self) -> int:  # noqa: E743
        """Number of measurements."""
        return int(self.E.shape[0])

    @property
    def m_max(self) -> int:
        """Message alphabet size."""
        return int(self.P.shape[0])

    @property
    def messages(self) -> IntArray:
        """Message index per preparation."""
        return np.asarray(np.argmax(self.P, axis=0), dtype=np.int64)

    @property
    def dimension(self) -> int:
        """Number of messages actually used."""
        return int(np.count_nonzero(self.P.sum(axis=1)))

    def signature(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Partition and answers on used messages, relabeled by first use.

        Strategies with equal signatures give equal witness values and equal
        message entropies.
        """
        relabel: dict[int, int] = {}
        for m in self.messages.tolist():
            relabel.setdefault(m, len(relabel))
        blocks = tuple(relabel[m] for m in self.messages.tolist())
        used = sorted(relabel, key=relabel.__getitem__)
        return blocks, tuple(self.E[:, used].T.reshape(-1).tolist())

    def to_dict(self) -> dict[str, Any]:
        """Serialize to ``{"P": ..., "E": ...}``."""
        return {"P": self.P.tolist(), "E": self.E.tolist()}


@dataclass(frozen=True, eq=False)
class StrategyMixture:
    """Convex combination of deterministic strategies."""

    components: tuple[tuple[DeterministicStrategy, float], ...]

    def __post_init__(self) -> None:
        components = tuple((s, float(q)) for s, q in self.components)
        if not components:
            raise ValidationError("Mixture needs at least one component", "components")
        weights = np.array([q for _, q in components])
        if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(
                f"Mixture weights must be non-negative and sum to 1, got "
                f"{weights.tolist()}",
                field="components",
            )
        shapes = {(s.P.shape, s.E.shape) for s, _ in components}
        if len(shapes) != 1:
            raise DimensionMismatchError("Mixture components differ in shape")
        object.__setattr__(self, "components", components)

    @property
    def weights(self) -> FloatArray:
        """Mixing weights ``q_lambda``."""
        return np.array([q for _, q in self.components])

    @property
    def strategies(self) -> list[DeterministicStrategy]:
        """The component strategies."""
        return [s for s, _ in self.components]

    def to_dict(self) -> dict[str, Any]:
        """Serialize to ``{"components": [{"P", "E", "q"}, ...]}``."""
        return {"components": [{**s.to_dict(), "q": q} for s, q in self.components]}


@dataclass(frozen=True)
class ClassicalBoundTable:
    """Classical bounds ``L_d`` keyed by the number of messages ``d``."""

    L: dict[int, float]

    def __post_init__(self) -> None:
        values = [self.L[d] for d in sorted(self.L)]
        if any(b < a - 1e-12 for a, b in zip(values, values[1:])):
            raise ValidationError("Classical bounds must be non-decreasing in d", "L")

    def ratios(self) -> dict[int, float]:
        """Shortcut for :func:`bound_ratios`."""
        return bound_ratios(self)


@dataclass(frozen=True, eq=False)
class Profile:
    """All partitions sharing one sorted block-size profile.

    ``p`` is the sorted message distribution, ``max_value`` the best witness
    value over those partitions, attained by ``strategy``. Negating its
    answers attains ``-max_value``.
    """

    sizes: tuple[int, ...]
    p: FloatArray
    entropy: float
    max_value: float
    strategy: DeterministicStrategy = field(repr=False)

    @property
    def dimension(self) -> int:
        """Number of messages used."""
        return len(self.sizes)

    def extreme(self, sign: int) -> tuple[float, DeterministicStrategy]:
        """Return the extreme witness value and strategy with the given sign."""
        if sign > 0:
            return self.max_value, self.strategy
        flipped = DeterministicStrategy(self.strategy.P, -self.strategy.E)
        return -self.max_value, flipped


def _check_spec_shape(s: DeterministicStrategy, spec: WitnessSpec) -> None:
    if s.n != spec.n or s.l != spec.l or s.m_max != spec.n:
        raise DimensionMismatchError(
            f"Strategy shape (n={s.n}, l={s.l}, m_max={s.m_max}) does not match "
            f"witness (n={spec.n}, l={spec.l})",
            field="strategy",
        )


def strategy_witness(s: DeterministicStrategy, spec: WitnessSpec) -> float:
    """Witness value ``sum_xy alpha_xy E[y, m(x)]`` of one strategy."""
    _check_spec_shape(s, spec)
    answers = s.E[:, s.messages].T  # n x l
    return float(np.sum(spec.alpha * answers))


def mixture_witness(mix: StrategyMixture, spec: WitnessSpec) -> float:
    """Witness value of a mixture, ``sum_lambda q_lambda w(lambda)``."""
    return float(
        sum(q * strategy_witness(s, spec) for s, q in mix.components)
    )


def message_distribution(mix: StrategyMixture, n: int) -> ProbVector:
    """Average message distribution ``p_m = sum_x,lambda P(m|x,lambda) q_lambda / n``.

    Examples
    --------
    >>> s = DeterministicStrategy.from_assignment([0, 1, 2], [[1, 1, 1]])
    >>> message_distribution(StrategyMixture(((s, 1.0),)), 3).p.round(4).tolist()
    [0.3333, 0.3333, 0.3333]
    """
    if any(s.n != n for s in mix.strategies):
        raise DimensionMismatchError(f"Mixture strategies do not have n={n}", "n")
    counts = sum(q * s.P.sum(axis=1) for s, q in mix.components)
    return ProbVector(np.asarray(counts, dtype=np.float64) / n)


def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind."""
    return sum(
        (-1) ** j * math.comb(k, j) * (k - j) ** n for j in range(k + 1)
    ) // math.factorial(k)


def strategy_count(n: int, l: int, d: int, dedupe: bool) -> int:  # noqa: E741
    """Number of strategies :func:`enumerate_strategies` would return."""
    if dedupe:
        return sum(stirling2(n, k) * 2 ** (l * k) for k in range(1, d + 1))
    return sum(
        math.comb(n, k) * math.factorial(k) * stirling2(n, k) * 2 ** (l * k)
        for k in range(1, d + 1)
    )


def _check_enumeration(n: int, l: int, d: int, count: int) -> None:  # noqa: E741
    if n < 1 or l < 1:
        raise ValidationError(f"Need n >= 1 and l >= 1, got n={n}, l={l}", "n")
    if not 1 <= d <= n:
        raise ValidationError(f"Dimension d={d} must lie in [1, {n}]", field="d")
    if n * l > MAX_STRATEGY_CELLS or count > MAX_ENUMERATION:
        raise EnumerationLimitError(
            f"Enumeration of n={n}, l={l}, d={d} needs {count} strategies "
            f"(limits: n*l <= {MAX_STRATEGY_CELLS}, count <= {MAX_ENUMERATION})",
            count=count,
            limit=MAX_ENUMERATION,
        )


def set_partitions(n: int, max_blocks: int) -> Iterator[tuple[int, ...]]:
    """Yield restricted growth strings of length ``n`` using ``<= max_blocks`` blocks.

    Block labels appear in order of first use, so each set partition is
    produced exactly once.
    """

    def extend(prefix: list[int], used: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for label in range(min(used + 1, max_blocks)):
            prefix.append(label)
            yield from extend(prefix, max(used, label + 1))
            prefix.pop()

    yield from extend([], 0)


def enumerate_strategies(
    n: int, l: int, d: int, dedupe: bool = True  # noqa: E741
) -> list[DeterministicStrategy]:
    """All deterministic strategies using at most ``d`` messages.

    Parameters
    ----------
    n : int
        Number of preparations (also the alphabet size)
    l : int
        Number of measurements
    d : int
        Maximum number of messages used
    dedupe : bool
        Keep one representative per signature (partition plus answers on
        used messages). Without it every message map is listed; answers on
        unused messages are fixed to +1 either way.

    Returns
    -------
    list[DeterministicStrategy]
        Strategies in a deterministic order

    Raises
    ------
    EnumerationLimitError
        If ``n * l > 16`` or the count exceeds the enumeration limit
    """
    count = strategy_count(n, l, d, dedupe)
    _check_enumeration(n, l, d, count)
    logger.debug(f"Enumerating {count} strategies (n={n}, l={l}, d={d})")

    if dedupe:
        maps: Iterator[tuple[int, ...]] = set_partitions(n, d)
    else:
        maps = (
            m for m in itertools.product(range(n), repeat=n) if len(set(m)) <= d
        )

    strategies = []
    for messages in maps:
        used = sorted(set(messages))
        for signs in itertools.product((1, -1), repeat=l * len(used)):
            E = np.ones((l, n), dtype=np.int64)
            E[:, used] = np.reshape(signs, (len(used), l)).T
            strategies.append(DeterministicStrategy.from_assignment(messages, E))
    return strategies


def _block_sums(alpha: FloatArray, blocks: Sequence[int], k: int) -> FloatArray:
    sums = np.zeros((k, alpha.shape[1]))
    np.add.at(sums, np.asarray(blocks), alpha)
    return sums


def _partition_count(n: int, d: int) -> int:
    return sum(stirling2(n, k) for k in range(1, d + 1))


def _check_partitions(n: int, d: int) -> None:
    if not 1 <= d <= n:
        raise ValidationError(f"Dimension d={d} must lie in [1, {n}]", field="d")
    count = _partition_count(n, d)
    if count > MAX_ENUMERATION:
        raise EnumerationLimitError(
            f"Witness with n={n} has {count} message partitions for d={d}",
            count=count,
            limit=MAX_ENUMERATION,
        )


def classical_bound_table(
    spec: WitnessSpec, d_max: int | None = None
) -> ClassicalBoundTable:
    """Bounds ``L_1 .. L_dmax`` in one pass over the message partitions."""
    top = spec.n if d_max is None else d_max
    _check_partitions(spec.n, top)
    best = np.full(top + 1, -np.inf)
    for blocks in set_partitions(spec.n, top):
        k = max(blocks) + 1
        value = float(np.abs(_block_sums(spec.alpha, blocks, k)).sum())
        best[k] = max(best[k], value)
    bounds = np.maximum.accumulate(best[1:])
    return ClassicalBoundTable({d: float(bounds[d - 1]) for d in range(1, top + 1)})


def classical_bound(spec: WitnessSpec, d: int) -> float:
    """Maximum classical witness value with at most ``d`` messages, ``L_d``.

    Examples
    --------
    >>> from entropy_witness.witness import canonical_witness
    >>> classical_bound(canonical_witness("I3"), 3)
    5.0
    """
    return classical_bound_table(spec, d).L[d]


def bound_ratios(table: ClassicalBoundTable) -> dict[int, float]:
    """Mixing ratios ``(L_d - L_2) / (L_2 - L_1)`` for every ``d >= 3``.

    A dimension-1 and a dimension-``d`` strategy mixed to reach ``L_2`` put
    weight ``(L_d - L_2) / (L_d - L_1)`` on the one-message strategy; these
    ratios are the quantities compared when checking whether a mixture of
    that kind can undercut the dimension-2 entropy.
    """
    if 1 not in table.L or 2 not in table.L:
        raise ValidationError("Bound table needs L_1 and L_2", field="L")
    span = table.L[2] - table.L[1]
    if span <= 0.0:
        raise ValidationError("L_2 equals L_1, ratios are undefined", field="L")
    return {d: (table.L[d] - table.L[2]) / span for d in sorted(table.L) if d >= 3}


def profile_table(spec: WitnessSpec, d: int | None = None) -> list[Profile]:
    """Distinct sorted message distributions with their extreme witness values.

    Strategies whose partitions share block sizes have the same message
    entropy, and relabeling messages never changes a witness value, so each
    profile is summarized by its largest value (the smallest is its
    negative). Profiles are ordered by entropy, then by block sizes.
    """
    top = spec.n if d is None else d
    _check_partitions(spec.n, top)
    best: dict[tuple[int, ...], tuple[float, tuple[int, ...]]] = {}
    for blocks in set_partitions(spec.n, top):
        k = max(blocks) + 1
        sizes = tuple(sorted(np.bincount(blocks, minlength=k).tolist(), reverse=True))
        value = float(np.abs(_block_sums(spec.alpha, blocks, k)).sum())
        if sizes not in best or value > best[sizes][0] + 1e-12:
            best[sizes] = (value, blocks)

    profiles = []
    for sizes, (value, blocks) in best.items():
        profiles.append(_make_profile(spec, sizes, value, blocks))
    profiles.sort(key=lambda prof: (prof.entropy, prof.sizes))
    logger.debug(f"Built {len(profiles)} message profiles for {spec.label}")
    return profiles


def _make_profile(
    spec: WitnessSpec, sizes: tuple[int, ...], value: float, blocks: tuple[int, ...]
) -> Profile:
    k = len(sizes)
    counts = np.bincount(blocks, minlength=k)
    # largest block becomes message 0; ties keep first-use order
    order = sorted(range(k), key=lambda b: (-counts[b], b))
    rank = {b: i for i, b in enumerate(order)}
    messages = [rank[b] for b in blocks]
    sums = _block_sums(spec.alpha, messages, k)
    E = np.ones((spec.l, spec.n), dtype=np.int64)
    E[:, :k] = np.where(sums.T < 0.0, -1, 1)
    p = np.zeros(spec.n)
    p[:k] = np.asarray(sizes, dtype=np.float64) / spec.n
    return Profile(
        sizes=sizes,
        p=p,
        entropy=entropy_bits(p),
        max_value=value,
        strategy=DeterministicStrategy.from_assignment(messages, E),
    )


def min_classical_entropy(
    spec: WitnessSpec, W: float  # noqa: N803
) -> tuple[float, StrategyMixture]:
    """Exact minimal message entropy over mixtures with witness value ``W``.

    The entropy of a mixture is concave in its weights, so the minimum sits
    at a vertex of ``{q >= 0, sum q = 1, sum q w = W}``, which has at most two
    strategies. Aligning both strategies' messages by block size maximizes
    the overlap of their distributions, and for a fixed pair of profiles
    only the extreme witness values matter. The search therefore scans pairs
    of (profile, extreme value) points.

    Parameters
    ----------
    spec : WitnessSpec
        Witness coefficients
    W : float
        Target witness value, ``|W| <= L_n``

    Returns
    -------
    tuple[float, StrategyMixture]
        Minimal entropy in bits and an optimal mixture with at most two
        components

    Raises
    ------
    InfeasibleError
        If ``|W|`` exceeds ``L_n``
    """
    profiles = profile_table(spec)
    top = max(prof.max_value for prof in profiles)
    if abs(W) > top + FEASIBILITY_TOL:
        raise InfeasibleError(
            f"W={W} is outside the classical range [-{top:.6g}, {top:.6g}]",
            value=W,
            bound=top,
        )

    points: list[tuple[float, FloatArray, Profile, int]] = []
    for prof in profiles:
        points.append((prof.max_value, prof.p, prof, 1))
        if prof.max_value > 0.0:
            points.append((-prof.max_value, prof.p, prof, -1))
    values = np.array([pt[0] for pt in points])
    dists = np.stack([pt[1] for pt in points])

    best_h = np.inf
    best_choice: tuple[int, int, float] = (-1, -1, 1.0)
    for i, (w_i, p_i, _, _) in enumerate(points):
        if abs(w_i - W) <= FEASIBILITY_TOL:
            h = entropy_bits(p_i)
            if h < best_h - 1e-12:
                best_h, best_choice = h, (i, i, 1.0)
        others = np.arange(i + 1, len(points))
        if others.size == 0:
            continue
        gaps = w_i - values[others]
        usable = np.abs(gaps) > FEASIBILITY_TOL
        q = np.full(others.size, -1.0)
        q[usable] = (W - values[others][usable]) / gaps[usable]
        feasible = (q >= -FEASIBILITY_TOL) & (q <= 1.0 + FEASIBILITY_TOL)
        for j, q_ij in zip(others[feasible], np.clip(q[feasible], 0.0, 1.0)):
            h = entropy_bits(q_ij * p_i + (1.0 - q_ij) * dists[j])
            if h < best_h - 1e-12:
                best_h, best_choice = h, (i, int(j), float(q_ij))

    i, j, q_ij = best_choice
    picks = [(i, 1.0)] if i == j else [(i, q_ij), (j, 1.0 - q_ij)]
    components = []
    for idx, weight in picks:
        if weight <= 0.0:
            continue
        _, _, prof, sign = points[idx]
        components.append((prof.extreme(sign)[1], weight))
    mixture = StrategyMixture(tuple(components))
    logger.debug(
        f"Classical minimum for {spec.label} at W={W}: H={best_h:.6f} "
        f"from {len(points)} candidate points"
    )
    return best_h, mixture
