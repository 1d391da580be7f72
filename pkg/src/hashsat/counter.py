"""(epsilon, delta) approximate model counting by random XOR cells.

Each round searches for a number of hash rows m whose random cell is small
(1..pivot projected solutions) and reports cell * 2^m; the estimate is the
median over rounds.  Counts small enough to enumerate are returned exactly.
"""

from __future__ import annotations

import math
import statistics
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from hashsat.formula import CnfFormula
from hashsat.hashing import draw_hash, draw_target, hash_to_constraints
from hashsat.solver import count_cell


class AllRoundsFailed(RuntimeError):
    def __init__(self, params: CounterParams, outcomes: list):
        self.params = params
        self.outcomes = outcomes
        super().__init__(f"all {len(outcomes)} rounds failed (pivot={params.pivot})")


@dataclass(frozen=True)
class CounterParams:
    epsilon: float
    delta: float
    pivot: int
    rounds: int


@dataclass(frozen=True)
class RoundOutcome:
    m: int
    cell: int

    @property
    def estimate(self) -> int:
        return self.cell << self.m


@dataclass
class CountEstimate:
    value: int
    exact: bool
    params: CounterParams
    rounds: list[RoundOutcome | None] = field(default_factory=list)
    sampling_set: tuple[int, ...] = ()

    @property
    def failed_rounds(self) -> int:
        return sum(r is None for r in self.rounds)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "exact": self.exact,
            "epsilon": self.params.epsilon,
            "delta": self.params.delta,
            "pivot": self.params.pivot,
            "rounds": [None if r is None else {"m": r.m, "cell": r.cell} for r in self.rounds],
        }


def compute_params(epsilon: float, delta: float) -> CounterParams:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    pivot = 2 * math.ceil(3 * math.sqrt(math.e) * (1 + 1 / epsilon) ** 2)
    rounds = math.ceil(35 * math.log2(3 / delta))
    if rounds % 2 == 0:
        rounds += 1
    return CounterParams(epsilon, delta, pivot, rounds)


def approxmc_round(
    f: CnfFormula, s: Sequence[int], pivot: int, rng: np.random.Generator, m_start: int = 1
) -> RoundOutcome | None:
    """One cell-measuring round; ``None`` when no m in [m_start, |s|-1] gives a small nonempty cell.

    A fresh hash and target are drawn for every m tried.
    """
    n = len(s)
    for m in range(max(1, m_start), n):
        h = draw_hash(n, m, rng)
        alpha = draw_target(m, rng)
        cell = count_cell(f, hash_to_constraints(h, alpha, s), s, pivot + 1)
        if 1 <= cell <= pivot:
            return RoundOutcome(m, cell)
    return None


def _resolve_set(f: CnfFormula, s: Iterable[int] | None) -> tuple[int, ...]:
    if s is None:
        return f.projection_set()
    s = tuple(sorted(set(s)))
    bad = [v for v in s if not 1 <= v <= f.num_vars]
    if bad:
        raise ValueError(f"sampling set not within the support: {bad[:10]}")
    return s


def approx_count(
    f: CnfFormula,
    s: Iterable[int] | None = None,
    epsilon: float = 0.8,
    delta: float = 0.2,
    rng: np.random.Generator | None = None,
) -> CountEstimate:
    """Estimate the number of projections of models of ``f`` onto ``s``.

    ``s`` defaults to the formula's sampling set, else its full support.  With
    probability at least 1 - delta the value is within a factor (1 + epsilon).
    """
    params = compute_params(epsilon, delta)
    s = _resolve_set(f, s)
    rng = rng if rng is not None else np.random.default_rng()
    small = count_cell(f, (), s, params.pivot + 1)
    if small <= params.pivot:
        return CountEstimate(small, True, params, [], s)
    outcomes = [approxmc_round(f, s, params.pivot, rng) for _ in range(params.rounds)]
    estimates = [o.estimate for o in outcomes if o is not None]
    if not estimates:
        raise AllRoundsFailed(params, outcomes)
    return CountEstimate(statistics.median_low(estimates), False, params, outcomes, s)
