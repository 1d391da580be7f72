"""Literal-weighted counting and sampling by reduction to the unweighted case.

A variable v with weights k+/2^m (for v) and k-/2^m (for not v) gets a block
of m fresh variables and the constraints v -> C(k+) and not v -> C(k-), where
C(k) is a chain formula over the block with exactly k models.  Every model of
the original formula then has 2^m * weight extensions per weighted variable,
so unweighted counts of the result equal 2^(sum m) times the weighted count.
"""

from __future__ import annotations

import math
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

import numpy as np

from hashsat.counter import CountEstimate, approx_count
from hashsat.formula import CnfFormula, Key
from hashsat.sampler import DEFAULT_EPSILON, SampleBatch, unigen_sample
from hashsat.solver import extend

DEFAULT_PRECISION = 8

_WEIGHT_LINE = re.compile(r"^c\s+p\s+weight\s+(-?\d+)\s+(\S+)(?:\s+0)?\s*$")


@dataclass(frozen=True, order=True)
class DyadicWeight:
    """The value k / 2^m, kept in lowest terms."""

    k: int
    m: int

    def __post_init__(self):
        if self.m < 0 or not 0 <= self.k <= (1 << self.m):
            raise ValueError(f"need 0 <= k <= 2^m, got k={self.k}, m={self.m}")
        k, m = self.k, self.m
        while m > 0 and k % 2 == 0:
            k //= 2
            m -= 1
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "m", m)

    @property
    def value(self) -> Fraction:
        return Fraction(self.k, 1 << self.m)

    def at(self, m: int) -> int:
        """Numerator at precision ``m`` >= self.m."""
        return self.k << (m - self.m)

    @classmethod
    def from_value(cls, value, precision: int = DEFAULT_PRECISION) -> tuple[DyadicWeight, Fraction]:
        """Round ``value`` in [0, 1] to the nearest multiple of 2^-precision; returns (weight, error)."""
        exact = Fraction(Decimal(value)) if isinstance(value, str) else Fraction(value)
        if not 0 <= exact <= 1:
            raise ValueError(f"weight {value} outside [0, 1]")
        k = round(exact * (1 << precision))
        w = cls(k, precision)
        return w, abs(w.value - exact)


@dataclass(frozen=True)
class WeightedCnf:
    formula: CnfFormula
    weights: Mapping[int, DyadicWeight] = field(default_factory=dict)
    rounding_error: Fraction = Fraction(0)

    def __post_init__(self):
        for lit in self.weights:
            if lit == 0 or abs(lit) > self.formula.num_vars:
                raise ValueError(f"weight on literal {lit} outside the support")

    def pair(self, v: int) -> tuple[DyadicWeight, DyadicWeight] | None:
        """(weight of v, weight of not v); a missing side is the complement, both missing is None."""
        pos, neg = self.weights.get(v), self.weights.get(-v)
        if pos is None and neg is None:
            return None
        if pos is None:
            pos = DyadicWeight((1 << neg.m) - neg.k, neg.m)
        if neg is None:
            neg = DyadicWeight((1 << pos.m) - pos.k, pos.m)
        return pos, neg

    def weighted_vars(self) -> list[int]:
        return sorted({abs(l) for l in self.weights})

    def literal_weight(self, lit: int) -> Fraction:
        p = self.pair(abs(lit))
        if p is None:
            return Fraction(1)
        return (p[0] if lit > 0 else p[1]).value

    def assignment_weight(self, sigma: Mapping[int, bool]) -> Fraction:
        w = Fraction(1)
        for v in self.weighted_vars():
            w *= self.literal_weight(v if sigma[v] else -v)
        return w


def parse_weights(f: CnfFormula, precision: int = DEFAULT_PRECISION) -> WeightedCnf:
    """Read ``c p weight <lit> <decimal> 0`` lines from the formula's comments."""
    weights: dict[int, DyadicWeight] = {}
    worst = Fraction(0)
    for line in f.weight_lines():
        mt = _WEIGHT_LINE.match(line)
        if not mt:
            raise ValueError(f"malformed weight line {line!r}")
        lit = int(mt.group(1))
        w, err = DyadicWeight.from_value(mt.group(2), precision)
        weights[lit] = w
        worst = max(worst, err)
    return WeightedCnf(f, weights, worst)


def _chain_clauses(k: int, block: list[int]) -> list[tuple[int, ...]]:
    # Split on the top variable b: the b=0 half takes min(k, 2^(m-1)) models.
    # k >= half: (not b) or rest(k - half); k < half: (not b) and rest(k).
    m = len(block)
    clauses: list[tuple[int, ...]] = []
    prefix: list[int] = []
    i = 0
    while True:
        if k == 1 << (m - i):
            return clauses
        if k == 0:
            clauses.append(tuple(prefix))
            return clauses
        half = 1 << (m - i - 1)
        b = block[i]
        if k >= half:
            prefix.append(-b)
            k -= half
        else:
            clauses.append((*prefix, -b))
        i += 1


def chain_formula(k: int, m: int) -> CnfFormula:
    """CNF over variables 1..m with exactly k models."""
    if m < 0 or not 0 <= k <= (1 << m):
        raise ValueError(f"need 0 <= k <= 2^m, got k={k}, m={m}")
    return CnfFormula(m, _chain_clauses(k, list(range(1, m + 1))))


@dataclass(frozen=True)
class ReductionResult:
    formula: CnfFormula
    scale_log2: int
    original_vars: tuple[int, ...]
    gadget_vars: tuple[int, ...] = ()


def reduce_wmc_to_umc(w: WeightedCnf) -> ReductionResult:
    f = w.formula
    clauses = list(f.clauses)
    top = f.num_vars
    gadget: list[int] = []
    scale = 0
    for v in w.weighted_vars():
        pos, neg = w.pair(v)
        if pos.k == 0 and neg.k == 0:
            raise ValueError(f"both literals of variable {v} have weight 0")
        m = max(pos.m, neg.m)
        block = list(range(top + 1, top + m + 1))
        top += m
        gadget += block
        scale += m
        clauses += [(-v, *c) for c in _chain_clauses(pos.at(m), block)]
        clauses += [(v, *c) for c in _chain_clauses(neg.at(m), block)]
    base = f.projection_set()
    out = CnfFormula(top, clauses, frozenset(base) | frozenset(gadget) if gadget or f.sampling_set else None)
    return ReductionResult(out, scale, tuple(f.variables), tuple(gadget))


@dataclass
class WeightedEstimate:
    value: Fraction
    count: CountEstimate
    scale_log2: int

    def to_dict(self) -> dict:
        d = self.count.to_dict()
        d.update(weighted_value=str(self.value), weighted_float=float(self.value), scale_log2=self.scale_log2)
        return d


def weighted_count(
    w: WeightedCnf, epsilon: float = 0.8, delta: float = 0.2, rng: np.random.Generator | None = None
) -> WeightedEstimate:
    red = reduce_wmc_to_umc(w)
    est = approx_count(red.formula, None, epsilon, delta, rng)
    return WeightedEstimate(Fraction(est.value, 1 << red.scale_log2), est, red.scale_log2)


def _restrict(key: Key, n: int) -> Key:
    return tuple(l for l in key if abs(l) <= n)


def weighted_sample(
    w: WeightedCnf,
    epsilon: float = DEFAULT_EPSILON,
    num_samples: int = 1,
    rng: np.random.Generator | None = None,
    mode: str = "single",
) -> SampleBatch:
    """Samples over the original variables, distributed in proportion to assignment weight."""
    red = reduce_wmc_to_umc(w)
    batch = unigen_sample(red.formula, None, epsilon, num_samples, rng, mode)
    n = w.formula.num_vars
    covered = set(red.formula.projection_set()) >= set(red.original_vars)
    out = []
    for key in batch.witnesses:
        if not covered:
            full = extend(red.formula, key)
            key = tuple(v if full[v] else -v for v in red.original_vars)
        out.append(_restrict(key, n))
    batch.witnesses = out
    return batch


def tilt_bound(w: WeightedCnf) -> Fraction | float:
    """Upper bound on max/min assignment weight; ``math.inf`` when some literal weight is 0."""
    hi = lo = Fraction(1)
    for v in w.weighted_vars():
        a, b = (x.value for x in w.pair(v))
        hi *= max(a, b)
        lo *= min(a, b)
    return math.inf if lo == 0 else hi / lo
