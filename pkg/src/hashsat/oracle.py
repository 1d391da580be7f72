"""Brute-force ground truth for desk-scale formulas, plus histogram tests."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from hashsat.formula import CnfFormula, Key

DEFAULT_CAP = 20
ALPHA = 0.01


class TooLarge(ValueError):
    pass


def _check_cap(f: CnfFormula, cap: int):
    if f.num_vars > cap:
        raise TooLarge(f"{f.num_vars} variables exceeds the oracle cap of {cap}")


def _cubes(f: CnfFormula):
    """DPLL with unit propagation; yields partial assignments satisfying every clause."""
    clauses = [frozenset(c) for c in f.clauses]

    def rec(cls, assigned):
        while True:
            unit = next((c for c in cls if len(c) == 1), None)
            if unit is None:
                break
            (lit,) = unit
            assigned = {**assigned, abs(lit): lit > 0}
            cls = _simplify(cls, lit)
            if cls is None:
                return
        if not cls:
            yield assigned
            return
        v = min(abs(l) for l in cls[0])
        for lit in (-v, v):
            nxt = _simplify(cls, lit)
            if nxt is not None:
                yield from rec(nxt, {**assigned, v: lit > 0})

    if any(not c for c in clauses):
        return
    yield from rec(clauses, {})


def _components(clauses: list[frozenset]) -> list[list[frozenset]]:
    parent: dict[int, int] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in clauses:
        it = iter(c)
        root = find(abs(next(it)))
        for l in it:
            parent[find(abs(l))] = root
    groups: dict[int, list[frozenset]] = {}
    for c in clauses:
        groups.setdefault(find(abs(next(iter(c)))), []).append(c)
    return list(groups.values())


def _simplify(clauses, lit):
    out = []
    for c in clauses:
        if lit in c:
            continue
        if -lit in c:
            c = c - {-lit}
            if not c:
                return None
        out.append(c)
    return out


def _count_models(clauses: list[frozenset]) -> int:
    """Models over the variables mentioned in ``clauses``; DPLL with component splitting."""
    vs = {abs(l) for c in clauses for l in c}
    if not clauses:
        return 1
    parts = _components(clauses)
    if len(parts) > 1:
        total = 1
        for part in parts:
            total *= _count_models(part)
            if not total:
                return 0
        return total
    occ = Counter(abs(l) for c in clauses for l in c)
    v = max(sorted(occ), key=occ.__getitem__)
    total = 0
    for lit in (v, -v):
        rest = _simplify(clauses, lit)
        if rest is None:
            continue
        left = {abs(l) for c in rest for l in c}
        total += _count_models(rest) << (len(vs) - 1 - len(left))
    return total


def exact_solutions(f: CnfFormula, s: Iterable[int] | None = None, cap: int = DEFAULT_CAP) -> list[Key]:
    """Sorted list of the distinct projections of models of ``f`` onto ``s``."""
    _check_cap(f, cap)
    s = f.projection_set() if s is None else tuple(sorted(set(s)))
    found: set[Key] = set()
    for cube in _cubes(f):
        fixed = [v if cube[v] else -v for v in s if v in cube]
        free = [v for v in s if v not in cube]
        for bits in itertools.product((False, True), repeat=len(free)):
            lits = fixed + [v if b else -v for v, b in zip(free, bits)]
            found.add(tuple(sorted(lits, key=abs)))
    return sorted(found)


def exact_count(f: CnfFormula, s: Iterable[int] | None = None, cap: int = DEFAULT_CAP) -> int:
    _check_cap(f, cap)
    if (s is None and f.sampling_set is None) or (s is not None and set(s) == set(f.variables)):
        clauses = [frozenset(c) for c in f.clauses]
        if any(not c for c in clauses):
            return 0
        mentioned = {abs(l) for c in clauses for l in c}
        return _count_models(clauses) << (f.num_vars - len(mentioned))
    return len(exact_solutions(f, s, cap))


def naive_count(f: CnfFormula, s: Iterable[int] | None = None, cap: int = DEFAULT_CAP) -> int:
    """Independent second oracle: evaluate all 2^n assignments at once with numpy."""
    _check_cap(f, cap)
    n = f.num_vars
    ids = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(1 << n, dtype=bool)
    for clause in f.clauses:
        sat = np.zeros(1 << n, dtype=bool)
        for lit in clause:
            bit = (ids >> (abs(lit) - 1)) & 1
            sat |= bit == (1 if lit > 0 else 0)
        ok &= sat
    s = f.projection_set() if s is None else tuple(sorted(set(s)))
    mask = sum(1 << (v - 1) for v in s)
    return len(np.unique(ids[ok] & mask))


def exact_uniform_sample(
    f: CnfFormula, s: Iterable[int] | None, rng: np.random.Generator, count: int, cap: int = DEFAULT_CAP
) -> list[Key]:
    sols = exact_solutions(f, s, cap)
    if not sols:
        raise ValueError("formula has no solutions")
    return [sols[int(i)] for i in rng.integers(len(sols), size=count)]


def _models(f: CnfFormula, cap: int):
    _check_cap(f, cap)
    for cube in _cubes(f):
        free = [v for v in f.variables if v not in cube]
        for bits in itertools.product((False, True), repeat=len(free)):
            yield {**cube, **dict(zip(free, bits))}


def exact_weighted_count(w, cap: int = DEFAULT_CAP) -> Fraction:
    """Sum over models of the product of literal weights."""
    return sum((w.assignment_weight(sigma) for sigma in _models(w.formula, cap)), Fraction(0))


def exact_tilt(w, cap: int = DEFAULT_CAP) -> Fraction | float:
    ws = [w.assignment_weight(sigma) for sigma in _models(w.formula, cap)]
    if not ws:
        raise ValueError("formula has no solutions")
    return math.inf if min(ws) == 0 else max(ws) / min(ws)


@dataclass
class UniformityReport:
    histogram: dict[Key, int]
    chi_square: float
    dof: int
    p_value: float
    freq_ratio: float
    sample_count: int
    reference_histogram: dict[Key, int] | None = None

    def rejects(self, alpha: float = ALPHA) -> bool:
        return self.p_value < alpha

    def to_dict(self) -> dict:
        return {
            "sample_count": self.sample_count,
            "solutions": len(self.histogram),
            "chi_square": self.chi_square,
            "dof": self.dof,
            "p_value": self.p_value,
            "freq_ratio": None if math.isinf(self.freq_ratio) else self.freq_ratio,
            "freq_ratio_infinite": math.isinf(self.freq_ratio),
            "histogram": [[list(k), c] for k, c in self.histogram.items()],
        }


def _histogram(samples: Iterable[Sequence[int]], reference: Sequence[Key]) -> dict[Key, int]:
    ref = [tuple(r) for r in reference]
    counts = Counter(tuple(x) for x in samples)
    stray = set(counts) - set(ref)
    if stray:
        raise ValueError(f"{len(stray)} sampled witnesses are not solutions, e.g. {next(iter(stray))}")
    return {r: counts.get(r, 0) for r in ref}


def _ratio(hist: dict[Key, int]) -> float:
    lo = min(hist.values())
    return math.inf if lo == 0 else max(hist.values()) / lo


def uniformity_report(
    samples: Iterable[Sequence[int]],
    reference: Sequence[Key],
    other: Iterable[Sequence[int]] | None = None,
) -> UniformityReport:
    """Chi-square test of ``samples`` against uniform over ``reference``.

    With ``other``, a two-sample test of homogeneity between the two histograms.
    """
    if not reference:
        raise ValueError("reference solution set is empty")
    hist = _histogram(samples, reference)
    counts = np.array(list(hist.values()), dtype=float)
    total = int(counts.sum())
    if other is None:
        if len(hist) == 1:
            return UniformityReport(hist, 0.0, 0, 1.0, _ratio(hist), total)
        stat, p = stats.chisquare(counts)
        return UniformityReport(hist, float(stat), len(hist) - 1, float(p), _ratio(hist), total)
    ohist = _histogram(other, reference)
    table = np.array([counts, list(ohist.values())], dtype=float)
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        return UniformityReport(hist, 0.0, 0, 1.0, _ratio(hist), total, ohist)
    stat, p, dof, _ = stats.chi2_contingency(table, correction=False)
    return UniformityReport(hist, float(stat), int(dof), float(p), _ratio(hist), total, ohist)
