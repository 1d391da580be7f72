"""Independent supports: checking and deletion-based minimization.

A set I is an independent support of F when any two models that agree on I
are equal.  The check asks the solver for two models of F (the second over a
shifted copy v -> v + n) that agree on I but differ somewhere else.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from hashsat.formula import Assignment, CnfFormula
from hashsat.solver import Status, solve


class NotIndependent(ValueError):
    pass


@dataclass(frozen=True)
class SupportCertificate:
    independent: bool
    witness_pair: tuple[Assignment, Assignment] | None = None
    unknown: bool = False


def independence_query(f: CnfFormula, support: Iterable[int]) -> CnfFormula:
    """Formula satisfiable iff ``support`` is NOT an independent support of ``f``.

    Variables: 1..n original, n+1..2n the copy, 2n+1.. one "differs" flag per
    variable outside the support.
    """
    n = f.num_vars
    inside = set(support)
    outside = [v for v in f.variables if v not in inside]
    clauses = list(f.clauses)
    clauses += [tuple(l + n if l > 0 else l - n for l in c) for c in f.clauses]
    for v in sorted(inside):
        clauses += [(-v, v + n), (v, -(v + n))]
    flags = []
    for j, v in enumerate(outside):
        d = 2 * n + 1 + j
        flags.append(d)
        clauses += [(-d, v, v + n), (-d, -v, -(v + n))]
    clauses.append(tuple(flags))
    return CnfFormula(2 * n + len(outside), clauses)


def is_independent_support(f: CnfFormula, support: Iterable[int], conflict_budget: int = 0) -> SupportCertificate:
    support = set(support)
    bad = [v for v in support if not 1 <= v <= f.num_vars]
    if bad:
        raise ValueError(f"variables outside the support: {sorted(bad)[:10]}")
    if len(support) == f.num_vars:
        return SupportCertificate(True)
    res = solve(independence_query(f, support), conflict_budget=conflict_budget)
    if res.status is Status.UNKNOWN:
        return SupportCertificate(False, unknown=True)
    if not res.sat:
        return SupportCertificate(True)
    n = f.num_vars
    first = {v: res.witness[v] for v in f.variables}
    second = {v: res.witness[v + n] for v in f.variables}
    return SupportCertificate(False, (first, second))


def occurrence_order(f: CnfFormula, support: Iterable[int]) -> list[int]:
    """Busiest variables first, ties broken by index."""
    occ = Counter(abs(l) for c in f.clauses for l in c)
    return sorted(support, key=lambda v: (-occ[v], v))


def minimize_support(
    f: CnfFormula,
    initial: Iterable[int] | None = None,
    order: Sequence[int] | None = None,
    conflict_budget: int = 0,
) -> tuple[int, ...]:
    """Shrink ``initial`` (default: all variables) to a minimal independent support.

    Variables are tried for removal in ``order`` (default: descending
    occurrence count).  With a conflict budget, an inconclusive check keeps the
    variable, so the result is still an independent support.
    """
    current = set(f.variables if initial is None else initial)
    cert = is_independent_support(f, current)
    if not cert.independent:
        raise NotIndependent("initial set is not an independent support")
    order = occurrence_order(f, current) if order is None else [v for v in order if v in current]
    for v in order:
        trial = current - {v}
        if is_independent_support(f, trial, conflict_budget).independent:
            current = trial
    return tuple(sorted(current))
