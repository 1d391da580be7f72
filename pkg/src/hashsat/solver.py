"""Satisfiability oracle for CNF plus XOR constraints.

XORs are cut into width-3 pieces chained through fresh auxiliary variables
and expanded to CNF; the CDCL kernel in :mod:`hashsat._cdcl` does the search.
Auxiliaries are numbered after the formula's own variables and never enter a
projection or blocking clause.
"""

from __future__ import annotations

import enum
import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from hashsat import _cdcl
from hashsat.formula import Assignment, CnfFormula, Key, SolutionSet


@dataclass(frozen=True)
class XorConstraint:
    """``XOR(vars) == parity``.  An empty constraint with parity True is unsatisfiable."""

    vars: frozenset[int]
    parity: bool

    def __init__(self, vars: Iterable[int], parity: bool | int):
        object.__setattr__(self, "vars", frozenset(vars))
        object.__setattr__(self, "parity", bool(parity))

    def satisfied_by(self, sigma) -> bool:
        return (sum(sigma[v] for v in self.vars) % 2 == 1) == self.parity


class Status(enum.Enum):
    UNSAT = _cdcl.UNSAT
    SAT = _cdcl.SAT
    UNKNOWN = _cdcl.UNKNOWN


@dataclass(frozen=True)
class SolveResult:
    status: Status
    witness: Assignment | None = None

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT


def _parity_clauses(vs: Sequence[int], parity: bool) -> list[tuple[int, ...]]:
    # one clause per assignment of the wrong parity, excluding it
    out = []
    for bits in itertools.product((0, 1), repeat=len(vs)):
        if (sum(bits) % 2 == 1) != parity:
            out.append(tuple(-v if b else v for v, b in zip(vs, bits)))
    return out


def encode_xor(x: XorConstraint, fresh_start: int) -> tuple[list[tuple[int, ...]], list[int]]:
    """CNF encoding of ``x``; auxiliaries are numbered from ``fresh_start`` upward.

    Returns (clauses, auxiliary variables).
    """
    vs = sorted(x.vars)
    if not vs:
        return ([()] if x.parity else []), []
    if len(vs) <= 3:
        return _parity_clauses(vs, x.parity), []
    clauses: list[tuple[int, ...]] = []
    aux: list[int] = []
    # t1 = v0 ^ v1, t_{j+1} = t_j ^ v_{j+1}, last piece carries the parity
    acc = vs[0]
    rest = vs[1:]
    nxt = fresh_start
    while len(rest) > 2:
        t = nxt
        nxt += 1
        aux.append(t)
        clauses += _parity_clauses([acc, rest[0], t], False)
        acc = t
        rest = rest[1:]
    clauses += _parity_clauses([acc, *rest], x.parity)
    return clauses, aux


def encode_all(f: CnfFormula, xors: Sequence[XorConstraint]) -> tuple[list[tuple[int, ...]], int]:
    """XOR clauses for ``xors`` over ``f``; returns (extra clauses, total variable count)."""
    extra: list[tuple[int, ...]] = []
    top = f.num_vars
    for x in xors:
        cls, aux = encode_xor(x, top + 1)
        extra += cls
        top += len(aux)
    return extra, top


def _xor_arrays(xors: Sequence[XorConstraint]):
    vs: list[int] = []
    starts = [0]
    for x in xors:
        vs.extend(sorted(v - 1 for v in x.vars))
        starts.append(len(vs))
    return (
        np.asarray(vs, dtype=np.int64),
        np.asarray(starts, dtype=np.int64),
        np.asarray([x.parity for x in xors], dtype=np.int64),
    )


def _run(f: CnfFormula, xors, proj: Sequence[int], cutoff: int, assumptions=(), budget: int = 0):
    base_lits, base_starts = f.flat
    if xors:
        xl, xs, nvars = _cdcl.encode_xors(*_xor_arrays(xors), f.num_vars)
        lits = np.concatenate([base_lits, xl])
        starts = np.concatenate([base_starts, xs[1:] + base_lits.shape[0]])
    else:
        lits, starts, nvars = base_lits, base_starts, f.num_vars
    pv = np.asarray([v - 1 for v in proj], dtype=np.int64)
    av = np.asarray([_cdcl.encode_lit(l) for l in assumptions], dtype=np.int32)
    status, models, _ = _cdcl.enumerate_models(nvars, lits, starts, pv, cutoff, av, budget)
    return status, models


def solve(
    f: CnfFormula,
    xors: Sequence[XorConstraint] = (),
    assumptions: Sequence[int] = (),
    conflict_budget: int = 0,
) -> SolveResult:
    """Decide ``f`` with ``xors`` under literal ``assumptions``.

    ``conflict_budget`` > 0 bounds the search; UNKNOWN is returned when it runs out.
    """
    status, models = _run(f, xors, (), 1, assumptions, conflict_budget)
    if len(models):
        row = models[0]
        return SolveResult(Status.SAT, {v: bool(row[v - 1]) for v in f.variables})
    return SolveResult(Status(int(status)) if status == _cdcl.UNKNOWN else Status.UNSAT)


def bounded_enumerate(
    f: CnfFormula, xors: Sequence[XorConstraint], s: Iterable[int], cutoff: int
) -> SolutionSet:
    """Up to ``cutoff`` distinct projections onto ``s`` of models of ``f`` and ``xors``.

    Fewer than ``cutoff`` results means the set is exactly the projected solution set.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    s = sorted(set(s))
    bad = [v for v in s if not 1 <= v <= f.num_vars]
    if bad:
        raise ValueError(f"projection set not within the support: {bad[:10]}")
    _, models = _run(f, xors, s, cutoff)
    idx = np.asarray([v - 1 for v in s], dtype=np.int64)
    keys = [tuple(v if b else -v for v, b in zip(s, row[idx])) for row in models]
    return SolutionSet(tuple(keys), tuple(s))


def count_cell(f: CnfFormula, xors: Sequence[XorConstraint], s: Sequence[int], cutoff: int) -> int:
    """``len(bounded_enumerate(...))`` without building the keys."""
    _, models = _run(f, xors, s, cutoff)
    return len(models)


def extend(f: CnfFormula, key: Key) -> Assignment:
    """Full witness of ``f`` agreeing with the projected witness ``key``."""
    res = solve(f, assumptions=key)
    if not res.sat:
        raise ValueError(f"projection {key} does not extend to a model")
    return res.witness
