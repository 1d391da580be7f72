"""CNF data model, DIMACS I/O and assignment helpers.

Variables are positive ints (1-based), literals are signed ints, as in DIMACS.
An assignment (witness) is a ``dict[int, bool]``.  Projected witnesses that need
to be hashable (set members, histogram keys) are stored as sorted tuples of
signed literals, e.g. ``(1, -2, 3)``.
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

Assignment = dict[int, bool]
Key = tuple[int, ...]

_IND_RE = re.compile(r"^c\s+ind\s")
_WEIGHT_RE = re.compile(r"^c\s+p\s+weight\s")


class DimacsError(ValueError):
    """Malformed DIMACS input.  ``line`` is 1-based (0 when not line-specific)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True, eq=False)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...] = ()
    sampling_set: frozenset[int] | None = None
    comments: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        if self.sampling_set is not None:
            object.__setattr__(self, "sampling_set", frozenset(self.sampling_set))
        object.__setattr__(self, "comments", tuple(self.comments))
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")
        if self.sampling_set is not None:
            bad = [v for v in self.sampling_set if not 1 <= v <= self.num_vars]
            if bad:
                raise ValueError(f"sampling set variables out of range: {sorted(bad)}")

    @property
    def variables(self) -> range:
        return range(1, self.num_vars + 1)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.variables)

    def projection_set(self) -> tuple[int, ...]:
        """Sampling set if annotated, else the full support (sorted)."""
        if self.sampling_set is not None:
            return tuple(sorted(self.sampling_set))
        return tuple(self.variables)

    def with_sampling_set(self, s: Iterable[int] | None) -> CnfFormula:
        return CnfFormula(self.num_vars, self.clauses, None if s is None else frozenset(s), self.comments)

    def weight_lines(self) -> list[str]:
        return [c for c in self.comments if _WEIGHT_RE.match(c)]

    @cached_property
    def flat(self):
        """(literals, starts) numpy arrays in solver encoding; built once per formula."""
        from hashsat._cdcl import flatten

        return flatten(self.clauses)

    def _key(self):
        return (self.num_vars, self.clauses, self.sampling_set, tuple(sorted(self.comments)))

    def __eq__(self, other):
        if not isinstance(other, CnfFormula):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"CnfFormula(num_vars={self.num_vars}, clauses={len(self.clauses)}, sampling_set={self.sampling_set})"


def parse_dimacs(text: str | bytes) -> CnfFormula:
    if isinstance(text, bytes):
        text = text.decode()
    num_vars = num_clauses = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    sampling: set[int] | None = None
    comments: list[str] = []
    last_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        last_line = lineno
        if line.startswith("c"):
            if _IND_RE.match(line):
                toks = line.split()[2:]
                try:
                    nums = [int(t) for t in toks]
                except ValueError:
                    raise DimacsError(f"bad sampling-set line {line!r}", lineno) from None
                if not nums or nums[-1] != 0:
                    raise DimacsError("sampling-set line not 0-terminated", lineno)
                sampling = (sampling or set()) | set(nums[:-1])
                if num_vars is not None:
                    _check_vars(nums[:-1], num_vars, lineno)
            else:
                comments.append(line)
            continue
        if line.startswith("p"):
            parts = line.split()
            if num_vars is not None:
                raise DimacsError("duplicate header", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError(f"malformed header {line!r}", lineno)
            if sampling:
                _check_vars(sampling, num_vars, lineno)
            continue
        if num_vars is None:
            raise DimacsError("clause before header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > num_vars:
                raise DimacsError(f"literal {lit} exceeds declared {num_vars} variables", lineno)
            else:
                current.append(lit)

    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("last clause not 0-terminated", last_line)
    if len(clauses) != num_clauses:
        raise DimacsError(f"header declares {num_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, tuple(clauses), None if sampling is None else frozenset(sampling), tuple(comments))


def _check_vars(vs, num_vars, lineno):
    for v in vs:
        if not 1 <= v <= num_vars:
            raise DimacsError(f"sampling-set variable {v} out of range 1..{num_vars}", lineno)


def emit_dimacs(f: CnfFormula) -> str:
    out = [f"p cnf {f.num_vars} {len(f.clauses)}"]
    if f.sampling_set is not None:
        out.append("c ind " + " ".join(str(v) for v in sorted(f.sampling_set)) + (" 0" if f.sampling_set else "0"))
    out.extend(f.comments)
    out.extend(" ".join(map(str, c)) + (" 0" if c else "0") for c in f.clauses)
    return "\n".join(out) + "\n"


def evaluate(f: CnfFormula, sigma: Mapping[int, bool]) -> bool:
    missing = [v for v in f.variables if v not in sigma]
    if missing:
        raise KeyError(f"assignment misses variables {missing[:10]}")
    return all(any(sigma[abs(l)] == (l > 0) for l in clause) for clause in f.clauses)


def project(sigma: Mapping[int, bool], s: Iterable[int]) -> Assignment:
    s = list(s)
    missing = [v for v in s if v not in sigma]
    if missing:
        raise KeyError(f"projection set not within the assignment's support: {missing[:10]}")
    return {v: sigma[v] for v in s}


def to_key(sigma: Mapping[int, bool], s: Iterable[int] | None = None) -> Key:
    vs = sorted(sigma) if s is None else sorted(s)
    return tuple(v if sigma[v] else -v for v in vs)


def from_key(key: Iterable[int]) -> Assignment:
    return {abs(l): l > 0 for l in key}


@dataclass(frozen=True)
class SolutionSet:
    """Distinct (projected) witnesses, as literal tuples, in discovery order."""

    witnesses: tuple[Key, ...]
    projected_onto: tuple[int, ...] | None = None
    _index: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        idx = frozenset(self.witnesses)
        if len(idx) != len(self.witnesses):
            raise ValueError("duplicate witnesses in solution set")
        object.__setattr__(self, "_index", idx)

    def __len__(self):
        return len(self.witnesses)

    def __iter__(self):
        return iter(self.witnesses)

    def __contains__(self, key):
        return tuple(key) in self._index


def brute_force_models(f: CnfFormula) -> list[Assignment]:
    """Every model of ``f`` by plain enumeration; for tests and tiny inputs only."""
    n = f.num_vars
    out = []
    for bits in itertools.product((False, True), repeat=n):
        sigma = dict(zip(range(1, n + 1), bits))
        if evaluate(f, sigma):
            out.append(sigma)
    return out


def literals_line(key: Sequence[int]) -> str:
    return " ".join(map(str, key)) + " 0" if key else "0"
