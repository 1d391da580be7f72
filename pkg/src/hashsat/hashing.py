"""The H_xor(n, m) family: random affine GF(2) maps {0,1}^n -> {0,1}^m.

Row i of a hash is a Python int used as a bit vector: bit 0 is the offset
a[i][0], bit k (1 <= k <= n) is the coefficient of input bit y[k].
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from hashsat.solver import XorConstraint


@dataclass(frozen=True)
class XorHash:
    n: int
    m: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.n < 0 or self.m < 0 or len(self.rows) != self.m:
            raise ValueError("inconsistent hash dimensions")
        limit = 1 << (self.n + 1)
        if any(not 0 <= r < limit for r in self.rows):
            raise ValueError("row has bits beyond column n")

    @classmethod
    def from_matrix(cls, a: Sequence[Sequence[int]], n: int | None = None) -> XorHash:
        """Build from an m x (n+1) 0/1 matrix whose column 0 is the offset."""
        if n is None:
            n = len(a[0]) - 1 if a else 0
        rows = []
        for row in a:
            if len(row) != n + 1 or any(b not in (0, 1) for b in row):
                raise ValueError("matrix rows must be n+1 bits")
            rows.append(sum(int(b) << k for k, b in enumerate(row)))
        return cls(n, len(rows), tuple(rows))

    @property
    def a(self) -> list[list[int]]:
        return [[(r >> k) & 1 for k in range(self.n + 1)] for r in self.rows]

    def density(self) -> float:
        """Mean number of input coefficients set per row."""
        if not self.m:
            return 0.0
        return sum((r >> 1).bit_count() for r in self.rows) / self.m


def draw_hash(n: int, m: int, rng: np.random.Generator) -> XorHash:
    if n < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    bits = rng.integers(0, 2, size=(m, n + 1), dtype=np.uint8)
    return XorHash.from_matrix(bits.tolist(), n)


def draw_target(m: int, rng: np.random.Generator) -> tuple[int, ...]:
    return tuple(int(b) for b in rng.integers(0, 2, size=m, dtype=np.uint8))


def _pack(y: Sequence[int]) -> int:
    # input bit y[k] (1-based k) lands on bit k
    out = 0
    for k, b in enumerate(y, start=1):
        if b:
            out |= 1 << k
    return out


def apply_hash(h: XorHash, y: Sequence[int]) -> tuple[int, ...]:
    if len(y) != h.n:
        raise ValueError(f"input has length {len(y)}, hash expects {h.n}")
    word = _pack(y) | 1
    return tuple((r & word).bit_count() & 1 for r in h.rows)


def hash_to_constraints(h: XorHash, alpha: Sequence[int], s: Sequence[int]) -> list[XorConstraint]:
    """XOR constraints over ``s`` that hold exactly when h(sigma|s) == alpha."""
    if len(s) != h.n:
        raise ValueError(f"{len(s)} variables given, hash expects {h.n}")
    if len(alpha) != h.m:
        raise ValueError(f"target has length {len(alpha)}, hash expects {h.m}")
    out = []
    for r, target in zip(h.rows, alpha):
        vs = [s[k - 1] for k in range(1, h.n + 1) if (r >> k) & 1]
        out.append(XorConstraint(vs, bool(target) ^ bool(r & 1)))
    return out
