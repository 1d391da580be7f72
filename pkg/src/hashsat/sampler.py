"""Almost-uniform witness sampling over random XOR cells.

``single`` mode keeps one uniformly chosen solution per accepted cell, so
samples are independent.  ``multi`` mode keeps ``lo_thresh`` distinct
solutions per accepted cell, trading independence for fewer solver calls.

Preprocessing (one coarse approximate count to centre the window of hash
sizes) runs once; sampling rounds are independent given their rng, which is
what :func:`parallel_sample` distributes across processes.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from hashsat.counter import _resolve_set, approx_count
from hashsat.formula import Assignment, CnfFormula, Key
from hashsat.hashing import draw_hash, draw_target, hash_to_constraints
from hashsat.solver import bounded_enumerate, extend

# epsilon(kappa) = (1 + kappa)(7.44 + 0.392 / (1 - kappa)^2) - 1 tends to 6.832 as kappa -> 0
EPS_MIN = 6.84
DEFAULT_EPSILON = 16.0
PRE_EPSILON = 0.8
PRE_DELTA = 0.2
FAILURE_BUDGET = 10

MODES = ("single", "multi")


class Unsatisfiable(ValueError):
    pass


class FailureBudgetExhausted(RuntimeError):
    def __init__(self, diagnostics: list[tuple[int, int]], collected: int):
        self.diagnostics = diagnostics
        self.collected = collected
        super().__init__(
            f"{FAILURE_BUDGET} consecutive rounds found no cell in range "
            f"({collected} samples collected; last cells {diagnostics[-8:]})"
        )


@dataclass(frozen=True)
class SamplerParams:
    epsilon: float
    kappa: float
    pivot: int
    lo_thresh: int
    hi_thresh: int
    search_window: tuple[int, ...] = ()


def epsilon_for_kappa(kappa: float) -> float:
    return (1 + kappa) * (7.44 + 0.392 / (1 - kappa) ** 2) - 1


def sampler_params(epsilon: float = DEFAULT_EPSILON, kappa: float | None = None) -> SamplerParams:
    """Cell thresholds for tolerance ``epsilon`` (or directly for ``kappa`` when given)."""
    if kappa is None:
        if not epsilon >= EPS_MIN:
            raise ValueError(f"epsilon must be at least {EPS_MIN}")
        kappa = brentq(lambda k: epsilon_for_kappa(k) - epsilon, 1e-12, 1 - 1e-12, xtol=1e-14)
    elif not 0 < kappa < 1:
        raise ValueError("kappa must lie in (0, 1)")
    else:
        epsilon = epsilon_for_kappa(kappa)
    pivot = math.ceil(4.03 * (1 + 1 / kappa) ** 2)
    hi = math.ceil(1 + math.sqrt(2) * (1 + kappa) * pivot)
    lo = max(1, math.floor(pivot / (math.sqrt(2) * (1 + kappa))))
    return SamplerParams(epsilon, kappa, pivot, lo, hi)


@dataclass
class SampleBatch:
    witnesses: list[Key] = field(default_factory=list)
    cells: list[tuple[int, int]] = field(default_factory=list)  # (m, cell size) per attempt
    failed: int = 0
    exact: bool = False
    overshoot: int = 0
    mode: str = "single"
    params: SamplerParams | None = None

    def full_witnesses(self, f: CnfFormula) -> list[Assignment]:
        return [extend(f, w) for w in self.witnesses]

    def to_dict(self) -> dict:
        return {
            "samples": len(self.witnesses),
            "mode": self.mode,
            "exact_fallback": self.exact,
            "failed_rounds": self.failed,
            "overshoot": self.overshoot,
            "cells": [list(c) for c in self.cells],
            "lo_thresh": self.params.lo_thresh if self.params else None,
            "hi_thresh": self.params.hi_thresh if self.params else None,
            "window": list(self.params.search_window) if self.params else [],
        }


@dataclass(frozen=True)
class Prepared:
    """Result of the sequential preprocessing step."""

    sampling_set: tuple[int, ...]
    params: SamplerParams
    solutions: tuple[Key, ...] | None  # set when the whole projected space was enumerated
    estimate: int | None = None


def _window(estimate: int, params: SamplerParams, n: int) -> tuple[int, ...]:
    target = math.sqrt(params.lo_thresh * params.hi_thresh)
    q = math.ceil(math.log2(estimate) - math.log2(target))
    out: list[int] = []
    for m in (q, q - 1, q + 1, q + 2):
        m = min(max(m, 0), max(n - 1, 0))
        if m not in out:
            out.append(m)
    return tuple(out)


def prepare(
    f: CnfFormula,
    s: Iterable[int] | None,
    epsilon: float,
    rng: np.random.Generator,
    params: SamplerParams | None = None,
) -> Prepared:
    s = _resolve_set(f, s)
    params = params or sampler_params(epsilon)
    first = bounded_enumerate(f, (), s, params.hi_thresh + 1)
    if not len(first):
        raise Unsatisfiable("formula has no solutions")
    if len(first) <= params.hi_thresh:
        return Prepared(s, params, first.witnesses, len(first))
    est = approx_count(f, s, PRE_EPSILON, PRE_DELTA, rng).value
    win = _window(est, params, len(s))
    params = SamplerParams(params.epsilon, params.kappa, params.pivot, params.lo_thresh, params.hi_thresh, win)
    return Prepared(s, params, None, est)


def _round(f, s, m, params, rng, mode) -> tuple[list[Key] | None, int]:
    h = draw_hash(len(s), m, rng)
    alpha = draw_target(m, rng)
    cell = bounded_enumerate(f, hash_to_constraints(h, alpha, s), s, params.hi_thresh + 1)
    size = len(cell)
    if not params.lo_thresh <= size <= params.hi_thresh:
        return None, size
    if mode == "single":
        return [cell.witnesses[int(rng.integers(size))]], size
    picks = rng.choice(size, params.lo_thresh, replace=False)
    return [cell.witnesses[int(i)] for i in picks], size


def sample_round(
    f: CnfFormula,
    s: Sequence[int],
    m: int,
    params: SamplerParams,
    rng: np.random.Generator,
    mode: str = "single",
) -> list[Key] | None:
    """Sample from one random cell of 2^-m of the space; ``None`` if its size is out of range."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    return _round(f, tuple(s), m, params, rng, mode)[0]


def unigen_sample(
    f: CnfFormula,
    s: Iterable[int] | None = None,
    epsilon: float = DEFAULT_EPSILON,
    num_samples: int = 1,
    rng: np.random.Generator | None = None,
    mode: str = "single",
    prepared: Prepared | None = None,
) -> SampleBatch:
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    rng = rng if rng is not None else np.random.default_rng()
    prep = prepared or prepare(f, s, epsilon, rng)
    return _collect(f, prep, num_samples, rng, mode)


def _collect(f: CnfFormula, prep: Prepared, num_samples: int, rng: np.random.Generator, mode: str) -> SampleBatch:
    batch = SampleBatch(mode=mode, params=prep.params)
    if prep.solutions is not None:
        batch.exact = True
        idx = rng.integers(len(prep.solutions), size=num_samples)
        batch.witnesses = [prep.solutions[int(i)] for i in idx]
        return batch
    streak = 0
    while len(batch.witnesses) < num_samples:
        got = None
        for m in prep.params.search_window:
            got, size = _round(f, prep.sampling_set, m, prep.params, rng, mode)
            batch.cells.append((m, size))
            if got is not None:
                break
        if got is None:
            batch.failed += 1
            streak += 1
            if streak >= FAILURE_BUDGET:
                raise FailureBudgetExhausted(batch.cells, len(batch.witnesses))
            continue
        streak = 0
        batch.witnesses.extend(got)
    batch.overshoot = len(batch.witnesses) - num_samples
    return batch


def stream_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Seed of sampling stream ``index``; numpy's SeedSequence hashes (master, index)."""
    return np.random.SeedSequence(master_seed, spawn_key=(index,))


def preprocessing_seed(master_seed: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed)


def split_quota(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (i < extra) for i in range(parts)]


def _stream_job(args) -> SampleBatch:
    f, prep, quota, master_seed, index, mode = args
    return _collect(f, prep, quota, np.random.default_rng(stream_seed(master_seed, index)), mode)


def parallel_sample(
    f: CnfFormula,
    s: Iterable[int] | None = None,
    epsilon: float = DEFAULT_EPSILON,
    num_samples: int = 1,
    workers: int = 1,
    master_seed: int = 0,
    mode: str = "single",
    streams: int | None = None,
) -> SampleBatch:
    """Sample with ``streams`` independent seeded streams spread over ``workers`` processes.

    ``streams`` defaults to ``workers``.  For fixed (master_seed, streams) the
    output is identical whatever the number of workers.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    streams = streams or workers
    prep = prepare(f, s, epsilon, np.random.default_rng(preprocessing_seed(master_seed)))
    jobs = [(f, prep, q, master_seed, i, mode) for i, q in enumerate(split_quota(num_samples, streams)) if q]
    if workers == 1:
        parts = [_stream_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_stream_job, jobs))
    merged = SampleBatch(mode=mode, params=prep.params, exact=prep.solutions is not None)
    for part in parts:
        merged.witnesses.extend(part.witnesses)
        merged.cells.extend(part.cells)
        merged.failed += part.failed
        merged.overshoot += part.overshoot
    return merged
