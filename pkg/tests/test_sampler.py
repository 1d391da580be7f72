import math
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from corpus import sat_corpus
from hashsat.formula import CnfFormula, evaluate
from hashsat.oracle import exact_solutions
from hashsat.sampler import (
    EPS_MIN,
    FailureBudgetExhausted,
    SamplerParams,
    Unsatisfiable,
    epsilon_for_kappa,
    parallel_sample,
    prepare,
    preprocessing_seed,
    sample_round,
    sampler_params,
    split_quota,
    stream_seed,
    unigen_sample,
)


def test_params_at_reference_kappa():
    p = sampler_params(kappa=0.638)
    assert 4.03 * (1 + 1 / 0.638) ** 2 == pytest.approx(26.57, abs=0.01)
    assert (p.pivot, p.hi_thresh, p.lo_thresh) == (27, 64, 11)


def test_default_epsilon_thresholds():
    p = sampler_params(16)
    assert epsilon_for_kappa(p.kappa) == pytest.approx(16)
    assert p.kappa == pytest.approx(0.6357, abs=1e-4)
    assert (p.pivot, p.hi_thresh, p.lo_thresh) == (27, 64, 11)


@pytest.mark.parametrize("eps", [EPS_MIN, 7, 8, 10, 16, 20, 50, 200])
def test_hi_exceeds_twice_lo(eps):
    p = sampler_params(eps)
    assert p.hi_thresh > 2 * p.lo_thresh >= 2


def test_epsilon_floor():
    assert epsilon_for_kappa(1e-9) < EPS_MIN
    with pytest.raises(ValueError):
        sampler_params(EPS_MIN - 0.1)
    with pytest.raises(ValueError):
        sampler_params(kappa=1.0)


def _with_solutions(k: int, n: int = 6) -> CnfFormula:
    """Formula over n variables whose models are the integers 0..k-1 (bit i-1 = x_i)."""
    clauses = []
    for y in range(k, 1 << n):
        clauses.append(tuple(-(i + 1) if (y >> i) & 1 else i + 1 for i in range(n)))
    return CnfFormula(n, clauses)


def test_multi_mode_returns_whole_cell_at_lo():
    p = sampler_params(16)
    f = _with_solutions(p.lo_thresh)
    got = sample_round(f, tuple(f.variables), 0, p, np.random.default_rng(0), "multi")
    assert sorted(got) == exact_solutions(f)


def test_round_fails_above_hi():
    p = sampler_params(16)
    f = _with_solutions(p.hi_thresh + 1, n=7)
    assert sample_round(f, tuple(f.variables), 0, p, np.random.default_rng(0)) is None
    with pytest.raises(ValueError):
        sample_round(f, tuple(f.variables), 0, p, np.random.default_rng(0), "both")


def test_round_frequencies_are_uniform():
    # 64 models over 8 variables: x7 = x1 xor x2, x8 = x3
    f = CnfFormula(8, [(-7, 1, 2), (-7, -1, -2), (7, -1, 2), (7, 1, -2), (-8, 3), (8, -3)])
    sols = exact_solutions(f)
    assert len(sols) == 64
    p = sampler_params(16)
    rng = np.random.default_rng(2024)
    counts = Counter()
    for _ in range(1000):
        got = sample_round(f, tuple(f.variables), 1, p, rng)
        if got is not None:
            counts[got[0]] += 1
    total = sum(counts.values())
    assert total > 900
    mean = total / 64
    sigma = math.sqrt(total * (1 / 64) * (63 / 64))
    assert all(abs(counts[s] - mean) <= 3 * sigma for s in sols)


def test_three_solutions_use_exact_fallback():
    f = _with_solutions(3, n=3)
    batch = unigen_sample(f, None, 16, 30_000, np.random.default_rng(5))
    assert batch.exact and batch.cells == []
    freq = Counter(batch.witnesses)
    assert len(freq) == 3
    assert all(abs(c / 30_000 - 1 / 3) <= 0.01 for c in freq.values())


def test_ten_free_vars_almost_uniform():
    eps = 16
    f = CnfFormula(10, [])
    n = 50_000
    batch = unigen_sample(f, None, eps, n, np.random.default_rng(11))
    assert not batch.exact and len(batch.witnesses) == n
    counts = Counter(batch.witnesses)
    assert len(counts) == 1024
    slack = 3 * math.sqrt(n * (1 / 1024)) / n
    lo, hi = 1 / ((1 + eps) * 1024) - slack, (1 + eps) / 1024 + slack
    assert all(lo <= c / n <= hi for c in counts.values())
    assert stats.chisquare(list(counts.values())).pvalue > 0.01


def test_samples_are_solutions_on_corpus():
    for i, f in enumerate(sat_corpus(5, seed=31, n_range=(12, 16), ratio=(1.0, 1.8))):
        sols = set(exact_solutions(f))
        batch = unigen_sample(f, None, 16, 30, np.random.default_rng(i))
        assert set(batch.witnesses) <= sols
        assert all(evaluate(f, full) for full in batch.full_witnesses(f))


def test_multi_mode_overshoot_is_reported():
    f = CnfFormula(9, [])
    batch = unigen_sample(f, None, 16, 25, np.random.default_rng(0), "multi")
    assert len(batch.witnesses) == 25 + batch.overshoot
    assert batch.overshoot >= 0 and len(batch.witnesses) % batch.params.lo_thresh == 0


def test_bad_arguments():
    f = CnfFormula(3, [])
    with pytest.raises(ValueError):
        unigen_sample(f, num_samples=0)
    with pytest.raises(Unsatisfiable):
        unigen_sample(CnfFormula(1, [(1,), (-1,)]), rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        parallel_sample(f, workers=0)


def test_failure_budget():
    f = CnfFormula(10, [])
    prep = prepare(f, None, 16, np.random.default_rng(0))
    # m = 9 leaves cells of 2^10 / 2^9 = 2 solutions, always below lo_thresh
    starved = SamplerParams(16, prep.params.kappa, 27, 11, 64, (9,))
    prep = type(prep)(prep.sampling_set, starved, None, prep.estimate)
    with pytest.raises(FailureBudgetExhausted) as err:
        unigen_sample(f, None, 16, 5, np.random.default_rng(0), prepared=prep)
    assert err.value.collected == 0 and len(err.value.diagnostics) == 10


def test_window_brackets_estimate():
    f = CnfFormula(12, [])
    prep = prepare(f, None, 16, np.random.default_rng(4))
    p = prep.params
    q = p.search_window[0]
    assert p.search_window == (q, q - 1, q + 1, q + 2)
    assert 2 ** (12 - q) <= math.sqrt(p.lo_thresh * p.hi_thresh) * 2


def test_split_quota():
    assert split_quota(10, 4) == [3, 3, 2, 2]
    assert sum(split_quota(7, 3)) == 7


def test_single_worker_matches_seed_schedule():
    f = CnfFormula(10, [])
    par = parallel_sample(f, None, 16, 40, workers=1, master_seed=9)
    prep = prepare(f, None, 16, np.random.default_rng(preprocessing_seed(9)))
    seq = unigen_sample(f, None, 16, 40, np.random.default_rng(stream_seed(9, 0)), prepared=prep)
    assert par.witnesses == seq.witnesses


def test_worker_count_does_not_change_output():
    f = CnfFormula(10, [])
    one = parallel_sample(f, None, 16, 60, workers=1, master_seed=3, streams=4)
    four = parallel_sample(f, None, 16, 60, workers=4, master_seed=3, streams=4)
    assert one.witnesses == four.witnesses
    assert len(one.witnesses) == 60
