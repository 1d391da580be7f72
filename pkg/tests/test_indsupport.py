import itertools
import random

import pytest

from corpus import planted_dependencies, sat_corpus
from hashsat.formula import CnfFormula, brute_force_models, evaluate, to_key
from hashsat.indsupport import (
    NotIndependent,
    independence_query,
    is_independent_support,
    minimize_support,
    occurrence_order,
)
from hashsat.oracle import exact_count

IFF = CnfFormula(2, [(1, -2), (-1, 2)])


def brute_independent(f, support):
    seen = {}
    for m in brute_force_models(f):
        key = to_key(m, support)
        if seen.setdefault(key, m) != m:
            return False
    return True


def test_iff_singletons_are_supports():
    assert is_independent_support(IFF, {1}).independent
    assert is_independent_support(IFF, {2}).independent


def test_iff_empty_set_has_witness_pair():
    cert = is_independent_support(IFF, set())
    assert not cert.independent and not cert.unknown
    pair = {tuple(sorted(w.items())) for w in cert.witness_pair}
    assert pair == {((1, False), (2, False)), ((1, True), (2, True))}


def test_full_support_is_independent():
    f = CnfFormula(3, [(1, 2, 3)])
    assert is_independent_support(f, {1, 2, 3}).independent
    with pytest.raises(ValueError):
        is_independent_support(f, {4})


def test_minimize_iff_depends_on_order():
    assert minimize_support(IFF, {1, 2}, order=[1, 2]) == (2,)
    assert minimize_support(IFF, {1, 2}, order=[2, 1]) == (1,)
    assert minimize_support(IFF) in ((1,), (2,))


def test_single_free_var_cannot_shrink():
    assert minimize_support(CnfFormula(1, []), {1}) == (1,)


def test_tseitin_outputs_removed():
    # inputs 1..5; 6 = 1 and 2, 7 = 3 or 4, 8 = 6 xor 5
    clauses = [(-6, 1), (-6, 2), (6, -1, -2), (7, -3), (7, -4), (-7, 3, 4)]
    clauses += [(-8, 6, 5), (-8, -6, -5), (8, -6, 5), (8, 6, -5)]
    f = CnfFormula(8, clauses)
    got = minimize_support(f, range(1, 9), order=[6, 7, 8, 1, 2, 3, 4, 5])
    assert got == (1, 2, 3, 4, 5)
    assert brute_independent(f, got)
    for v in got:
        assert not brute_independent(f, set(got) - {v})


def test_not_independent_initial_set():
    with pytest.raises(NotIndependent):
        minimize_support(IFF, set())


def test_query_layout():
    q = independence_query(IFF, {1})
    # 2 original + 2 copy + 1 flag for variable 2
    assert q.num_vars == 5
    assert q.clauses[-1] == (5,)


def test_certificates_agree_with_brute_force():
    rng = random.Random(7)
    for f in sat_corpus(25, seed=13, n_range=(4, 8)):
        for _ in range(4):
            support = set(rng.sample(list(f.variables), rng.randint(0, f.num_vars)))
            cert = is_independent_support(f, support)
            assert cert.independent == brute_independent(f, support)
            if not cert.independent:
                a, b = cert.witness_pair
                assert evaluate(f, a) and evaluate(f, b) and a != b
                assert all(a[v] == b[v] for v in support)


def test_minimize_on_planted_corpus():
    rng = random.Random(99)
    for _ in range(10):
        f = planted_dependencies(rng, rng.randint(3, 6), rng.randint(2, 5))
        got = minimize_support(f)
        assert brute_independent(f, got)
        for v in got:
            assert not brute_independent(f, set(got) - {v})
        assert exact_count(f, got) == exact_count(f)


def test_conflict_budget_keeps_an_independent_support():
    f = planted_dependencies(random.Random(1), 6, 6)
    got = minimize_support(f, conflict_budget=1)
    assert brute_independent(f, got)


def test_occurrence_order():
    f = CnfFormula(3, [(1, 2), (2, 3), (2,), (3, -1), (3,)])
    assert occurrence_order(f, {1, 2, 3}) == [2, 3, 1]


def test_support_count_matches_projection_everywhere():
    for f in sat_corpus(10, seed=21, n_range=(5, 9)):
        support = minimize_support(f)
        for k in range(len(support) + 1):
            for sub in itertools.combinations(support, k):
                if brute_independent(f, sub):
                    assert exact_count(f, sub) == exact_count(f)
