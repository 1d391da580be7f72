import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hashsat.formula import (
    CnfFormula,
    DimacsError,
    SolutionSet,
    brute_force_models,
    emit_dimacs,
    evaluate,
    from_key,
    parse_dimacs,
    project,
    to_key,
)


@st.composite
def formulas(draw, max_vars=6):
    n = draw(st.integers(0, max_vars))
    if n == 0:
        return CnfFormula(0, [])
    lit = st.integers(1, n).flatmap(lambda v: st.sampled_from((v, -v)))
    clauses = draw(st.lists(st.lists(lit, min_size=1, max_size=4), max_size=8))
    s = draw(st.none() | st.frozensets(st.integers(1, n)))
    return CnfFormula(n, [tuple(c) for c in clauses], s)


def test_parse_single_clause():
    f = parse_dimacs("p cnf 2 1\n1 -2 0\n")
    assert f.num_vars == 2
    assert f.clauses == ((1, -2),)
    assert f.sampling_set is None


def test_parse_sampling_set():
    f = parse_dimacs("p cnf 3 1\nc ind 1 2 0\n3 0\n")
    assert f.sampling_set == {1, 2}
    assert f.clauses == ((3,),)


def test_parse_contradiction_is_unsat():
    f = parse_dimacs(b"p cnf 1 2\n1 0\n-1 0\n")
    assert f.clauses == ((1,), (-1,))
    assert brute_force_models(f) == []


def test_parse_multiple_ind_lines_union():
    f = parse_dimacs("p cnf 4 0\nc ind 1 0\nc ind 3 4 0\n")
    assert f.sampling_set == {1, 3, 4}


def test_parse_clause_spanning_lines_and_comments_kept():
    f = parse_dimacs("c hello\np cnf 3 2\n1 2\n3 0 -1 0\nc p weight 1 0.5 0\n")
    assert f.clauses == ((1, 2, 3), (-1,))
    assert f.comments == ("c hello", "c p weight 1 0.5 0")
    assert f.weight_lines() == ["c p weight 1 0.5 0"]


@pytest.mark.parametrize(
    "text, line",
    [
        ("1 2 0\n", 1),
        ("p cnf 2 1\n1 3 0\n", 2),
        ("p cnf 2 1\n1 x 0\n", 2),
        ("p cnf 2 1\n1 2\n", 2),
        ("p cnf 2\n", 1),
        ("p cnf 2 1\np cnf 2 1\n", 2),
        ("p cnf 2 1\nc ind 5 0\n1 0\n", 2),
        ("p cnf 2 1\nc ind 1\n1 0\n", 2),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(DimacsError) as err:
        parse_dimacs(text)
    assert err.value.line == line


def test_parse_clause_count_mismatch():
    with pytest.raises(DimacsError):
        parse_dimacs("p cnf 2 2\n1 0\n")
    with pytest.raises(DimacsError):
        parse_dimacs("")


def test_emit_examples():
    assert emit_dimacs(CnfFormula(2, [(1, -2)])) == "p cnf 2 1\n1 -2 0\n"
    assert emit_dimacs(CnfFormula(0, [])) == "p cnf 0 0\n"
    assert "c ind 1 2 0" in emit_dimacs(CnfFormula(3, [(3,)], {1, 2}))


@given(formulas())
def test_round_trip(f):
    assert parse_dimacs(emit_dimacs(f)) == f


def test_constructor_validates():
    with pytest.raises(ValueError):
        CnfFormula(2, [(3,)])
    with pytest.raises(ValueError):
        CnfFormula(2, [(0,)])
    with pytest.raises(ValueError):
        CnfFormula(2, [], {4})


def test_evaluate_examples():
    f = CnfFormula(2, [(1, -2)])
    assert evaluate(f, {1: False, 2: False})
    assert not evaluate(CnfFormula(1, [(1,), (-1,)]), {1: True})
    assert evaluate(CnfFormula(2, [(1, -2), (-1, 2)]), {1: True, 2: True})
    with pytest.raises(KeyError):
        evaluate(f, {1: True})


@given(formulas())
@settings(max_examples=50)
def test_evaluate_matches_clause_semantics(f):
    for bits in itertools.product((False, True), repeat=f.num_vars):
        sigma = dict(zip(f.variables, bits))
        expected = all(any((l > 0) == sigma[abs(l)] for l in c) for c in f.clauses)
        assert evaluate(f, sigma) == expected


def test_project_examples():
    sigma = {1: True, 2: False, 3: True}
    assert project(sigma, {1, 3}) == {1: True, 3: True}
    assert project(sigma, sigma) == sigma
    assert project(sigma, ()) == {}
    with pytest.raises(KeyError):
        project(sigma, {4})


def test_keys_round_trip():
    sigma = {3: True, 1: False, 2: True}
    assert to_key(sigma) == (-1, 2, 3)
    assert to_key(sigma, [3, 1]) == (-1, 3)
    assert from_key((-1, 2, 3)) == sigma


def test_solution_set_rejects_duplicates():
    s = SolutionSet(((1, 2), (-1, 2)))
    assert len(s) == 2 and (1, 2) in s and (1, -2) not in s
    with pytest.raises(ValueError):
        SolutionSet(((1,), (1,)))
