from __future__ import annotations

from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpcause.errors import MissingVariableError
from hpcause.formula import (
    FALSE,
    TRUE,
    And,
    Const,
    Event,
    Iff,
    Not,
    Or,
    Var,
    all_sat,
    compile_formula,
    evaluate,
    literal_of,
    phi_to_formula,
    simplify,
    solve,
    to_cnf,
    to_dimacs,
    variables,
)

A, B, C = Var("A"), Var("B"), Var("C")
NAMES = ("A", "B", "C", "D")


def formulas(max_leaves=12):
    leaves = st.one_of(
        st.sampled_from([Var(n) for n in NAMES]),
        st.sampled_from([TRUE, FALSE]),
        st.builds(Event, st.sampled_from(NAMES), st.booleans()),
    )

    def extend(children):
        return st.one_of(
            st.builds(Not, children),
            st.builds(lambda xs: And(tuple(xs)), st.lists(children, min_size=1, max_size=3)),
            st.builds(lambda xs: Or(tuple(xs)), st.lists(children, min_size=1, max_size=3)),
            st.builds(Iff, children, children),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def truth_table(f):
    names = sorted(variables(f))
    return {
        tuple(bits)
        for bits in product((False, True), repeat=len(names))
        if evaluate(f, dict(zip(names, bits)))
    }, names


# --- literal_of / evaluate / phi_to_formula ---------------------------------------

def test_literal_of():
    assert literal_of("BS", True) == Var("BS")
    assert literal_of("BH", False) == Not(Var("BH"))
    for b in (False, True):
        assert evaluate(literal_of("A", b), {"A": b})


def test_evaluate_examples():
    sh, bh, bt = Var("SH"), Var("BH"), Var("BT")
    assert evaluate(Or((sh, bh)), {"SH": True, "BH": False})
    assert evaluate(Iff(bh, And((bt, Not(sh)))), {"BH": False, "BT": True, "SH": True})
    for a in (False, True):
        assert not evaluate(And((Not(A), A)), {"A": a})


def test_evaluate_missing_variable():
    with pytest.raises(MissingVariableError) as info:
        evaluate(And((A, B)), {"A": True})
    assert info.value.name == "B"


def test_operator_sugar():
    assert (A & B) == And((A, B))
    assert (A | B) == Or((A, B))
    assert ~A == Not(A)


def test_nodes_validate_arity_and_names():
    with pytest.raises((TypeError, ValueError)):
        And(())
    with pytest.raises((TypeError, ValueError)):
        Var("not a name")


def test_phi_to_formula():
    phi = And((Event("BS", True), Event("BH", False)))
    assert phi_to_formula(phi) == And((Var("BS"), Not(Var("BH"))))
    assert phi_to_formula(Event("X", True)) == Var("X")
    assert phi_to_formula(Or((Event("X", False), Event("Y", True)))) == Or((Not(Var("X")), Var("Y")))


@given(formulas(), st.fixed_dictionaries({n: st.booleans() for n in NAMES}))
def test_compiled_matches_tree_walk(f, a):
    assert compile_formula(f)(a) == evaluate(f, a)


@given(formulas(), st.fixed_dictionaries({n: st.booleans() for n in NAMES}))
def test_simplify_preserves_meaning(f, a):
    assert evaluate(simplify(f), a) == evaluate(f, a)


def test_variables_counts_events():
    assert variables(And((A, Event("B", False), Not(C)))) == {"A", "B", "C"}


# --- CNF, solve, all_sat -----------------------------------------------------------

def test_cnf_of_constants():
    t = to_cnf(TRUE)
    assert t.clauses == [] and solve(t) == {}
    f = to_cnf(FALSE)
    assert f.has_empty_clause and solve(f) is None
    assert list(all_sat(f)) == []


def test_iff_models():
    models = {(m["A"], m["B"]) for m in all_sat(to_cnf(Iff(A, B)))}
    assert models == {(False, False), (True, True)}


def test_or_models():
    models = [m for m in all_sat(to_cnf(Or((A, B))))]
    assert len(models) == 3
    assert {(m["A"], m["B"]) for m in models} == {(True, False), (False, True), (True, True)}


def test_solve_trivial():
    assert solve(to_cnf(And((A, Not(A))))) is None
    assert solve(to_cnf(A)) == {"A": True}


def test_original_vars_match_formula_vars():
    f = Or((And((A, B)), Not(C)))
    c = to_cnf(f)
    assert set(c.original_vars) == {"A", "B", "C"}
    assert c.num_vars >= 3


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_cnf_projection_is_exact(f):
    table, names = truth_table(f)
    c = to_cnf(f)
    assert set(c.original_vars) == set(names)
    got = [tuple(m[n] for n in names) for m in all_sat(c)]
    assert len(got) == len(set(got)), "duplicate projected model"
    assert set(got) == table
    found = solve(c)
    assert (found is not None) == bool(table)
    if found is not None:
        assert evaluate(f, found)


def test_deep_formula_does_not_recurse():
    f = A
    for i in range(5000):
        f = Or((And((f, Var(f"X{i}"))), Var(f"Y{i}"))) if i % 2 else And((f, Not(Var(f"X{i}"))))
    c = to_cnf(f)
    assert solve(c) is not None


def test_all_sat_expands_unconstrained_variables():
    # B only appears inside a tautology, so it is free
    f = And((A, Or((B, Not(B)))))
    models = list(all_sat(to_cnf(f)))
    assert sorted((m["A"], m["B"]) for m in models) == [(True, False), (True, True)]


def test_dimacs_export():
    c = to_cnf(And((Or((A, Not(B))), B)))
    text = to_dimacs(c)
    lines = text.splitlines()
    assert "c 1 A" in lines and "c 2 B" in lines
    header = next(line for line in lines if line.startswith("p cnf"))
    _, _, nv, nc = header.split()
    assert int(nv) == c.num_vars and int(nc) == len(c.clauses)
    body = [line for line in lines if not line.startswith(("c", "p"))]
    assert all(line.endswith(" 0") for line in body)
    assert len(body) == len(c.clauses)


def test_const_value_is_bool():
    assert Const(1).value is True
