from __future__ import annotations

import random
import time
import warnings

import pytest

import oracle
from hpcause.checker import (
    CausalQuery,
    Strategy,
    build_F,
    build_G,
    check_ac1,
    check_ac2_brute,
    check_ac2_sat,
    check_ac2_sat_minimal,
    check_ac3_brute,
    check_ac3_sat,
    check_cause,
    check_combined,
    diagnose_non_minimal,
)
from hpcause.dsl import parse_model, parse_query
from hpcause.errors import BudgetExceeded, CheckTimeout, InvalidQueryError, PreconditionError
from hpcause.formula import And, Iff, Not, Or, Var, all_sat, to_cnf, variables
from hpcause.generators import generate_abt, generate_binary_tree
from hpcause.model import CausalModel

BS, SH, BH, ST, BT = (Var(n) for n in ("BS", "SH", "BH", "ST", "BT"))
ST_EXO, BT_EXO = Var("ST_exo"), Var("BT_exo")


def conjuncts(f):
    assert isinstance(f, And)
    return set(f.args)


# --- AC1 ------------------------------------------------------------------------

def test_ac1(rock, rock_query):
    assert check_ac1(rock_query("ST=1"))
    assert not check_ac1(rock_query("ST=0"))
    q = parse_query("context: ST_exo=0, BT_exo=0\ncause: ST=0\nphi: BS=1", rock)
    assert not check_ac1(q)


# --- formula construction -----------------------------------------------------------

def test_build_F_matches_displayed_formula(rock_query):
    expected = {
        Not(BS), ST_EXO, BT_EXO,
        Or((Iff(BS, Or((SH, BH))), BS)),
        Or((Iff(SH, ST), SH)),
        Or((Iff(BH, And((BT, Not(SH)))), Not(BH))),
        Not(ST),
        Or((Iff(BT, BT_EXO), BT)),
    }
    f = build_F(rock_query("ST=1"))
    assert conjuncts(f) == expected
    assert len(f.args) == len(expected)


def test_build_F_single_variable():
    m = CausalModel.from_equations("One", ["U_exo"], {"V": Var("U_exo")})
    q = CausalQuery(m, {"U_exo": True}, {"V": True}, Var("V"))
    assert build_F(q) == And((Not(Var("V")), Var("U_exo"), Not(Var("V"))))


def test_build_G_matches_displayed_formula(rock_query):
    expected = {
        Not(BS), ST_EXO, BT_EXO,
        Or((Iff(BS, Or((SH, BH))), BS)),
        Or((Iff(SH, ST), SH)),
        Or((Iff(BH, And((BT, Not(SH)))), Not(BH))),
        Or((ST, Not(ST))),
        Or((BT, Not(BT))),
    }
    q = rock_query("ST=1, BT=1")
    g = build_G(q)
    assert conjuncts(g) == expected
    assert variables(g) == variables(build_F(q)) | set(q.cause)


def test_table_rows(rock_query):
    names = ("BS", "SH", "BH", "ST", "BT")
    f_models = [tuple(int(a[n]) for n in names) for a in all_sat(to_cnf(build_F(rock_query("ST=1"))))]
    assert f_models == [(0, 0, 0, 0, 1)]
    g_models = {tuple(int(a[n]) for n in names) for a in all_sat(to_cnf(build_G(rock_query("ST=1, BT=1"))))}
    assert g_models == {(0, 0, 0, 0, 0), (0, 0, 0, 0, 1)}


# --- AC2 -----------------------------------------------------------------------------

def test_ac2_sat(rock_query):
    assert check_ac2_sat(rock_query("ST=1")) == {"BH": False, "BT": True}
    assert check_ac2_sat(rock_query("ST=1, BT=1")) == {}
    assert check_ac2_sat(rock_query("BT=1")) is None


def test_ac2_sat_minimal(rock_query):
    assert check_ac2_sat_minimal(rock_query("ST=1")) == {"BH": False}
    assert check_ac2_sat_minimal(rock_query("ST=1, BT=1")) == {}
    assert check_ac2_sat_minimal(rock_query("ST=1, BT=1"), shortcut=False) == {}
    assert check_ac2_sat_minimal(rock_query("BT=1")) is None


def test_ac2_brute(rock_query):
    assert check_ac2_brute(rock_query("ST=1")) == {"BH": False}
    assert check_ac2_brute(rock_query("ST=1, BT=1")) == {}
    assert check_ac2_brute(rock_query("BT=1")) is None


def test_brute_force_budget():
    tree = generate_binary_tree(5)
    q = CausalQuery(tree, {u: True for u in tree.exogenous}, {"n_29": True, "n_30": True},
                    Var("n_0"), Strategy.BRUTE_FORCE)
    with pytest.raises(BudgetExceeded):
        check_ac2_brute(q, budget=1000)


def test_brute_force_deadline():
    tree = generate_binary_tree(6)
    q = CausalQuery(tree, {u: True for u in tree.exogenous}, {"n_61": True},
                    Var("n_0"), Strategy.BRUTE_FORCE)
    t0 = time.monotonic()
    with pytest.raises(CheckTimeout):
        check_cause(q, budget=None, deadline=time.monotonic() + 0.5)
    assert time.monotonic() - t0 < 5


# --- AC3 -----------------------------------------------------------------------------

def test_ac3(rock_query):
    assert not check_ac3_sat(rock_query("ST=1, BT=1"))
    assert not check_ac3_brute(rock_query("ST=1, BT=1"))
    assert check_ac3_sat(rock_query("ST=1"))
    assert check_ac3_brute(rock_query("ST=1"))


def test_ac3_holds_when_G_unsatisfiable(rock):
    # a tautological effect can never be falsified
    q = parse_query("context: *=1\ncause: ST=1, BT=1\nphi: BS=1 | BS=0", rock)
    assert not list(all_sat(to_cnf(build_G(q))))
    assert check_ac3_sat(q)


def test_jointly_needed_cause_is_minimal():
    # either input alone keeps E true, so only flipping both falsifies it
    m = parse_model("model Joint\nexo U, V\nA = U\nB = V\nE = A | B\n")
    q = parse_query("context: *=1\ncause: A=1, B=1\nphi: E=1", m)
    assert check_ac3_brute(q)
    assert check_ac3_sat(q)
    assert check_cause(q).is_cause


def test_combined(rock_query):
    w, ac3 = check_combined(rock_query("ST=1, BT=1"))
    assert w == {} and ac3 is False
    for cause in ("ST=1", "BT=1", "SH=1", "ST=1, BT=1", "ST=1, BH=0"):
        q = rock_query(cause)
        w, ac3 = check_combined(q)
        assert (w is not None) == (check_ac2_sat(q) is not None)
        assert ac3 == check_ac3_sat(q)


def test_combined_agrees_with_brute_force_on_random_models():
    rng = random.Random(11)
    for _ in range(100):
        q = oracle.random_query(rng, max_endo=10)
        w, ac3 = check_combined(q)
        assert (w is not None) == (check_ac2_brute(q) is not None)
        assert ac3 == check_ac3_brute(q)


# --- dispatch --------------------------------------------------------------------------

def test_check_cause_rock(rock_query):
    r = check_cause(rock_query("ST=1"))
    assert r.is_cause and r.w == {"BH": False, "BT": True} and not r.w_minimal
    r = check_cause(rock_query("ST=1, BT=1"))
    assert (r.ac1, r.ac2, r.ac3, r.is_cause) == (True, True, False, False)
    assert r.w == {}
    for s in Strategy:
        assert check_cause(rock_query("SH=1", s.value)).is_cause


@pytest.mark.parametrize("strategy", list(Strategy))
def test_result_invariants(rock_query, strategy):
    for cause in ("ST=1", "BT=1", "ST=1, BT=1", "SH=1"):
        q = rock_query(cause, strategy.value)
        r = check_cause(q)
        assert r.is_cause == (r.ac1 and r.ac2 and r.ac3)
        assert (r.w is not None) == r.ac2
        assert not set(r.w or {}) & set(q.cause)
        assert r.timing and all(t >= 0 for t in r.timing.values())
        d = r.to_dict()
        assert d["is_cause"] == r.is_cause


def test_timing_keys(rock_query):
    assert set(check_cause(rock_query("ST=1", "sat")).timing) == {"ac1", "ac2", "ac3"}
    assert set(check_cause(rock_query("ST=1", "sat_combined")).timing) == {"ac1", "ac2_ac3"}


def test_minimal_flag(rock_query):
    assert check_cause(rock_query("ST=1", "sat_minimal")).w_minimal
    assert check_cause(rock_query("ST=1", "brute_force")).w_minimal
    assert not check_cause(rock_query("ST=1", "sat_combined")).w_minimal


def test_query_validation(rock):
    with pytest.raises(InvalidQueryError):
        check_cause(CausalQuery(rock, {"ST_exo": True, "BT_exo": True}, {"ST_exo": True}, BS))
    with pytest.raises(InvalidQueryError):
        check_cause(CausalQuery(rock, {"ST_exo": True, "BT_exo": True}, {}, BS))
    with pytest.raises(InvalidQueryError):
        check_cause(CausalQuery(rock, {"ST_exo": True}, {"ST": True}, BS))
    with pytest.raises(InvalidQueryError):
        check_cause(CausalQuery(rock, {"ST_exo": True, "BT_exo": True}, {"ST": True}, Var("Q")))


def test_effect_on_exogenous_warns(rock):
    q = CausalQuery(rock, {"ST_exo": True, "BT_exo": True}, {"ST": True}, ST_EXO)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        r = check_cause(q)
    assert any("exogenous" in str(w.message) for w in caught)
    assert not r.ac2


def test_sat_minimal_w_equals_brute_force_w():
    rng = random.Random(3)
    for _ in range(150):
        q = oracle.random_query(rng, max_endo=10)
        assert check_ac2_sat_minimal(q) == check_ac2_brute(q)


def test_abt_small_against_brute_force():
    abt = generate_abt(3)
    ctx = {u: False for u in abt.exogenous}
    ctx.update(B_exo=True, n_6_exo=True)
    q = CausalQuery(abt, ctx, {"n_6": True}, Var("I"), Strategy.SAT_MINIMAL)
    r = check_cause(q)
    bf = check_cause(q.with_strategy(Strategy.BRUTE_FORCE))
    assert (r.ac1, r.ac2, r.ac3) == (bf.ac1, bf.ac2, bf.ac3) == (True, True, True)
    assert r.w == bf.w and len(r.w) == 4


def test_scalability_leaf_query():
    tree = generate_binary_tree(12)
    q = CausalQuery(tree, {u: True for u in tree.exogenous}, {"n_4093": True, "n_4094": True}, Var("n_0"))
    r = check_cause(q)
    assert r.ac1 and not r.ac2


# --- diagnosis ---------------------------------------------------------------------------

def test_diagnosis_rock(rock_query):
    report = diagnose_non_minimal(rock_query("ST=1, BT=1"))
    assert [(o.var, o.value, o.condition) for o in report.offenders] == [("BT", True, "NMC3")]
    assert report.witness == {"ST": True}
    r = check_cause(rock_query("ST=1, BT=1"), diagnose=True)
    assert r.diagnosis == report
    assert r.to_dict()["diagnosis"] == {"offenders": [{"var": "BT", "value": 1, "condition": "NMC3"}],
                                        "witness": {"ST": 1}}


def test_diagnosis_irrelevant_variable():
    m = parse_model("model Irr\nexo U1, U2\nA = U1\nB = U2\nE = A\n")
    q = parse_query("context: *=1\ncause: A=1, B=1\nphi: E=1", m)
    report = diagnose_non_minimal(q)
    assert [(o.var, o.condition) for o in report.offenders] == [("B", "NMC2")]
    assert report.witness == {"A": True}


def test_diagnosis_precondition(rock_query):
    with pytest.raises(PreconditionError):
        diagnose_non_minimal(rock_query("ST=1"))
    assert check_cause(rock_query("ST=1"), diagnose=True).diagnosis is None


def test_diagnosis_witness_is_valid_on_random_queries():
    rng = random.Random(5)
    seen = 0
    for _ in range(300):
        q = oracle.random_query(rng, max_endo=8)
        if check_ac3_brute(q):
            continue
        seen += 1
        report = diagnose_non_minimal(q)
        sub = q.with_cause(report.witness)
        assert 0 < len(report.witness) < len(q.cause)
        assert oracle.ac1(sub) and oracle.ac2(sub)
    assert seen > 0
