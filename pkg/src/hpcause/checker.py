"""Actual-causality checks (modified Halpern-Pearl definition).

Four strategies decide AC1-AC3 for a query ``X = x`` causes ``phi`` in
``(M, u)``:

``BRUTE_FORCE``
    Enumerates contingency sets W by increasing size, and subsets of the
    cause for minimality.
``SAT``
    Encodes AC2 as the satisfiability of a formula F and AC3 as the absence
    of a "non-minimal" model of a relaxed formula G.
``SAT_MINIMAL``
    Like ``SAT`` but enumerates all models of F to extract a minimal W.
``SAT_COMBINED``
    Enumerates only G; the models of F are exactly the models of G in which
    every cause variable is negated.

The counterfactual setting of the cause is always the negation of the
claimed values; for binary models no other setting can make a minimal
cause.
"""

from __future__ import annotations

import enum
import time
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Optional

from .errors import (
    BudgetExceeded,
    CheckTimeout,
    InvalidQueryError,
    PreconditionError,
)
from .formula import (
    And,
    Formula,
    Iff,
    Not,
    Or,
    Var,
    all_sat,
    compile_formula,
    literal_of,
    solve,
    to_cnf,
    variables,
)
from .model import CausalModel, solve_model

DEFAULT_BUDGET = 2 ** 22
_DEADLINE_STRIDE = 64


class Strategy(str, enum.Enum):
    BRUTE_FORCE = "brute_force"
    SAT = "sat"
    SAT_MINIMAL = "sat_minimal"
    SAT_COMBINED = "sat_combined"

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        key = text.strip().lower().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise InvalidQueryError(f"unknown strategy {text!r}") from None


@dataclass(frozen=True)
class CausalQuery:
    model: CausalModel
    context: Mapping[str, bool]
    cause: Mapping[str, bool]
    phi: Formula
    strategy: Strategy = Strategy.SAT

    def __post_init__(self):
        object.__setattr__(self, "context", {k: bool(v) for k, v in self.context.items()})
        object.__setattr__(self, "cause", {k: bool(v) for k, v in self.cause.items()})
        object.__setattr__(self, "strategy", Strategy(self.strategy))

    def with_cause(self, cause: Mapping[str, bool]) -> "CausalQuery":
        return CausalQuery(self.model, self.context, cause, self.phi, self.strategy)

    def with_strategy(self, strategy: Strategy) -> "CausalQuery":
        return CausalQuery(self.model, self.context, self.cause, self.phi, strategy)


@dataclass(frozen=True)
class Offender:
    var: str
    value: bool
    condition: str  # "NMC1" | "NMC2" | "NMC3"


@dataclass(frozen=True)
class NonMinimalityReport:
    offenders: tuple
    witness: Mapping[str, bool]

    def to_dict(self) -> dict:
        return {
            "offenders": [{"var": o.var, "value": int(o.value), "condition": o.condition} for o in self.offenders],
            "witness": {k: int(v) for k, v in self.witness.items()},
        }


@dataclass(frozen=True)
class CausalityResult:
    strategy: Strategy
    ac1: bool
    ac2: bool
    ac3: bool
    w: Optional[Mapping[str, bool]]
    w_minimal: bool
    diagnosis: Optional[NonMinimalityReport] = None
    timing: Mapping[str, int] = field(default_factory=dict)

    @property
    def is_cause(self) -> bool:
        return self.ac1 and self.ac2 and self.ac3

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "ac1": self.ac1,
            "ac2": self.ac2,
            "ac3": self.ac3,
            "is_cause": self.is_cause,
            "w": None if self.w is None else {k: int(v) for k, v in self.w.items()},
            "w_minimal": self.w_minimal,
            "diagnosis": None if self.diagnosis is None else self.diagnosis.to_dict(),
            "timing": dict(self.timing),
        }


def validate_query(q: CausalQuery) -> None:
    q.model.report.raise_if_invalid()
    if not q.cause:
        raise InvalidQueryError("cause must not be empty")
    endo = set(q.model.endogenous)
    for x in q.cause:
        if x in q.model.exogenous:
            raise InvalidQueryError(f"exogenous variable {x!r} cannot be part of a cause")
        if x not in endo:
            raise InvalidQueryError(f"unknown cause variable {x!r}")
    missing = [u for u in q.model.exogenous if u not in q.context]
    if missing:
        raise InvalidQueryError(f"context has no value for {missing}")
    extra = sorted(set(q.context) - set(q.model.exogenous))
    if extra:
        raise InvalidQueryError(f"context assigns non-exogenous variables {extra}")
    used = variables(q.phi)
    unknown = sorted(used - set(q.model.variables))
    if unknown:
        raise InvalidQueryError(f"effect mentions unknown variables {unknown}")
    if used & set(q.model.exogenous):
        warnings.warn("effect mentions exogenous variables", stacklevel=3)


def _check_deadline(deadline: Optional[float]) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise CheckTimeout("deadline exceeded")


def _negated(cause: Mapping[str, bool]) -> dict:
    return {x: not v for x, v in cause.items()}


def original_evaluation(q: CausalQuery) -> dict:
    return solve_model(q.model, q.context)


# --- AC1 ------------------------------------------------------------------

def check_ac1(q: CausalQuery, ev: Optional[Mapping[str, bool]] = None) -> bool:
    ev = original_evaluation(q) if ev is None else ev
    return all(ev[x] == v for x, v in q.cause.items()) and compile_formula(q.phi)(ev)


# --- brute force ----------------------------------------------------------

def _witness_search(model, ctx, base_settings, candidates, ev, holds, budget, deadline):
    """First W ⊆ candidates (by size, then lexicographically) with holds(solution)."""
    count = 0
    for k in range(len(candidates) + 1):
        for ws in combinations(candidates, k):
            count += 1
            if budget is not None and count > budget:
                raise BudgetExceeded(f"more than {budget} contingency sets")
            if count % _DEADLINE_STRIDE == 0:
                _check_deadline(deadline)
            settings = dict(base_settings)
            for w in ws:
                settings[w] = ev[w]
            if holds(solve_model(model, ctx, settings)):
                return {w: ev[w] for w in ws}
    return None


def check_ac2_brute(q: CausalQuery, ev=None, budget: Optional[int] = DEFAULT_BUDGET, deadline=None) -> Optional[dict]:
    """Smallest W (ties: lexicographic) with [X ← ¬x, W ← w]¬phi, else None."""
    ev = original_evaluation(q) if ev is None else ev
    phi = compile_formula(q.phi)
    candidates = sorted(v for v in q.model.endogenous if v not in q.cause)
    return _witness_search(q.model, q.context, _negated(q.cause), candidates, ev,
                           lambda sol: not phi(sol), budget, deadline)


def _strict_subsets(cause: Mapping[str, bool]):
    items = list(cause.items())
    for k in range(1, len(items)):
        for sub in combinations(items, k):
            yield dict(sub)


def check_ac3_brute(q: CausalQuery, ev=None, budget: Optional[int] = DEFAULT_BUDGET, deadline=None) -> bool:
    """True iff no nonempty strict subset of the cause satisfies AC1 and AC2."""
    ev = original_evaluation(q) if ev is None else ev
    for sub in _strict_subsets(q.cause):
        sq = q.with_cause(sub)
        if check_ac1(sq, ev) and check_ac2_brute(sq, ev, budget, deadline) is not None:
            return False
    return True


# --- SAT encodings --------------------------------------------------------

def _base_conjuncts(q: CausalQuery, ev: Mapping[str, bool]) -> list:
    m = q.model
    parts = [Not(q.phi)]
    parts.extend(literal_of(u, q.context[u]) for u in m.exogenous)
    for v in m.endogenous:
        if v in q.cause:
            continue
        parts.append(Or((Iff(Var(v), m.equations[v]), literal_of(v, ev[v]))))
    return parts


def build_F(q: CausalQuery, ev: Optional[Mapping[str, bool]] = None) -> Formula:
    """¬phi ∧ context ∧ ⋀(V ↔ F_V ∨ orig(V)) over non-cause V ∧ ⋀ ¬x_i."""
    ev = original_evaluation(q) if ev is None else ev
    parts = _base_conjuncts(q, ev)
    parts.extend(literal_of(x, not v) for x, v in q.cause.items())
    return And(tuple(parts))


def build_G(q: CausalQuery, ev: Optional[Mapping[str, bool]] = None) -> Formula:
    """F with every cause literal relaxed to the tautology (x_i ∨ ¬x_i).

    The tautologies are kept on purpose so every model mentions the cause
    variables.
    """
    ev = original_evaluation(q) if ev is None else ev
    parts = _base_conjuncts(q, ev)
    parts.extend(Or((literal_of(x, v), literal_of(x, not v))) for x, v in q.cause.items())
    return And(tuple(parts))


def _empty_w_suffices(q: CausalQuery) -> bool:
    return not compile_formula(q.phi)(solve_model(q.model, q.context, _negated(q.cause)))


def _w_from_model(q: CausalQuery, ev, model) -> dict:
    return {v: ev[v] for v in sorted(q.model.endogenous) if v not in q.cause and model[v] == ev[v]}


def check_ac2_sat(q: CausalQuery, ev=None, deadline=None) -> Optional[dict]:
    """AC2 via one model of F.

    Returns ∅ when negating the cause alone already falsifies phi, otherwise
    every non-cause endogenous variable that kept its original value in the
    model found (a valid but generally non-minimal W), or None.
    """
    ev = original_evaluation(q) if ev is None else ev
    if _empty_w_suffices(q):
        return {}
    model = solve(to_cnf(build_F(q, ev)), deadline)
    if model is None:
        return None
    return _w_from_model(q, ev, model)


def _required_w(q: CausalQuery, ev, model, compiled) -> dict:
    # kept at its original value although its equation says otherwise
    return {
        v: ev[v]
        for v in sorted(q.model.endogenous)
        if v not in q.cause and model[v] == ev[v] and compiled[v](model) != model[v]
    }


def check_ac2_sat_minimal(q: CausalQuery, ev=None, deadline=None, shortcut: bool = True) -> Optional[dict]:
    """AC2 with a minimum-size W taken over all models of F."""
    ev = original_evaluation(q) if ev is None else ev
    if shortcut and _empty_w_suffices(q):
        return {}
    compiled = q.model._compiled
    best = None
    for model in all_sat(to_cnf(build_F(q, ev)), deadline):
        w = _required_w(q, ev, model, compiled)
        key = (len(w), tuple(w))
        if best is None or key < best[0]:
            best = (key, w)
            if not w:
                break
    return None if best is None else best[1]


def _explained_count(q: CausalQuery, ev, model, compiled) -> int:
    return sum(
        1 for x in q.cause
        if model[x] != ev[x] and model[x] != compiled[x](model)
    )


def check_ac3_sat(q: CausalQuery, ev=None, deadline=None) -> bool:
    """AC3 via the models of G; stops at the first model exposing a smaller cause."""
    ev = original_evaluation(q) if ev is None else ev
    ell = len(q.cause)
    if ell <= 1 or not compile_formula(q.phi)(ev):
        return True
    compiled = q.model._compiled
    for model in all_sat(to_cnf(build_G(q, ev)), deadline):
        if _explained_count(q, ev, model, compiled) < ell:
            return False
    return True


def check_combined(q: CausalQuery, ev=None, deadline=None) -> tuple:
    """(W or None, AC3 verdict) from a single enumeration of G."""
    ev = original_evaluation(q) if ev is None else ev
    ell = len(q.cause)
    if ell <= 1 or not compile_formula(q.phi)(ev):
        return check_ac2_sat(q, ev, deadline), True
    compiled = q.model._compiled
    negated = _negated(q.cause)
    w = {} if _empty_w_suffices(q) else None
    ac3 = True
    for model in all_sat(to_cnf(build_G(q, ev)), deadline):
        if w is None and all(model[x] == v for x, v in negated.items()):
            w = _w_from_model(q, ev, model)
        if ac3 and _explained_count(q, ev, model, compiled) < ell:
            ac3 = False
        if w is not None and not ac3:
            break
    return w, ac3


# --- non-minimality diagnostics -------------------------------------------

def _ancestors(m, targets) -> set:
    """Endogenous variables with a directed path into ``targets`` (inclusive)."""
    seen = set()
    stack = [t for t in targets if t in m.equations]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(p for p in m.parents(v) if p in m.equations)
    return seen


def _classify(q: CausalQuery, ev, keep: Mapping[str, bool], xn: str, budget, deadline) -> Optional[str]:
    m = q.model
    phi = compile_formula(q.phi)
    eq = m._compiled[xn]
    candidates = sorted(v for v in m.endogenous if v not in keep and v != xn)
    base = _negated(keep)
    follows = _witness_search(m, q.context, base, candidates, ev, lambda s: not phi(s), budget, deadline)
    pinned_base = dict(base)
    pinned_base[xn] = q.cause[xn]
    pinned = _witness_search(
        m, q.context, pinned_base, candidates, ev,
        lambda s: not phi(s) and eq(s) != s[xn], budget, deadline,
    )
    if follows is not None and (pinned is not None or xn not in _ancestors(m, variables(q.phi))):
        return "NMC2"
    if pinned is not None:
        return "NMC1"
    if follows is not None:
        return "NMC3"
    return None


def diagnose_non_minimal(q: CausalQuery, ev=None, budget: Optional[int] = DEFAULT_BUDGET, deadline=None) -> NonMinimalityReport:
    """Explain an AC3 failure by brute force.

    The witness is the smallest strict subset of the cause passing AC1 and
    AC2.  Each removed cause variable is classified against that subset:
    NMC1 when AC2 needs it held at its value against its own equation,
    NMC3 when AC2 needs it to follow its equation, NMC2 when either works
    or when it has no path into the effect at all.
    """
    ev = original_evaluation(q) if ev is None else ev
    witness = None
    for sub in _strict_subsets(q.cause):
        sq = q.with_cause(sub)
        if check_ac1(sq, ev) and check_ac2_brute(sq, ev, budget, deadline) is not None:
            witness = sub
            break
    if witness is None:
        raise PreconditionError("AC3 holds for this query; nothing to diagnose")
    offenders = []
    for xn, value in q.cause.items():
        if xn in witness:
            continue
        cond = _classify(q, ev, witness, xn, budget, deadline)
        if cond is not None:
            offenders.append(Offender(xn, value, cond))
    return NonMinimalityReport(tuple(offenders), witness)


# --- dispatch -------------------------------------------------------------

def check_cause(
    q: CausalQuery,
    diagnose: bool = False,
    budget: Optional[int] = DEFAULT_BUDGET,
    deadline: Optional[float] = None,
) -> CausalityResult:
    """Decide AC1-AC3 for ``q`` with its strategy."""
    validate_query(q)
    timing = {}
    t0 = time.perf_counter_ns()
    ev = original_evaluation(q)
    ac1 = check_ac1(q, ev)
    t1 = time.perf_counter_ns()
    timing["ac1"] = t1 - t0
    strategy = q.strategy
    if strategy is Strategy.SAT_COMBINED:
        w, ac3 = check_combined(q, ev, deadline)
        t2 = t3 = time.perf_counter_ns()
        timing["ac2_ac3"] = t2 - t1
    else:
        if strategy is Strategy.BRUTE_FORCE:
            w = check_ac2_brute(q, ev, budget, deadline)
        elif strategy is Strategy.SAT_MINIMAL:
            w = check_ac2_sat_minimal(q, ev, deadline)
        else:
            w = check_ac2_sat(q, ev, deadline)
        t2 = time.perf_counter_ns()
        if strategy is Strategy.BRUTE_FORCE:
            ac3 = check_ac3_brute(q, ev, budget, deadline)
        else:
            ac3 = check_ac3_sat(q, ev, deadline)
        t3 = time.perf_counter_ns()
        timing["ac2"] = t2 - t1
        timing["ac3"] = t3 - t2
    diagnosis = None
    if diagnose and not ac3:
        try:
            diagnosis = diagnose_non_minimal(q, ev, budget, deadline)
        except (BudgetExceeded, PreconditionError):
            diagnosis = None
    return CausalityResult(
        strategy=strategy,
        ac1=ac1,
        ac2=w is not None,
        ac3=ac3,
        w=w,
        w_minimal=w is not None and strategy in (Strategy.BRUTE_FORCE, Strategy.SAT_MINIMAL),
        diagnosis=diagnosis,
        timing=timing,
    )
