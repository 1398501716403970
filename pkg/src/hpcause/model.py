"""Acyclic binary structural causal models.

A :class:`CausalModel` holds exogenous variables, endogenous variables and
one Boolean equation per endogenous variable.  Every variable ranges over
{0, 1}.  Given a context (values for the exogenous variables) an acyclic
model has exactly one solution, computed here in topological order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Optional

from .errors import ContextError, InterventionError, InvalidModelError
from .formula import Const, Formula, compile_formula, evaluate, variables


@dataclass(frozen=True)
class Finding:
    kind: str
    message: str
    variables: tuple = ()


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple = ()
    order: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return not self.findings

    def raise_if_invalid(self) -> None:
        if self.findings:
            raise InvalidModelError("; ".join(f.message for f in self.findings), self.findings)


@dataclass(frozen=True)
class CausalModel:
    name: str
    exogenous: tuple
    endogenous: tuple
    equations: Mapping[str, Formula]

    def __post_init__(self):
        object.__setattr__(self, "exogenous", tuple(self.exogenous))
        object.__setattr__(self, "endogenous", tuple(self.endogenous))
        object.__setattr__(self, "equations", dict(self.equations))

    def __getstate__(self):
        # cached compiled evaluators are not picklable
        return {k: v for k, v in self.__dict__.items() if k not in ("_compiled", "report")}

    @classmethod
    def from_equations(cls, name: str, exogenous, equations: Mapping[str, Formula]) -> "CausalModel":
        """Build a model whose endogenous variables are the equation keys, in order."""
        return cls(name, tuple(exogenous), tuple(equations), equations)

    @cached_property
    def report(self) -> ValidationReport:
        return validate(self)

    @property
    def order(self) -> tuple:
        """Topological order of the endogenous variables (ties: declaration order)."""
        self.report.raise_if_invalid()
        return self.report.order

    @cached_property
    def _compiled(self) -> dict:
        return {v: compile_formula(self.equations[v]) for v in self.endogenous}

    def parents(self, var: str) -> frozenset:
        return variables(self.equations[var])

    @property
    def variables(self) -> tuple:
        return self.exogenous + self.endogenous


def validate(model: CausalModel) -> ValidationReport:
    """Check the structural invariants of ``model``; never raises."""
    findings = []
    exo, endo = model.exogenous, model.endogenous
    for label, names in (("exogenous", exo), ("endogenous", endo)):
        seen = set()
        for n in names:
            if n in seen:
                findings.append(Finding("duplicate", f"{label} variable {n!r} declared twice", (n,)))
            seen.add(n)
    overlap = sorted(set(exo) & set(endo))
    if overlap:
        findings.append(Finding("overlap", f"variables both exogenous and endogenous: {overlap}", tuple(overlap)))
    endo_set, exo_set = set(endo), set(exo)
    declared = endo_set | exo_set
    for v in endo:
        if v not in model.equations:
            findings.append(Finding("missing-equation", f"endogenous variable {v!r} has no equation", (v,)))
    for v in model.equations:
        if v in exo_set and v not in endo_set:
            findings.append(Finding("exogenous-equation", f"exogenous variable {v!r} has an equation", (v,)))
        elif v not in endo_set:
            findings.append(Finding("undeclared", f"equation for undeclared variable {v!r}", (v,)))
    for v in endo:
        if v not in model.equations:
            continue
        unknown = sorted(variables(model.equations[v]) - declared)
        if unknown:
            findings.append(Finding("undeclared", f"equation of {v!r} uses undeclared {unknown}", tuple(unknown)))
    if findings:
        return ValidationReport(tuple(findings), None)

    # Kahn's algorithm; the heap key keeps ties in declaration order
    position = {v: i for i, v in enumerate(endo)}
    deps = {v: variables(model.equations[v]) & endo_set for v in endo}
    dependants = {v: [] for v in endo}
    indegree = {}
    for v, ds in deps.items():
        indegree[v] = len(ds)
        for d in ds:
            dependants[d].append(v)
    heap = [position[v] for v in endo if indegree[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = endo[heapq.heappop(heap)]
        order.append(v)
        for w in dependants[v]:
            indegree[w] -= 1
            if indegree[w] == 0:
                heapq.heappush(heap, position[w])
    if len(order) < len(endo):
        stuck = tuple(v for v in endo if indegree[v] > 0)
        return ValidationReport((Finding("cycle", f"cyclic dependencies among {list(stuck)}", stuck),), None)
    return ValidationReport((), tuple(order))


def _check_context(model: CausalModel, ctx: Mapping[str, bool]) -> None:
    missing = [u for u in model.exogenous if u not in ctx]
    if missing:
        raise ContextError(f"context has no value for exogenous {missing}")
    extra = sorted(set(ctx) - set(model.exogenous))
    if extra:
        raise ContextError(f"context assigns non-exogenous variables {extra}")


def solve_model(model: CausalModel, ctx: Mapping[str, bool], settings: Optional[Mapping[str, bool]] = None) -> dict:
    """Unique solution of ``model`` under ``ctx`` with ``settings`` forced.

    Equivalent to evaluating ``intervene(model, settings)`` but without
    building the intervened model; no argument checking beyond the context.
    """
    order = model.order
    _check_context(model, ctx)
    values = {u: bool(ctx[u]) for u in model.exogenous}
    compiled = model._compiled
    if settings:
        for v in order:
            s = settings.get(v)
            values[v] = compiled[v](values) if s is None else bool(s)
    else:
        for v in order:
            values[v] = compiled[v](values)
    return values


def evaluate_model(model: CausalModel, ctx: Mapping[str, bool]) -> dict:
    """The evaluation (all variables) induced by context ``ctx``."""
    return solve_model(model, ctx)


def intervene(model: CausalModel, settings: Mapping[str, bool]) -> CausalModel:
    """The model with the equations of ``settings``' keys replaced by constants."""
    if not settings:
        return model
    endo = set(model.endogenous)
    for v in settings:
        if v in model.exogenous:
            raise InterventionError(f"cannot intervene on exogenous variable {v!r}")
        if v not in endo:
            raise InterventionError(f"unknown variable {v!r}")
    equations = {v: (Const(settings[v]) if v in settings else eq) for v, eq in model.equations.items()}
    return CausalModel(model.name, model.exogenous, model.endogenous, equations)


def satisfies(model: CausalModel, ctx: Mapping[str, bool], phi: Formula) -> bool:
    """(M, u) ⊨ phi."""
    return evaluate(phi, solve_model(model, ctx))
