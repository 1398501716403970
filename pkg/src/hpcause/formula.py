"""Propositional formulas, Tseitin CNF conversion and (All-)SAT solving.

Formulas are immutable trees of :class:`Const`, :class:`Var`, :class:`Not`,
:class:`And`, :class:`Or` and :class:`Iff` nodes.  :class:`Event` is a
primitive event ``X = x`` as written in an effect; :func:`phi_to_formula`
rewrites events into literals before a formula is used in an encoding.

Solving is delegated to MiniSat 2.2 through ``python-sat``.  Clauses are
DIMACS-style signed integers; :class:`CnfFormula` keeps the name/index map.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

from pysat.solvers import Solver

from .errors import CheckTimeout, MissingVariableError

SOLVER_NAME = "m22"

Assignment = Mapping[str, bool]


class Formula:
    __slots__ = ()

    def __and__(self, other: "Formula") -> "And":
        return And((self, other))

    def __or__(self, other: "Formula") -> "Or":
        return Or((self, other))

    def __invert__(self) -> "Not":
        return Not(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def __post_init__(self):
        object.__setattr__(self, "value", bool(self.value))


def _check_name(name) -> None:
    if not isinstance(name, str) or not name or any(c.isspace() for c in name):
        raise ValueError(f"invalid variable name {name!r}")


@dataclass(frozen=True)
class Var(Formula):
    name: str

    def __post_init__(self):
        _check_name(self.name)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def __post_init__(self):
        args = tuple(self.args)
        if not args:
            raise ValueError("And needs at least one operand")
        object.__setattr__(self, "args", args)


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def __post_init__(self):
        args = tuple(self.args)
        if not args:
            raise ValueError("Or needs at least one operand")
        object.__setattr__(self, "args", args)


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Event(Formula):
    """Primitive event ``var = value``."""

    var: str
    value: bool

    def __post_init__(self):
        _check_name(self.var)
        object.__setattr__(self, "value", bool(self.value))


TRUE = Const(True)
FALSE = Const(False)


def literal_of(var: Union[str, Var], value: bool) -> Formula:
    """``var`` if ``value`` is true, ``¬var`` otherwise."""
    v = var if isinstance(var, Var) else Var(var)
    return v if value else Not(v)


def conj(*fs: Formula) -> Formula:
    return fs[0] if len(fs) == 1 else And(fs)


def disj(*fs: Formula) -> Formula:
    return fs[0] if len(fs) == 1 else Or(fs)


def children(f: Formula) -> tuple:
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, Iff):
        return (f.left, f.right)
    return ()


def variables(f: Formula) -> frozenset:
    """Names of all variables occurring in ``f``."""
    out = set()
    stack = [f]
    seen = set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, Event):
            out.add(node.var)
        else:
            stack.extend(children(node))
    return frozenset(out)


def evaluate(f: Formula, a: Assignment) -> bool:
    """Truth value of ``f`` under ``a``; raises MissingVariableError if ``a`` is partial."""
    if isinstance(f, Var):
        try:
            return bool(a[f.name])
        except KeyError:
            raise MissingVariableError(f.name) from None
    if isinstance(f, Not):
        return not evaluate(f.arg, a)
    if isinstance(f, And):
        # evaluate every operand so missing variables are always reported
        return all([evaluate(g, a) for g in f.args])
    if isinstance(f, Or):
        return any([evaluate(g, a) for g in f.args])
    if isinstance(f, Iff):
        return evaluate(f.left, a) == evaluate(f.right, a)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Event):
        try:
            return bool(a[f.var]) == f.value
        except KeyError:
            raise MissingVariableError(f.var) from None
    raise TypeError(f"not a formula: {f!r}")


def _source(f: Formula) -> str:
    if isinstance(f, Var):
        return f"v[{f.name!r}]"
    if isinstance(f, Not):
        return f"(not {_source(f.arg)})"
    if isinstance(f, And):
        return "(" + " and ".join(_source(g) for g in f.args) + ")"
    if isinstance(f, Or):
        return "(" + " or ".join(_source(g) for g in f.args) + ")"
    if isinstance(f, Iff):
        return f"({_source(f.left)} == {_source(f.right)})"
    if isinstance(f, Const):
        return repr(f.value)
    if isinstance(f, Event):
        return f"(v[{f.var!r}] == {f.value!r})"
    raise TypeError(f"not a formula: {f!r}")


def compile_formula(f: Formula) -> Callable[[Mapping[str, bool]], bool]:
    """Return a fast evaluator for ``f``.

    The evaluator expects a mapping holding genuine ``bool`` values for every
    variable of ``f`` and raises ``KeyError`` otherwise.  Falls back to the
    tree walk for formulas too deep for the Python compiler.
    """
    try:
        return eval(compile(f"lambda v: {_source(f)}", "<formula>", "eval"))
    except (RecursionError, MemoryError, SyntaxError):
        return lambda v: evaluate(f, v)


def phi_to_formula(phi: Formula) -> Formula:
    """Replace every primitive event ``X = x`` in ``phi`` by its literal."""
    if isinstance(phi, Event):
        return literal_of(phi.var, phi.value)
    if isinstance(phi, Not):
        return Not(phi_to_formula(phi.arg))
    if isinstance(phi, And):
        return And(tuple(phi_to_formula(g) for g in phi.args))
    if isinstance(phi, Or):
        return Or(tuple(phi_to_formula(g) for g in phi.args))
    if isinstance(phi, Iff):
        return Iff(phi_to_formula(phi.left), phi_to_formula(phi.right))
    return phi


def _fold(f: Formula, kids: list) -> Formula:
    """Rebuild ``f`` from its already simplified children ``kids``."""
    if isinstance(f, Not):
        (g,) = kids
        if isinstance(g, Const):
            return Const(not g.value)
        return f if g is f.arg else Not(g)
    if isinstance(f, (And, Or)):
        absorbing = isinstance(f, Or)
        kept = []
        changed = False
        for g, h in zip(f.args, kids):
            changed |= h is not g
            if isinstance(h, Const):
                changed = True
                if h.value == absorbing:
                    return Const(absorbing)
                continue
            kept.append(h)
        if not kept:
            return Const(not absorbing)
        if not changed:
            return f
        return kept[0] if len(kept) == 1 else type(f)(tuple(kept))
    if isinstance(f, Iff):
        left, right = kids
        if isinstance(left, Const) and isinstance(right, Const):
            return Const(left.value == right.value)
        if isinstance(left, Const):
            return right if left.value else Not(right)
        if isinstance(right, Const):
            return left if right.value else Not(left)
        if left is f.left and right is f.right:
            return f
        return Iff(left, right)
    raise TypeError(f"not a formula: {f!r}")


def simplify(f: Formula) -> Formula:
    """Constant folding.  Leaves constant-free subtrees untouched."""
    done: dict = {}
    stack = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        key = id(node)
        if key in done:
            continue
        if isinstance(node, Event):
            done[key] = (literal_of(node.var, node.value), node)
            continue
        if isinstance(node, (Var, Const)):
            done[key] = (node, node)
            continue
        if not isinstance(node, (Not, And, Or, Iff)):
            raise TypeError(f"not a formula: {node!r}")
        kids = children(node)
        if not expanded:
            stack.append((node, True))
            stack.extend((k, False) for k in kids if id(k) not in done)
            continue
        done[key] = (_fold(node, [done[id(k)][0] for k in kids]), node)
    return done[id(f)][0]


@dataclass
class CnfFormula:
    """Clauses over integer variables 1..num_vars.

    ``var_index`` maps each original variable name to its index; indices above
    ``len(var_index)`` are Tseitin auxiliaries.
    """

    clauses: list
    var_index: dict
    num_vars: int
    original_vars: tuple = field(init=False)

    def __post_init__(self):
        self.original_vars = tuple(self.var_index)

    @property
    def has_empty_clause(self) -> bool:
        return any(not c for c in self.clauses)


class _Tseitin:
    def __init__(self, names: Iterable[str]):
        self.index = {name: i for i, name in enumerate(names, start=1)}
        self.next_var = len(self.index) + 1
        self.clauses: list = []
        self._memo: dict = {}

    def fresh(self) -> int:
        v = self.next_var
        self.next_var += 1
        return v

    def literal(self, root: Formula) -> int:
        # iterative post-order so deep formulas do not hit the recursion limit
        stack = [(root, False)]
        memo = self._memo
        while stack:
            node, expanded = stack.pop()
            key = id(node)
            if key in memo:
                continue
            if isinstance(node, Var):
                memo[key] = (self.index[node.name], node)
                continue
            kids = children(node)
            if not expanded:
                stack.append((node, True))
                stack.extend((k, False) for k in kids if id(k) not in memo)
                continue
            lits = [memo[id(k)][0] for k in kids]
            if isinstance(node, Not):
                lit = -lits[0]
            elif isinstance(node, And):
                lit = self.fresh()
                self.clauses.extend([-lit, x] for x in lits)
                self.clauses.append([lit] + [-x for x in lits])
            elif isinstance(node, Or):
                lit = self.fresh()
                self.clauses.append([-lit] + lits)
                self.clauses.extend([lit, -x] for x in lits)
            elif isinstance(node, Iff):
                lit = self.fresh()
                a, b = lits
                self.clauses += [[-lit, -a, b], [-lit, a, -b], [lit, a, b], [lit, -a, -b]]
            else:
                raise TypeError(f"unexpected node after simplification: {node!r}")
            # keep node alive so its id is not recycled during conversion
            memo[key] = (lit, node)
        return memo[id(root)][0]

    def _flat_literal(self, f: Formula) -> Optional[int]:
        if isinstance(f, Var):
            return self.index[f.name]
        if isinstance(f, Not) and isinstance(f.arg, Var):
            return -self.index[f.arg.name]
        return None

    def assert_formula(self, f: Formula) -> None:
        todo = [f]
        while todo:
            g = todo.pop()
            if isinstance(g, And):
                todo.extend(reversed(g.args))
                continue
            if isinstance(g, Or):
                flat = [self._flat_literal(h) for h in g.args]
                if all(x is not None for x in flat):
                    self.clauses.append(flat)
                    continue
                self.clauses.append([self.literal(h) for h in g.args])
                continue
            self.clauses.append([self.literal(g)])


def to_cnf(f: Formula) -> CnfFormula:
    """Equisatisfiable CNF of ``f`` (Tseitin, after constant folding).

    Projections of CNF models onto ``original_vars`` are exactly the models
    of ``f``.
    """
    names = sorted(variables(f))
    g = simplify(f)
    enc = _Tseitin(names)
    if isinstance(g, Const):
        if not g.value:
            enc.clauses.append([])
    else:
        enc.assert_formula(g)
    return CnfFormula(enc.clauses, enc.index, enc.next_var - 1)


def _check_deadline(deadline: Optional[float]) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise CheckTimeout("deadline exceeded during SAT solving")


def _project(c: CnfFormula, model: list, default: bool = False) -> dict:
    values = {abs(lit): lit > 0 for lit in model}
    return {name: values.get(i, default) for name, i in c.var_index.items()}


def solve(c: CnfFormula, deadline: Optional[float] = None) -> Optional[dict]:
    """One satisfying assignment over ``c.original_vars``, or ``None``."""
    if c.has_empty_clause:
        return None
    _check_deadline(deadline)
    with Solver(name=SOLVER_NAME, bootstrap_with=c.clauses) as s:
        if not s.solve():
            return None
        return _project(c, s.get_model())


def all_sat(c: CnfFormula, deadline: Optional[float] = None) -> Iterator[dict]:
    """Yield every model of ``c`` projected onto ``original_vars`` exactly once.

    Enumeration adds one blocking clause over the original variables per
    model, so assignments differing only in auxiliaries are not repeated.
    Order is unspecified.
    """
    if c.has_empty_clause:
        return
    used = {abs(lit) for clause in c.clauses for lit in clause}
    tracked = [(name, i) for name, i in c.var_index.items() if i in used]
    free = [name for name, i in c.var_index.items() if i not in used]
    with Solver(name=SOLVER_NAME, bootstrap_with=c.clauses) as s:
        while True:
            _check_deadline(deadline)
            if not s.solve():
                return
            values = {abs(lit): lit > 0 for lit in s.get_model()}
            base = {name: values.get(i, False) for name, i in tracked}
            for bits in product((False, True), repeat=len(free)):
                out = dict(base)
                out.update(zip(free, bits))
                yield out
            if not tracked:
                return
            s.add_clause([-i if values.get(i, False) else i for _, i in tracked])


def to_dimacs(c: CnfFormula) -> str:
    """DIMACS CNF text; comment lines carry the variable-name map."""
    lines = [f"c {i} {name}" for name, i in c.var_index.items()]
    lines.append(f"p cnf {c.num_vars} {len(c.clauses)}")
    lines.extend(" ".join(map(str, clause + [0])) for clause in c.clauses)
    return "\n".join(lines) + "\n"
