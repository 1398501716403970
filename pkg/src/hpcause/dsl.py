"""Text formats for causal models and queries.

Model files are line oriented::

    model RockThrowing
    exo ST_exo, BT_exo
    ST = ST_exo
    BS = SH | BH

Expressions use identifiers, the constants 0 and 1, ``!``, ``&``, ``|`` and
``<->`` (loosest), with parentheses.  Binary operators are left
associative; chains of ``&`` or ``|`` parse into one n-ary node.

Query files hold ``key: value`` lines (``;`` also separates entries)::

    model: rock_throwing.model
    context: ST_exo=1, BT_exo=1
    cause: ST=1
    phi: BS=1
    strategy: sat

In ``phi`` an atom may be a primitive event ``X=0``/``X=1`` or a bare
variable, meaning ``X=1``.  A context entry ``*=b`` assigns ``b`` to every
exogenous variable not listed explicitly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .checker import CausalQuery, Strategy
from .errors import DslSyntaxError, InvalidModelError, InvalidQueryError
from .formula import And, Const, Event, Formula, Iff, Not, Or, Var, phi_to_formula, variables
from .model import CausalModel

_TOKEN = re.compile(r"\s*(?:(<->)|([A-Za-z_][A-Za-z0-9_]*)|([01])|([!&|()=]))")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass
class _Tok:
    kind: str  # "op", "id", "const", "end"
    text: str
    col: int


def _tokenize(text: str, line: int, col0: int) -> list:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        start = m.start(m.lastindex)
        if m.group(1) or m.group(4):
            toks.append(_Tok("op", m.group(m.lastindex), col0 + start))
        elif m.group(2):
            toks.append(_Tok("id", m.group(2), col0 + start))
        else:
            toks.append(_Tok("const", m.group(3), col0 + start))
        pos = m.end()
    toks.append(_Tok("end", "", col0 + len(text)))
    return toks


class _ExprParser:
    """Recursive descent over ``iff := or ('<->' or)*`` and so on down to atoms."""

    def __init__(self, text: str, line: int = 1, col0: int = 1, events: bool = False):
        self.toks = _tokenize(text, line, col0)
        self.i = 0
        self.line = line
        self.events = events

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: Optional[_Tok] = None):
        tok = tok or self.peek()
        return DslSyntaxError(msg, self.line, tok.col)

    def parse(self) -> Formula:
        f = self.iff()
        if self.peek().kind != "end":
            raise self.error(f"unexpected {self.peek().text!r}")
        return f

    def _is(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text == text

    def iff(self) -> Formula:
        f = self.disj()
        while self._is("<->"):
            self.take()
            f = Iff(f, self.disj())
        return f

    def disj(self) -> Formula:
        args = [self.conj()]
        while self._is("|"):
            self.take()
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conj(self) -> Formula:
        args = [self.unary()]
        while self._is("&"):
            self.take()
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self) -> Formula:
        if self._is("!"):
            self.take()
            return Not(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.take()
        if tok.kind == "op" and tok.text == "(":
            f = self.iff()
            if not self._is(")"):
                raise self.error("expected ')'")
            self.take()
            return f
        if tok.kind == "const":
            return Const(tok.text == "1")
        if tok.kind == "id":
            if self.events and self._is("="):
                self.take()
                val = self.take()
                if val.kind != "const":
                    raise self.error("expected 0 or 1 after '='", val)
                return Event(tok.text, val.text == "1")
            return Event(tok.text, True) if self.events else Var(tok.text)
        if tok.kind == "end":
            raise self.error("unexpected end of expression", tok)
        raise self.error(f"unexpected {tok.text!r}", tok)


def parse_expr(text: str, events: bool = False, line: int = 1, col0: int = 1) -> Formula:
    """Parse one expression.  With ``events`` atoms are primitive events."""
    return _ExprParser(text, line, col0, events).parse()


_PREC = {Iff: 1, Or: 2, And: 3, Not: 4}


def format_expr(f: Formula) -> str:
    """Canonical text of ``f``; ``parse_expr(format_expr(f)) == f``."""
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Const):
        return "1" if f.value else "0"
    if isinstance(f, Event):
        return f"{f.var}={int(f.value)}"
    if isinstance(f, Not):
        inner = format_expr(f.arg)
        if isinstance(f.arg, (And, Or, Iff)):
            inner = f"({inner})"
        return "!" + inner
    if isinstance(f, (And, Or, Iff)):
        prec = _PREC[type(f)]
        ops = children_of(f)
        sep = {And: " & ", Or: " | ", Iff: " <-> "}[type(f)]
        parts = []
        for g in ops:
            s = format_expr(g)
            if type(g) in _PREC and type(g) is not Not and _PREC[type(g)] <= prec:
                s = f"({s})"
            parts.append(s)
        if len(parts) == 1:
            # a one-operand And/Or has no concrete syntax; it prints as its operand
            return parts[0]
        return sep.join(parts)
    raise TypeError(f"not a formula: {f!r}")


def children_of(f: Formula) -> tuple:
    if isinstance(f, Iff):
        return (f.left, f.right)
    return f.args


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def parse_model(text: str) -> CausalModel:
    """Parse and validate a model file."""
    name = None
    exogenous = []
    equations = {}
    seen_any = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        stripped = line.strip()
        word = stripped.split(None, 1)[0]
        if word == "model" and "=" not in stripped:
            if seen_any:
                raise DslSyntaxError("'model' must be the first statement", lineno, indent + 1)
            parts = stripped.split()
            if len(parts) != 2 or not _IDENT.match(parts[1]):
                raise DslSyntaxError("expected 'model <Name>'", lineno, indent + 1)
            name = parts[1]
            seen_any = True
            continue
        if name is None:
            raise DslSyntaxError("expected 'model <Name>' header", lineno, indent + 1)
        seen_any = True
        if word == "exo" and "=" not in stripped:
            rest = stripped[3:]
            col = indent + 4
            for item in rest.split(","):
                ident = item.strip()
                if not _IDENT.match(ident):
                    raise DslSyntaxError(f"invalid exogenous name {ident!r}", lineno, col + 1)
                if ident in exogenous:
                    raise InvalidModelError(f"line {lineno}: exogenous variable {ident!r} declared twice")
                exogenous.append(ident)
                col += len(item) + 1
            continue
        lhs, eq, rhs = line.partition("=")
        target = lhs.strip()
        if not eq:
            raise DslSyntaxError("expected '<id> = <expr>'", lineno, indent + 1)
        if not _IDENT.match(target):
            raise DslSyntaxError(f"invalid variable name {target!r}", lineno, indent + 1)
        if target in equations:
            raise InvalidModelError(f"line {lineno}: duplicate equation for {target!r}")
        equations[target] = parse_expr(rhs, line=lineno, col0=len(lhs) + 2)
    if name is None:
        raise DslSyntaxError("empty model", 1, 1)
    model = CausalModel.from_equations(name, exogenous, equations)
    model.report.raise_if_invalid()
    return model


def serialize_model(m: CausalModel) -> str:
    lines = [f"model {m.name}"]
    if m.exogenous:
        lines.append("exo " + ", ".join(m.exogenous))
    lines.extend(f"{v} = {format_expr(m.equations[v])}" for v in m.endogenous)
    return "\n".join(lines) + "\n"


@dataclass
class QueryDocument:
    model_ref: Optional[str] = None
    id: Optional[str] = None
    context: dict = field(default_factory=dict)
    context_default: Optional[bool] = None
    cause: dict = field(default_factory=dict)
    phi: Optional[str] = None
    strategy: str = "sat"


_QUERY_KEYS = {"model", "id", "context", "cause", "phi", "strategy"}


def parse_bindings(text: str, what: str, allow_default: bool = False):
    values = {}
    default = None
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        key, eq, val = item.partition("=")
        key, val = key.strip(), val.strip()
        if not eq or val not in ("0", "1"):
            raise InvalidQueryError(f"{what}: expected '<id>=<0|1>', got {item!r}")
        if key == "*" and allow_default:
            default = val == "1"
            continue
        if not _IDENT.match(key):
            raise InvalidQueryError(f"{what}: invalid variable name {key!r}")
        if key in values:
            raise InvalidQueryError(f"{what}: {key!r} assigned twice")
        values[key] = val == "1"
    return values, default


def parse_query_document(text: str) -> QueryDocument:
    doc = QueryDocument()
    seen = set()
    for raw in re.split(r"[\n;]", text):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = re.match(r"([A-Za-z_]+)\s*(?::\s*|\s+)(.*)\Z", line)
        if m is None or m.group(1) not in _QUERY_KEYS:
            raise InvalidQueryError(f"unrecognised query line {line!r}")
        key, value = m.group(1), m.group(2).strip()
        if key in seen:
            raise InvalidQueryError(f"duplicate key {key!r}")
        seen.add(key)
        if key == "model":
            doc.model_ref = value
        elif key == "id":
            doc.id = value
        elif key == "context":
            doc.context, doc.context_default = parse_bindings(value, "context", allow_default=True)
        elif key == "cause":
            doc.cause, _ = parse_bindings(value, "cause")
        elif key == "phi":
            doc.phi = value
        else:
            doc.strategy = value
    return doc


def resolve_query(doc: QueryDocument, m: CausalModel) -> CausalQuery:
    """Bind a query document to model ``m``."""
    exo = set(m.exogenous)
    for u in doc.context:
        if u not in exo:
            raise InvalidQueryError(f"context variable {u!r} is not an exogenous variable of {m.name}")
    context = {}
    for u in m.exogenous:
        if u in doc.context:
            context[u] = doc.context[u]
        elif doc.context_default is not None:
            context[u] = doc.context_default
        else:
            raise InvalidQueryError(f"context has no value for exogenous variable {u!r}")
    if not doc.cause:
        raise InvalidQueryError("query has no cause")
    endo = set(m.endogenous)
    for x in doc.cause:
        if x in exo:
            raise InvalidQueryError(f"exogenous variable {x!r} cannot be part of a cause")
        if x not in endo:
            raise InvalidQueryError(f"cause variable {x!r} is not declared in {m.name}")
    if not doc.phi:
        raise InvalidQueryError("query has no phi")
    try:
        phi = phi_to_formula(parse_expr(doc.phi, events=True))
    except DslSyntaxError as e:
        raise InvalidQueryError(f"phi: {e}") from None
    unknown = sorted(variables(phi) - set(m.variables))
    if unknown:
        raise InvalidQueryError(f"phi mentions undeclared variables {unknown}")
    return CausalQuery(m, context, dict(doc.cause), phi, Strategy.parse(doc.strategy))


def parse_query(text: str, m: CausalModel) -> CausalQuery:
    return resolve_query(parse_query_document(text), m)
