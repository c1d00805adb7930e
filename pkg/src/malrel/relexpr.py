"""Relational expressions: syntax tree, surface-syntax parser, scalar evaluator.

Surface syntax (loosest binding first)::

    e + e          relational sum
    e u e          union
    e & e          intersection
    e o e          composition
    e^k            k-th power (e^0 is the diagonal)
    conv(e) tc(e) bar(e) cc(e) adm(e) tol(e) cg(e)
    compn(e, e, k) k-factor alternating composite
    diagram(R, S, theta, theta1, theta2)
    F(e)           application of a named relation operator
    diag | 0, full, and relation variables
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from . import relations as rel
from .algebra import FiniteAlgebra
from .errors import NotAdmissible, ParseError, UnboundName
from .relations import AdmissibleRelation, BinaryRelation


@dataclass(frozen=True)
class RelVar:
    name: str


@dataclass(frozen=True)
class Const:
    which: str  # "diag" | "full"


UNARY_KINDS = ("conv", "tc", "bar", "adm", "tol", "cg")
BINARY_KINDS = ("compose", "union", "intersect", "sum")


@dataclass(frozen=True)
class Unary:
    kind: str
    arg: "RelExpr"


@dataclass(frozen=True)
class Binary:
    kind: str
    left: "RelExpr"
    right: "RelExpr"


@dataclass(frozen=True)
class ComposeN:
    left: "RelExpr"
    right: "RelExpr"
    n: int


@dataclass(frozen=True)
class Power:
    arg: "RelExpr"
    n: int


@dataclass(frozen=True)
class OperatorApp:
    name: str
    arg: "RelExpr"


@dataclass(frozen=True)
class Diagram:
    """Pairs ``(a, c)`` with ``a R b, b theta1 c, a theta2 d, d S c, b theta d`` for some ``b, d``."""

    R: "RelExpr"
    S: "RelExpr"
    theta: "RelExpr"
    theta1: "RelExpr"
    theta2: "RelExpr"


RelExpr = RelVar | Const | Unary | Binary | ComposeN | Power | OperatorApp | Diagram


def children(e: RelExpr) -> tuple:
    if isinstance(e, (Unary, Power, OperatorApp)):
        return (e.arg,)
    if isinstance(e, (Binary, ComposeN)):
        return (e.left, e.right)
    if isinstance(e, Diagram):
        return (e.R, e.S, e.theta, e.theta1, e.theta2)
    return ()


def free_variables(e: RelExpr) -> frozenset[str]:
    if isinstance(e, RelVar):
        return frozenset([e.name])
    out: frozenset[str] = frozenset()
    for c in children(e):
        out |= free_variables(c)
    return out


def operator_names(e: RelExpr) -> frozenset[str]:
    out = frozenset([e.name]) if isinstance(e, OperatorApp) else frozenset()
    for c in children(e):
        out |= operator_names(c)
    return out


_PREC = {"sum": 0, "union": 1, "intersect": 2, "compose": 3}
_SYM = {"sum": " + ", "union": " u ", "intersect": " & ", "compose": " o "}


def format_expr(e: RelExpr, _parent: int = -1) -> str:
    if isinstance(e, RelVar):
        return e.name
    if isinstance(e, Const):
        return e.which
    if isinstance(e, Unary):
        return f"{e.kind}({format_expr(e.arg)})"
    if isinstance(e, OperatorApp):
        return f"{e.name}({format_expr(e.arg)})"
    if isinstance(e, ComposeN):
        return f"compn({format_expr(e.left)}, {format_expr(e.right)}, {e.n})"
    if isinstance(e, Power):
        return f"{format_expr(e.arg, 99)}^{e.n}"
    if isinstance(e, Diagram):
        return "diagram(" + ", ".join(format_expr(c) for c in children(e)) + ")"
    p = _PREC[e.kind]
    text = f"{format_expr(e.left, p)}{_SYM[e.kind]}{format_expr(e.right, p + 1)}"
    return f"({text})" if p < _parent else text


# --- parser -------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>[()^,+&]))")
_RESERVED = {"o", "u"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", f"col {pos + 1}")
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return out


def parse_expr(text: str) -> RelExpr:
    """Parse the surface syntax above into a :data:`RelExpr` tree."""
    toks = _tokenize(text)
    i = 0

    def peek(value=None):
        if i < len(toks) and (value is None or toks[i][1] == value):
            return toks[i]
        return None

    def where() -> str:
        return f"col {toks[i][2] + 1}" if i < len(toks) else f"col {len(text) + 1}"

    def expect(value):
        nonlocal i
        if not peek(value):
            got = toks[i][1] if i < len(toks) else "end of input"
            raise ParseError(f"expected {value!r}, got {got!r}", where())
        i += 1

    def binary_level(kind, sym, sub):
        def parse():
            nonlocal i
            left = sub()
            while peek(sym):
                i += 1
                left = Binary(kind, left, sub())
            return left
        return parse

    def integer():
        nonlocal i
        if i < len(toks) and toks[i][0] == "num":
            i += 1
            return int(toks[i - 1][1])
        raise ParseError("expected an integer", where())

    def postfix():
        nonlocal i
        e = primary()
        while peek("^"):
            i += 1
            e = Power(e, integer())
        return e

    def primary():
        nonlocal i
        if i >= len(toks):
            raise ParseError("unexpected end of expression", where())
        kind, value, col = toks[i]
        if value == "(":
            i += 1
            e = top()
            expect(")")
            return e
        if kind == "num":
            if value != "0":
                raise ParseError(f"unexpected number {value}", f"col {col + 1}")
            i += 1
            return Const("diag")
        if kind != "id" or value in _RESERVED:
            raise ParseError(f"unexpected {value!r}", f"col {col + 1}")
        i += 1
        if not peek("("):
            if value in ("diag", "full"):
                return Const(value)
            return RelVar(value)
        i += 1
        if value == "compn":
            a = top(); expect(",")
            b = top(); expect(",")
            k = integer(); expect(")")
            if k < 1:
                raise ParseError("compn needs at least one factor", f"col {col + 1}")
            return ComposeN(a, b, k)
        if value == "diagram":
            args = [top()]
            for _ in range(4):
                expect(",")
                args.append(top())
            expect(")")
            return Diagram(*args)
        arg = top()
        expect(")")
        if value == "cc":
            value = "bar"
        if value in UNARY_KINDS:
            return Unary(value, arg)
        return OperatorApp(value, arg)

    comp = binary_level("compose", "o", postfix)
    inter = binary_level("intersect", "&", comp)
    uni = binary_level("union", "u", inter)
    top = binary_level("sum", "+", uni)

    e = top()
    if i != len(toks):
        raise ParseError(f"trailing input {toks[i][1]!r}", where())
    return e


# --- scalar evaluation --------------------------------------------------------


class Evaluator:
    """Evaluates expressions on one algebra, memoising every subexpression.

    In strict mode an operator applied to a relation that is not reflexive
    and compatible raises :class:`NotAdmissible`; in lenient mode the
    argument is replaced by the admissible relation it generates and the
    event is appended to :attr:`coercions`.
    """

    def __init__(self, alg: FiniteAlgebra, ops: Mapping | None = None, strict: bool = True):
        self.alg = alg
        self.ops = dict(ops or {})
        self.strict = strict
        self.coercions: list[tuple[str, BinaryRelation]] = []
        self.evaluations = 0
        self._cache: dict = {}
        self._free: dict[int, tuple[str, ...]] = {}
        self._keep: list = []

    def _free_of(self, e) -> tuple[str, ...]:
        fv = self._free.get(id(e))
        if fv is None:
            fv = tuple(sorted(free_variables(e)))
            self._free[id(e)] = fv
            self._keep.append(e)
        return fv

    def evaluate(self, e: RelExpr, env: Mapping[str, BinaryRelation]) -> BinaryRelation:
        self.evaluations += 1
        return self._eval(e, env)

    def _eval(self, e, env) -> BinaryRelation:
        fv = self._free_of(e)
        try:
            key = (id(e), tuple(env[v].bits for v in fv))
        except KeyError as exc:
            raise UnboundName(f"unbound relation variable {exc.args[0]!r}") from None
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = self._compute(e, env)
        self._cache[key] = out
        return out

    def _compute(self, e, env) -> BinaryRelation:
        n = self.alg.size
        alg = self.alg
        if isinstance(e, RelVar):
            R = env[e.name]
            if R.n != n:
                raise rel.CarrierMismatch(f"{e.name} lives on {R.n} elements, algebra has {n}")
            return R
        if isinstance(e, Const):
            return BinaryRelation.diagonal(n) if e.which == "diag" else BinaryRelation.full(n)
        if isinstance(e, Unary):
            a = self._eval(e.arg, env)
            if e.kind == "conv":
                return rel.converse(a)
            if e.kind == "tc":
                return rel.transitive_closure(a)
            if e.kind == "bar":
                return rel.compatible_closure(alg, a)
            if e.kind == "adm":
                return rel.generated_admissible(alg, a)
            if e.kind == "tol":
                return rel.tolerance_closure(alg, a)
            if e.kind == "cg":
                return rel.congruence_closure(alg, a)
        if isinstance(e, Binary):
            a = self._eval(e.left, env)
            b = self._eval(e.right, env)
            if e.kind == "compose":
                return rel.compose(a, b)
            if e.kind == "union":
                return a | b
            if e.kind == "intersect":
                return a & b
            if e.kind == "sum":
                return rel.rel_sum(a, b)
        if isinstance(e, ComposeN):
            return rel.compose_n(self._eval(e.left, env), self._eval(e.right, env), e.n)
        if isinstance(e, Power):
            return rel.power(self._eval(e.arg, env), e.n)
        if isinstance(e, OperatorApp):
            return self._apply(e.name, self._eval(e.arg, env))
        if isinstance(e, Diagram):
            return diagram_relation(*(self._eval(c, env) for c in children(e)))
        raise TypeError(f"not a relational expression: {e!r}")

    def _apply(self, name: str, R: BinaryRelation) -> BinaryRelation:
        from .operators import apply_operator

        if name not in self.ops:
            raise UnboundName(f"unbound operator {name!r}")
        if isinstance(R, AdmissibleRelation) and R.algebra == self.alg:
            adm = R
        elif rel.is_admissible(self.alg, R):
            adm = AdmissibleRelation(self.alg, R, check=False)
        elif self.strict:
            raise NotAdmissible(f"operator {name} applied to a non-admissible relation {sorted(R.pairs())}")
        else:
            adm = rel.generated_admissible(self.alg, R)
            self.coercions.append((name, R))
        return apply_operator(self.ops[name], self.alg, adm)


def diagram_relation(R, S, theta, theta1, theta2) -> BinaryRelation:
    n = R.n
    for other in (S, theta, theta1, theta2):
        R._check(other)
    out = 0
    for a, b in R.pairs():
        for d in range(n):
            if (a, d) not in theta2 or (b, d) not in theta:
                continue
            for c in range(n):
                if (b, c) in theta1 and (d, c) in S:
                    out |= 1 << (a * n + c)
    return BinaryRelation(n, out)


def eval_rel_expr(expr: RelExpr | str, env: Mapping[str, BinaryRelation], alg: FiniteAlgebra,
                  ops: Mapping | None = None, strict: bool = True) -> BinaryRelation:
    if isinstance(expr, str):
        expr = parse_expr(expr)
    return Evaluator(alg, ops, strict).evaluate(expr, env)
