"""Relation operators ``Adm(A) -> Adm(A)`` and checks of their global properties.

An operator is a description (a kind plus parameters) that can be
instantiated on any algebra, which is how a global operator on the variety
generated by a finite algebra is realised here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from . import relations as rel
from .algebra import FiniteAlgebra
from .errors import NotAdmissible, ParseError
from .relations import AdmissibleRelation, BinaryRelation


class Kind(str, Enum):
    CONST_DIAG = "diag"
    IDENTITY = "id"
    CONST_FULL = "full"
    TRANSITIVE = "tc"
    TOLERANCE = "tol"
    CONGRUENCE = "cg"
    CONVERSE = "conv"
    POWER = "pow"
    SUM_WITH_CONVERSE = "sumconv"
    COMPOSITE = "composite"
    POINTWISE = "pointwise"
    SQUARE = "sq"
    EXPR = "expr"
    CUSTOM = "custom"


@dataclass(frozen=True)
class RelationOperator:
    name: str
    kind: Kind
    k: int = 0
    parts: tuple["RelationOperator", ...] = ()
    expr: object = None
    func: Callable[[FiniteAlgebra, AdmissibleRelation], BinaryRelation] | None = field(
        default=None, compare=False
    )

    def __str__(self):
        return self.name

    def __call__(self, alg: FiniteAlgebra, R) -> AdmissibleRelation:
        return apply_operator(self, alg, R)


DIAG = RelationOperator("diag", Kind.CONST_DIAG)
IDENTITY = RelationOperator("id", Kind.IDENTITY)
FULL = RelationOperator("full", Kind.CONST_FULL)
TC = RelationOperator("tc", Kind.TRANSITIVE)
TOL = RelationOperator("tol", Kind.TOLERANCE)
CG = RelationOperator("cg", Kind.CONGRUENCE)
CONV = RelationOperator("conv", Kind.CONVERSE)
SUM_CONV = RelationOperator("sumconv", Kind.SUM_WITH_CONVERSE)

BUILTINS = {op.name: op for op in (DIAG, IDENTITY, FULL, TC, TOL, CG, CONV, SUM_CONV)}
# the closure-style operators the corpus sweeps quantify over
CORE_OPERATORS = (DIAG, IDENTITY, TC, TOL, CG)


def power_operator(k: int) -> RelationOperator:
    if k < 0:
        raise ValueError("power must be non-negative")
    return RelationOperator(f"pow:{k}", Kind.POWER, k=k)


def composite(*ops: RelationOperator) -> RelationOperator:
    """``composite(F1, F2)(R) = F1(F2(R))``."""
    return RelationOperator(".".join(_wrap(o, "*.") for o in ops), Kind.COMPOSITE, parts=tuple(ops))


def pointwise_compose(*ops: RelationOperator) -> RelationOperator:
    """``pointwise_compose(F1, F2)(R) = F1(R) o F2(R)``."""
    return RelationOperator("*".join(_wrap(o, "*") for o in ops), Kind.POINTWISE, parts=tuple(ops))


def square_operator(op: RelationOperator) -> RelationOperator:
    """``R -> op(op(R))``."""
    return RelationOperator(f"sq({op.name})", Kind.SQUARE, parts=(op,))


def triple_pointwise(op: RelationOperator) -> RelationOperator:
    """``R -> C o C o C`` with ``C = op(op(R))``."""
    sq = square_operator(op)
    return pointwise_compose(sq, sq, sq)


def expr_operator(text: str, name: str | None = None) -> RelationOperator:
    """Operator given by an expression template in the single variable ``R``."""
    from .relexpr import free_variables, operator_names, parse_expr

    e = parse_expr(text)
    extra = free_variables(e) - {"R"}
    if extra:
        raise ParseError(f"operator template may only use the variable R, found {sorted(extra)}", "expr")
    inner = operator_names(e) - set(BUILTINS)
    if inner:
        raise ParseError(f"unknown operator(s) {sorted(inner)} in template", "expr")
    return RelationOperator(name or f"expr:{text}", Kind.EXPR, expr=e)


def custom_operator(name: str, func) -> RelationOperator:
    return RelationOperator(name, Kind.CUSTOM, func=func)


def _wrap(op: RelationOperator, seps: str) -> str:
    return f"({op.name})" if any(s in op.name for s in seps) and op.kind not in (Kind.EXPR, Kind.CUSTOM) else op.name


def _full_if_nontrivial(alg, R):
    n = alg.size
    if R == BinaryRelation.diagonal(n) or R == BinaryRelation.full(n):
        return BinaryRelation.diagonal(n)
    return BinaryRelation.full(n)


def _diag_unless_full(alg, R):
    n = alg.size
    return BinaryRelation.full(n) if R == BinaryRelation.full(n) else BinaryRelation.diagonal(n)


# Named operators that are not expressible as templates. The first one is
# deliberately non-monotone (it sends the full relation down to the diagonal).
NAMED_CUSTOM = {
    "full-if-nontrivial": custom_operator("expr:full-if-nontrivial", _full_if_nontrivial),
    "diag-unless-full": custom_operator("expr:diag-unless-full", _diag_unless_full),
}


# --- application -------------------------------------------------------------


def _as_admissible(alg: FiniteAlgebra, R) -> AdmissibleRelation:
    if isinstance(R, AdmissibleRelation) and R.algebra == alg:
        return R
    return AdmissibleRelation(alg, R)


def apply_operator(op: RelationOperator, alg: FiniteAlgebra, R) -> AdmissibleRelation:
    """Evaluate ``op`` at the admissible relation ``R`` of ``alg``.

    The result is checked to be reflexive and compatible; a violation is a
    hard error naming the operator.
    """
    R = _as_admissible(alg, R)
    return _apply_cached(op, alg, R.bits)


@lru_cache(maxsize=1 << 16)
def _apply_cached(op: RelationOperator, alg: FiniteAlgebra, bits: int) -> AdmissibleRelation:
    R = AdmissibleRelation(alg, BinaryRelation(alg.size, bits), check=False)
    out = _dispatch(op, alg, R)
    if isinstance(out, AdmissibleRelation) and out.algebra == alg and op.kind not in (Kind.CUSTOM, Kind.EXPR):
        return out
    try:
        return AdmissibleRelation(alg, out)
    except NotAdmissible as exc:
        raise NotAdmissible(f"operator {op.name!r} produced a non-admissible relation on {alg.name!r}: {exc}") from None


def _dispatch(op: RelationOperator, alg: FiniteAlgebra, R: AdmissibleRelation) -> BinaryRelation:
    n = alg.size
    kind = op.kind
    if kind is Kind.CONST_DIAG:
        return rel.generated_admissible(alg)
    if kind is Kind.IDENTITY:
        return R
    if kind is Kind.CONST_FULL:
        return AdmissibleRelation(alg, BinaryRelation.full(n), check=False)
    if kind is Kind.TRANSITIVE:
        # transitive closure of a reflexive compatible relation is compatible
        return AdmissibleRelation(alg, rel.transitive_closure(R), check=False)
    if kind is Kind.TOLERANCE:
        return rel.tolerance_closure(alg, R)
    if kind is Kind.CONGRUENCE:
        return rel.congruence_closure(alg, R)
    if kind is Kind.CONVERSE:
        return AdmissibleRelation(alg, rel.converse(R), check=False)
    if kind is Kind.POWER:
        return AdmissibleRelation(alg, rel.power(R, op.k), check=False)
    if kind is Kind.SUM_WITH_CONVERSE:
        return AdmissibleRelation(alg, rel.rel_sum(R, rel.converse(R)), check=False)
    if kind is Kind.COMPOSITE:
        out = R
        for part in reversed(op.parts):
            out = apply_operator(part, alg, out)
        return out
    if kind is Kind.POINTWISE:
        vals = [apply_operator(part, alg, R) for part in op.parts]
        out = vals[0]
        for v in vals[1:]:
            out = rel.compose(out, v)
        return AdmissibleRelation(alg, out, check=False)
    if kind is Kind.SQUARE:
        (inner,) = op.parts
        return apply_operator(inner, alg, apply_operator(inner, alg, R))
    if kind is Kind.EXPR:
        from .relexpr import Evaluator

        return Evaluator(alg, BUILTINS).evaluate(op.expr, {"R": R})
    if kind is Kind.CUSTOM:
        return op.func(alg, R)
    raise ValueError(f"unknown operator kind {kind!r}")


# --- surface syntax -------------------------------------------------------------


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def parse_operator(text: str) -> RelationOperator:
    """Parse ``diag``, ``id``, ``full``, ``tc``, ``tol``, ``cg``, ``conv``,
    ``sumconv``, ``pow:k``, ``expr:<template in R>``, ``sq(F)``, ``F.G``
    (composition) and ``F*G*H`` (pointwise composition)."""
    text = text.strip()
    if not text:
        raise ParseError("empty operator", "operator")
    if text.startswith("expr:"):
        body = text[5:].strip()
        if body in NAMED_CUSTOM:
            return NAMED_CUSTOM[body]
        return expr_operator(body)
    if text.count("(") != text.count(")"):
        raise ParseError("unbalanced parentheses", f"operator {text!r}")
    star = _split_top(text, "*")
    if len(star) > 1:
        return pointwise_compose(*(parse_operator(p) for p in star))
    dot = _split_top(text, ".")
    if len(dot) > 1:
        return composite(*(parse_operator(p) for p in dot))
    if text.startswith("(") and text.endswith(")"):
        return parse_operator(text[1:-1])
    if text.startswith("sq(") and text.endswith(")"):
        return square_operator(parse_operator(text[3:-1]))
    if text.startswith("pow:"):
        try:
            return power_operator(int(text[4:]))
        except ValueError:
            raise ParseError(f"bad power {text[4:]!r}", f"operator {text!r}") from None
    if text in BUILTINS:
        return BUILTINS[text]
    raise ParseError(f"unknown operator {text!r}", "operator")


# --- property checks ------------------------------------------------------------


@dataclass
class PropertyReport:
    property: str
    operator: str
    checked: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "operator": self.operator,
            "status": "pass" if self.passed else "fail",
            "checked": self.checked,
            "counterexamples": self.counterexamples,
        }


def _pairs(R) -> list:
    return [list(p) for p in sorted(R.pairs())]


def check_monotone(op: RelationOperator, alg: FiniteAlgebra,
                   relation_pairs: Iterable[tuple[BinaryRelation, BinaryRelation]] | None = None) -> PropertyReport:
    """``op(R) <= op(S)`` for each supplied ``R <= S`` (default: all admissible pairs)."""
    if relation_pairs is None:
        adm = rel.enumerate_admissible(alg)
        relation_pairs = [(R, S) for R in adm for S in adm if R <= S]
    report = PropertyReport("monotone", op.name)
    for R, S in relation_pairs:
        if not R <= S:
            raise ValueError("check_monotone needs pairs with R <= S")
        report.checked += 1
        fR, fS = apply_operator(op, alg, R), apply_operator(op, alg, S)
        if not fR <= fS:
            report.counterexamples.append({
                "algebra": alg.name, "R": _pairs(R), "S": _pairs(S),
                "F(R)": _pairs(fR), "F(S)": _pairs(fS),
            })
    return report


def check_hom_property(op: RelationOperator, homs: Sequence, sample_rels: Mapping | Callable | None = None) -> PropertyReport:
    """``phi(F_B(R)) <= F_A(phi(R))`` for every homomorphism ``phi: B -> A``.

    ``sample_rels`` maps a source algebra to the admissible relations to try
    (a dict or a callable); by default all admissible relations are used.
    """
    from .homs import map_relation

    report = PropertyReport("homomorphism", op.name)
    for h in homs:
        if sample_rels is None:
            rels = rel.enumerate_admissible(h.source)
        elif callable(sample_rels):
            rels = sample_rels(h.source)
        else:
            rels = sample_rels[h.source]
        for R in rels:
            report.checked += 1
            lhs = map_relation(h, apply_operator(op, h.source, R))
            rhs = apply_operator(op, h.target, map_relation(h, R))
            if not lhs <= rhs:
                report.counterexamples.append({
                    "source": h.source.name, "target": h.target.name, "map": list(h.map),
                    "R": _pairs(R), "phi(F(R))": _pairs(lhs), "F(phi(R))": _pairs(rhs),
                })
    return report
