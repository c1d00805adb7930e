"""Searching for terms that are Mal'cev modulo a pair of relation operators.

A ternary term ``t`` is Mal'cev modulo ``F`` and ``G`` on ``A`` when
``a F(R) t(a,b,b)`` and ``t(a,a,b) G(R) b`` for every admissible ``R`` and
every ``a R b``. For monotone operators with the homomorphism property this
is decided on the free algebras of the variety generated by ``A``:

* route ``iv``:  ``x F(S) t(x,y,y)`` and ``t(x,x,y) G(S) y`` on the
  2-generated free algebra, ``S`` generated by ``(x, y)``;
* route ``x``:   ``S <= F(S) o S^- o G(S)`` on the same ``S``;
* route ``vii``: ``S o S <= F(S) o S o G(S)`` on the 3-generated free
  algebra, ``S`` generated by ``(x, y)`` and ``(y, z)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import relations as rel
from .algebra import FiniteAlgebra, FreeAlgebra, _closure, free_algebra, induced_subalgebra, \
    enumerate_subuniverses, product_power, term_operation
from .config import DEFAULT_LIMITS, Limits
from .operators import RelationOperator, apply_operator
from .relations import AdmissibleRelation, BinaryRelation
from .terms import Term, Var, format_term, permute_variables, substitute


@dataclass
class MalcevWitness:
    term: Term
    route: str
    intermediate: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "route": self.route,
            "term": format_term(self.term),
            "intermediate": {k: format_term(v) if not isinstance(v, (int, str)) else v
                             for k, v in self.intermediate.items()},
        }


@dataclass(frozen=True, eq=False)
class FreeRelation:
    """A relation on a free algebra generated by named pairs, with witnesses.

    ``witnesses[(p, q)]`` is a term in ``len(slots)`` variables: evaluating
    it at the first coordinates of the slot pairs gives ``p`` and at the
    second coordinates gives ``q``.
    """

    free: FreeAlgebra
    slots: tuple[tuple[int, int], ...]
    relation: AdmissibleRelation
    witnesses: Mapping[tuple[int, int], Term]


def generated_free_relation(X: FreeAlgebra, slots: Sequence[tuple[int, int]],
                            limits: Limits = DEFAULT_LIMITS) -> FreeRelation:
    alg = X.algebra
    m = alg.size
    tables = [op.table for op in alg.ops]

    def apply(op_i, args):
        tab = tables[op_i]
        left = right = 0
        for c in args:
            a, b = divmod(c, m)
            left = left * m + a
            right = right * m + b
        return tab[left] * m + tab[right]

    codes, wits = _closure(
        [p * m + q for p, q in slots], alg.signature, apply,
        want_witnesses=True, cap=min(m * m, limits.max_free_elements) + 1, what="free relation pairs",
    )
    bits = 0
    for c in codes:
        bits |= 1 << c
    R = BinaryRelation(m, bits)
    if not R.is_reflexive():
        raise AssertionError("slot set does not generate the diagonal")
    return FreeRelation(
        free=X,
        slots=tuple(slots),
        relation=AdmissibleRelation(alg, R, check=False),
        witnesses={divmod(c, m): w for c, w in zip(codes, wits)},
    )


@lru_cache(maxsize=256)
def _free(alg: FiniteAlgebra, k: int, limits: Limits) -> FreeAlgebra:
    return free_algebra(alg, k, limits)


@lru_cache(maxsize=256)
def _principal(alg: FiniteAlgebra, limits: Limits) -> FreeRelation:
    return principal_free_relation(_free(alg, 2, limits), limits)


@lru_cache(maxsize=256)
def _two_step(alg: FiniteAlgebra, limits: Limits) -> FreeRelation:
    X = _free(alg, 3, limits)
    x, y, z = X.generators
    return generated_free_relation(X, [(x, x), (y, y), (z, z), (x, y), (y, z)], limits)


def principal_free_relation(X: FreeAlgebra, limits: Limits = DEFAULT_LIMITS) -> FreeRelation:
    """Least admissible reflexive ``S`` on ``X`` (2 generators) containing ``(x, y)``.

    Generator slots are ``((x, y), (x, x), (y, y))``; the diagonal pairs
    generate the whole diagonal because every element is a term in x, y.
    """
    if X.generator_count != 2:
        raise ValueError("principal_free_relation needs the 2-generated free algebra")
    x, y = X.generators
    return generated_free_relation(X, [(x, y), (x, x), (y, y)], limits)


def _search_iv(S: FreeRelation, A: BinaryRelation, B: BinaryRelation) -> tuple[int, int] | None:
    """First ``(p, q)`` with ``x A p``, ``q S p`` and ``q B y``."""
    x, y = S.free.generators
    m = S.free.algebra.size
    for p in range(m):
        if (x, p) not in A:
            continue
        for q in range(m):
            if (q, p) in S.relation and (q, y) in B:
                return p, q
    return None


def _extract_iv(S: FreeRelation, p: int, q: int, route: str) -> MalcevWitness:
    # u has slots ((x,y),(x,x),(y,y)): q = u(x,x,y), p = u(y,x,y);
    # t(z1,z2,z3) := u(z2,z1,z3) gives t(x,y,y) = p and t(x,x,y) = q
    u = S.witnesses[(q, p)]
    t = permute_variables(u, [1, 0, 2])
    X = S.free
    return MalcevWitness(t, route, {
        "t(x,y,y)": X.witnesses[p], "t(x,x,y)": X.witnesses[q], "u": u,
    })


def find_term_cond_iv(alg: FiniteAlgebra, F: RelationOperator, G: RelationOperator,
                      limits: Limits = DEFAULT_LIMITS) -> MalcevWitness | None:
    S = _principal(alg, limits)
    X = S.free.algebra
    A = apply_operator(F, X, S.relation)
    B = apply_operator(G, X, S.relation)
    hit = _search_iv(S, A, B)
    return None if hit is None else _extract_iv(S, *hit, "iv")


def check_cond_x(alg: FiniteAlgebra, F: RelationOperator, G: RelationOperator, full: bool = False,
                 limits: Limits = DEFAULT_LIMITS) -> MalcevWitness | None:
    """``(x, y)`` (or, with ``full``, all of ``S``) lies in ``F(S) o S^- o G(S)``."""
    S = _principal(alg, limits)
    X = S.free.algebra
    A = apply_operator(F, X, S.relation)
    B = apply_operator(G, X, S.relation)
    T = rel.compose(rel.compose(A, rel.converse(S.relation)), B)
    x, y = S.free.generators
    holds = S.relation <= T if full else (x, y) in T
    if not holds:
        return None
    hit = _search_iv(S, A, B)
    if hit is None:
        raise AssertionError("(x, y) in F(S) o S^- o G(S) but no middle pair found")
    return _extract_iv(S, *hit, "x")


def check_cond_vii(alg: FiniteAlgebra, F: RelationOperator, G: RelationOperator, full: bool = False,
                   limits: Limits = DEFAULT_LIMITS) -> MalcevWitness | None:
    """``(x, z)`` (or all of ``S o S``) lies in ``F(S) o S o G(S)`` on the 3-generated free algebra.

    A pair ``(t1, t2)`` of ``S`` has a 5-ary witness ``t'`` with
    ``t1 = t'(x,y,z,x,y)`` and ``t2 = t'(x,y,z,y,z)``; the extracted term is
    ``t(x,y,z) = t'(x,y,z,x,z)``.
    """
    S = _two_step(alg, limits)
    Xa = S.free.algebra
    A = apply_operator(F, Xa, S.relation)
    B = apply_operator(G, Xa, S.relation)
    x, y, z = S.free.generators
    if full:
        T = rel.compose(rel.compose(A, S.relation), B)
        if not rel.compose(S.relation, S.relation) <= T:
            return None
    m = Xa.size
    for t1 in range(m):
        if (x, t1) not in A:
            continue
        for t2 in range(m):
            if (t1, t2) in S.relation and (t2, z) in B:
                tp = S.witnesses[(t1, t2)]
                t = substitute(tp, [Var(0), Var(1), Var(2), Var(0), Var(2)])
                W = S.free.witnesses
                return MalcevWitness(t, "vii", {"t1": W[t1], "t2": W[t2], "t'": tp})
    return None


ROUTES = {"iv": find_term_cond_iv, "vii": check_cond_vii, "x": check_cond_x}


# --- verification on concrete algebras --------------------------------------------


@dataclass
class MalcevReport:
    term: str
    operators: tuple[str, str]
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "term": self.term,
            "operators": list(self.operators),
            "status": "pass" if self.passed else "fail",
            "checked": self.checked,
            "violations": self.violations,
        }


def verify_malcev_term(alg_family: Iterable[FiniteAlgebra], t: Term, F: RelationOperator, G: RelationOperator,
                       rel_source: Mapping | Callable | None = None) -> MalcevReport:
    """Check the defining memberships for every algebra, relation and related pair."""
    report = MalcevReport(format_term(t), (F.name, G.name))
    for alg in alg_family:
        n = alg.size
        top = term_operation(alg, t, 3)
        if rel_source is None:
            rels = rel.enumerate_admissible(alg)
        elif callable(rel_source):
            rels = rel_source(alg)
        else:
            rels = rel_source[alg]
        for R in rels:
            R = R if isinstance(R, AdmissibleRelation) and R.algebra == alg else AdmissibleRelation(alg, R)
            fR = apply_operator(F, alg, R)
            gR = apply_operator(G, alg, R)
            for a, b in R.pairs():
                report.checked += 1
                tabb = top[(a * n + b) * n + b]
                taab = top[(a * n + a) * n + b]
                bad = []
                if (a, tabb) not in fR:
                    bad.append("F")
                if (taab, b) not in gR:
                    bad.append("G")
                if bad:
                    report.violations.append({
                        "algebra": alg.name, "R": [list(p) for p in sorted(R.pairs())],
                        "a": a, "b": b, "t(a,b,b)": tabb, "t(a,a,b)": taab, "fails": bad,
                    })
    return report


def malcev_family(alg: FiniteAlgebra, limits: Limits = DEFAULT_LIMITS) -> tuple[list[FiniteAlgebra], dict]:
    """``alg``, its proper subalgebras and ``alg**2``, with the relations to test on each.

    On the square only relations generated by a single pair are used.
    """
    family = [alg]
    for u in enumerate_subuniverses(alg):
        if len(u) < alg.size:
            family.append(induced_subalgebra(alg, u))
    sq = product_power(alg, 2, limits)
    family.append(sq)
    rels = {a: rel.enumerate_admissible(a) for a in family if a is not sq}
    N = sq.size
    singles = {rel.generated_admissible(sq, [(p, q)]) for p in range(N) for q in range(N)}
    rels[sq] = sorted(singles, key=BinaryRelation.sort_key)
    return family, rels


def malcev_term_tables(alg: FiniteAlgebra, F: RelationOperator, G: RelationOperator,
                       limits: Limits = DEFAULT_LIMITS) -> list[int]:
    """Brute force: indices of ternary term operations of ``alg`` that are Mal'cev modulo F, G.

    Candidates are all elements of the 3-generated free algebra (every
    ternary term operation); each is checked against the definition on
    ``alg`` itself for every admissible relation.
    """
    X = _free(alg, 3, limits)
    n = alg.size
    T = np.asarray(X.elements, dtype=np.int64).reshape(len(X), n**3)
    ok = np.ones(len(X), dtype=bool)
    for R in rel.enumerate_admissible(alg):
        fR = apply_operator(F, alg, R).to_matrix()
        gR = apply_operator(G, alg, R).to_matrix()
        for a, b in R.pairs():
            ok &= fR[a, T[:, (a * n + b) * n + b]]
            ok &= gR[T[:, (a * n + a) * n + b], b]
    return [int(i) for i in np.nonzero(ok)[0]]


def malcev_term_on_algebra(alg: FiniteAlgebra, F: RelationOperator, G: RelationOperator,
                           limits: Limits = DEFAULT_LIMITS) -> Term | None:
    """A term Mal'cev modulo ``F_A`` and ``G_A`` on ``alg`` alone, by exhaustive search."""
    hits = malcev_term_tables(alg, F, G, limits)
    return _free(alg, 3, limits).witnesses[hits[0]] if hits else None
