from __future__ import annotations

import oracles
import pytest

from malrel import (
    BUILTINS, CG, CORE_OPERATORS, DIAG, FULL, IDENTITY, TC, TOL, BinaryRelation, NotAdmissible, ParseError,
    apply_operator, check_hom_property, check_monotone, composite, enumerate_admissible,
    enumerate_homomorphisms, parse_operator, pointwise_compose, triple_pointwise,
)
from malrel.operators import NAMED_CUSTOM, custom_operator, expr_operator, power_operator, square_operator

from conftest import CHAIN3, CORPUS

P = oracles.pairs_of
ALGS = sorted(CORPUS.values(), key=lambda a: a.name) + [CHAIN3]


@pytest.mark.parametrize("alg", ALGS, ids=lambda a: a.name)
def test_builtins_against_oracle(alg):
    n = alg.size
    for R in enumerate_admissible(alg):
        pr = P(R)
        assert P(apply_operator(DIAG, alg, R)) == oracles.diag(n)
        assert P(apply_operator(IDENTITY, alg, R)) == pr
        assert P(apply_operator(FULL, alg, R)) == oracles.full(n)
        assert P(apply_operator(TC, alg, R)) == oracles.tc(pr)
        assert P(apply_operator(TOL, alg, R)) == oracles.tol(alg, pr)
        assert P(apply_operator(CG, alg, R)) == oracles.cg(alg, pr)
        assert P(apply_operator(BUILTINS["conv"], alg, R)) == oracles.converse(pr)
        assert P(apply_operator(BUILTINS["sumconv"], alg, R)) == oracles.cg(alg, pr)


@pytest.mark.parametrize("alg", ALGS, ids=lambda a: a.name)
def test_combinators(alg):
    for R in enumerate_admissible(alg):
        pr = P(R)
        ff = P(apply_operator(TC, alg, apply_operator(TC, alg, R)))
        assert P(apply_operator(square_operator(TC), alg, R)) == ff
        assert P(apply_operator(triple_pointwise(TOL), alg, R)) == oracles.compose_n(
            oracles.tol(alg, oracles.tol(alg, pr)), oracles.tol(alg, oracles.tol(alg, pr)), 3)
        assert P(apply_operator(composite(CG, BUILTINS["conv"]), alg, R)) == oracles.cg(alg, oracles.converse(pr))
        assert P(apply_operator(pointwise_compose(IDENTITY, BUILTINS["conv"]), alg, R)) == oracles.compose(
            pr, oracles.converse(pr))
        assert P(apply_operator(power_operator(2), alg, R)) == oracles.compose(pr, pr)
        assert P(apply_operator(expr_operator("R o conv(R)"), alg, R)) == oracles.compose(pr, oracles.converse(pr))


def test_operator_rejects_non_admissible_input(sl2):
    with pytest.raises(NotAdmissible):
        apply_operator(TC, sl2, BinaryRelation.from_pairs(2, [(0, 1)]))


def test_custom_operator_output_is_checked(sl2):
    bad = custom_operator("bad", lambda alg, R: BinaryRelation.empty(alg.size))
    with pytest.raises(NotAdmissible, match="bad"):
        apply_operator(bad, sl2, BinaryRelation.diagonal(2))


@pytest.mark.parametrize("text,name", [
    ("tc", "tc"), ("id*tc", "id*tc"), ("tc.tol", "tc.tol"), ("sq(cg)", "sq(cg)"), ("pow:3", "pow:3"),
    ("(tc.tol)*id", "tc.tol*id"), ("expr:R o R", "expr:R o R"), ("expr:full-if-nontrivial", "expr:full-if-nontrivial"),
])
def test_parse_operator(text, name):
    assert parse_operator(text).name == name


@pytest.mark.parametrize("text", ["", "nope", "pow:x", "sq(tc", "expr:R o S", "expr:H(R)"])
def test_parse_operator_errors(text):
    with pytest.raises(ParseError):
        parse_operator(text)


def test_parse_operator_semantics(sl3):
    for R in enumerate_admissible(sl3):
        assert apply_operator(parse_operator("tc.conv"), sl3, R) == apply_operator(composite(TC, BUILTINS["conv"]), sl3, R)


@pytest.mark.parametrize("op", list(BUILTINS.values()) + [triple_pointwise(TC), square_operator(TOL)],
                         ids=lambda o: o.name)
@pytest.mark.parametrize("alg", ALGS, ids=lambda a: a.name)
def test_builtins_are_monotone(op, alg):
    rep = check_monotone(op, alg)
    assert rep.passed and rep.checked > 0


def test_full_if_nontrivial_is_not_monotone(sl2):
    # Delta < R < full maps to full, but full maps back to Delta
    rep = check_monotone(NAMED_CUSTOM["full-if-nontrivial"], sl2)
    assert not rep.passed
    cex = rep.counterexamples[0]
    assert cex["F(S)"] == [[0, 0], [1, 1]]
    assert rep.to_dict()["status"] == "fail"


def test_diag_unless_full_is_monotone(sl2):
    assert check_monotone(NAMED_CUSTOM["diag-unless-full"], sl2).passed


def test_check_monotone_rejects_bad_pairs(sl2):
    with pytest.raises(ValueError):
        check_monotone(TC, sl2, [(BinaryRelation.full(2), BinaryRelation.diagonal(2))])


def test_hom_property_of_core_operators(corpus):
    algs = [a for a in corpus.values() if a.size <= 3]
    homs = [h for s in algs for t in algs for h in enumerate_homomorphisms(s, t)]
    for op in CORE_OPERATORS:
        assert check_hom_property(op, homs).passed


def test_hom_property_failure_is_reported(sl3, sl2):
    homs = enumerate_homomorphisms(sl3, sl2)
    rep = check_hom_property(NAMED_CUSTOM["full-if-nontrivial"], homs)
    assert not rep.passed
    c = rep.counterexamples[0]
    assert {"source", "target", "map", "R", "phi(F(R))", "F(phi(R))"} <= set(c)


def test_hom_property_with_sample_callable(sl2):
    homs = enumerate_homomorphisms(sl2, sl2)
    rep = check_hom_property(TC, homs, lambda a: [BinaryRelation.diagonal(a.size)])
    assert rep.checked == len(homs)
