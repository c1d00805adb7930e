"""End-to-end acceptance checks on the bundled corpus."""

from __future__ import annotations

import io
from itertools import product

import numpy as np
import oracles
import pytest

from malrel import (
    BUILTINS, CORE_OPERATORS, BinaryRelation, algebra_from_function, check_clause, check_cond_vii,
    check_cond_x, check_hom_property, check_theorem_f2, compatible_closure, congruence_closure,
    converse, compose, enumerate_admissible, enumerate_homomorphisms, find_term_cond_iv, free_algebra,
    generated_admissible, malcev_term_on_algebra, product_power, rel_sum, term_operation,
    tolerance_closure, transitive_closure, verify_malcev_term,
)
from malrel.cli import main
from malrel.terms import Var
from malrel.terms import substitute as _sub
from malrel.verifier import CLAUSE_IDS

from conftest import CORPUS

PAIRS = [(F, G) for F in CORE_OPERATORS for G in CORE_OPERATORS]


def _op_table(alg, t):
    return term_operation(alg, t, 3)


def _exact_malcev(alg, table):
    n = alg.size
    return all(table[(a * n + b) * n + b] == a and table[(a * n + a) * n + b] == b
               for a in range(n) for b in range(n))


# 1 ------------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["z2", "z3"])
def test_criterion_1_exact_malcev_recovery_found(name):
    alg = CORPUS[name]
    w = find_term_cond_iv(alg, BUILTINS["diag"], BUILTINS["diag"])
    assert w is not None
    assert _exact_malcev(alg, _op_table(alg, w.term))
    out = io.StringIO()
    assert main(["search", f"{name}.alg", "-F", "diag", "-G", "diag"], out=out) == 0
    assert out.getvalue().strip() != "none"


@pytest.mark.parametrize("name", ["semilattice2", "lattice2"])
def test_criterion_1_exact_malcev_recovery_none(name):
    alg = CORPUS[name]
    assert find_term_cond_iv(alg, BUILTINS["diag"], BUILTINS["diag"]) is None
    # oracle: no ternary term operation satisfies both identities
    assert not any(_exact_malcev(alg, t) for t in oracles.free_elements(alg, 3))
    out = io.StringIO()
    assert main(["search", f"{name}.alg", "-F", "diag", "-G", "diag"], out=out) == 1
    assert out.getvalue().strip() == "none"


# 2 ------------------------------------------------------------------------------

def test_criterion_2_modulo_closure_positive_case():
    alg = CORPUS["semilattice2"]
    cg = BUILTINS["cg"]
    wiv, wvii, wx = find_term_cond_iv(alg, cg, cg), check_cond_vii(alg, cg, cg), check_cond_x(alg, cg, cg)
    assert wiv and wvii and wx

    # extraction identities for the 2-generator routes: t(x,y,y) = p and t(x,x,y) = q in X
    X = free_algebra(alg, 2)
    for w in (wiv, wx):
        t = w.term
        p = X.element_of(_sub(t, [Var(0), Var(1), Var(1)]))
        q = X.element_of(_sub(t, [Var(0), Var(0), Var(1)]))
        assert X.element_of(w.intermediate["t(x,y,y)"]) == p
        assert X.element_of(w.intermediate["t(x,x,y)"]) == q

    # route vii: t = t'(x,y,z,x,z); t1(x,y,y) = t(x,y,y) and t(y,y,z) = t2(y,y,z)
    t, tp = wvii.term, wvii.intermediate["t'"]
    t1, t2 = wvii.intermediate["t1"], wvii.intermediate["t2"]
    assert term_operation(alg, t, 3) == term_operation(alg, _sub(tp, [Var(0), Var(1), Var(2), Var(0), Var(2)]), 3)
    yy = [Var(0), Var(1), Var(1)]
    assert term_operation(alg, _sub(t1, yy), 3) == term_operation(alg, _sub(t, yy), 3)
    zz = [Var(1), Var(1), Var(2)]
    assert term_operation(alg, _sub(t, zz), 3) == term_operation(alg, _sub(t2, zz), 3)

    sq = product_power(alg, 2)
    rels = {alg: enumerate_admissible(alg), sq: enumerate_admissible(sq)}
    assert len(rels[alg]) == len(oracles.admissible_all(alg))
    assert len(rels[sq]) == len(oracles.admissible_all(sq))
    for w in (wiv, wvii, wx):
        rep = verify_malcev_term([alg, sq], w.term, cg, cg, rels)
        assert rep.passed and rep.checked > 0


# 3 ------------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(CORPUS))
def test_criterion_3_equivalence_consistency(name):
    alg = CORPUS[name]
    disagreements = []
    for F, G in PAIRS:
        answers = [find_term_cond_iv(alg, F, G) is not None,
                   check_cond_vii(alg, F, G) is not None,
                   check_cond_x(alg, F, G) is not None,
                   check_cond_vii(alg, F, G, full=True) is not None,
                   check_cond_x(alg, F, G, full=True) is not None]
        # cross-check against the definition on alg itself
        answers.append(malcev_term_on_algebra(alg, F, G) is not None)
        if len(set(answers)) != 1:
            disagreements.append((F.name, G.name, answers))
    assert disagreements == []


# 4 ------------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(CORPUS))
def test_criterion_4_consequence_soundness_sweep(name):
    alg = CORPUS[name]
    assert alg.size <= 3
    cases = 0
    failures = []
    for F, G in PAIRS:
        w = malcev_term_on_algebra(alg, F, G)
        if w is None:
            continue
        cases += 1
        for cid in CLAUSE_IDS:
            rep = check_clause(alg, cid, F, G, witness=w)
            assert rep.asserted
            if rep.status != "pass":
                failures.append((F.name, G.name, cid, rep.status, rep.violations[:1]))
            if alg.size == 2 and cid == "i":
                assert rep.instances == len(enumerate_admissible(alg)) ** 2 * 16 ** 3
    assert cases > 0
    assert failures == []


# 5 ------------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(CORPUS))
def test_criterion_5_triple_square_empirical(name):
    alg = CORPUS[name]
    failures = []
    for F, G in PAIRS:
        rep = check_theorem_f2(alg, F, G)
        if rep.status != "pass":
            failures.append((F.name, G.name))
    assert failures == []


# 6 ------------------------------------------------------------------------------

def test_criterion_6_closure_algebra_laws():
    rng = np.random.default_rng(20240601)
    count = 0
    for n in (2, 3, 4, 5):
        table = rng.integers(0, n, size=n * n)
        alg = algebra_from_function(f"rand{n}", n, [("f", 2, lambda a, b, t=table, n=n: int(t[a * n + b]))])
        closures = {
            "tc": transitive_closure,
            "bar": lambda R, a=alg: compatible_closure(a, R),
            "tol": lambda R, a=alg: tolerance_closure(a, R),
            "cg": lambda R, a=alg: congruence_closure(a, R),
        }
        for _ in range(250):
            count += 1
            R, S, T = (BinaryRelation(n, int(rng.integers(0, 1 << (n * n)))) for _ in range(3))
            assert compose(compose(R, S), T) == compose(R, compose(S, T))
            assert converse(converse(R)) == R
            for c in closures.values():
                cR = c(R)
                assert R <= cR
                assert c(cR) == cR
                assert cR <= c(R | S)
            assert rel_sum(R, R) == transitive_closure(R)
            A = generated_admissible(alg, R)
            assert congruence_closure(alg, A) == rel_sum(A, converse(A))
    assert count == 1000


# 7 ------------------------------------------------------------------------------

@pytest.mark.parametrize("name,k,size", [("semilattice2", 2, 3), ("semilattice2", 3, 7), ("z2", 2, 4)])
def test_criterion_7_free_algebra_sizes(name, k, size):
    alg = CORPUS[name]
    X = free_algebra(alg, k)
    assert len(X) == size
    assert set(X.elements) == oracles.free_elements(alg, k)
    for elem, w in zip(X.elements, X.witnesses):
        assert term_operation(alg, w, k) == tuple(elem)


# 8 ------------------------------------------------------------------------------

def test_criterion_8_homomorphism_property_gate():
    small = [a for a in CORPUS.values() if a.size <= 3]
    homs = []
    for s, t in product(small, repeat=2):
        found = enumerate_homomorphisms(s, t)
        same_sig = dict(s.signature) == dict(t.signature)
        expected = oracles.all_homs(s, t) if same_sig else []
        assert [h.map for h in found] == sorted(expected)
        homs.extend(found)
    assert homs
    for op in BUILTINS.values():
        rep = check_hom_property(op, homs)
        assert rep.passed, (op.name, rep.counterexamples[:1])
        assert rep.checked > 0
