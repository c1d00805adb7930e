from __future__ import annotations

import numpy as np
import oracles
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from malrel import BUILTINS, BinaryRelation, Evaluator, NotAdmissible, enumerate_admissible, parse_expr
from malrel.errors import MalrelError, UnboundName
from malrel.tables import MAX_BATCH_CARRIER, BatchEvaluator
from malrel.verifier import CLAUSES
from malrel import make_algebra

from conftest import CHAIN3, CORPUS

ALGS = [CORPUS["z2"], CORPUS["semilattice2"], CORPUS["semilattice3"], CORPUS["z3"], CHAIN3]


def _bindings(alg, names, thetas, rng, count):
    adm = enumerate_admissible(alg)
    nn = alg.size ** 2
    out = []
    for _ in range(count):
        env = {v: adm[int(rng.integers(len(adm)))] for v in names}
        env.update({v: BinaryRelation(alg.size, int(rng.integers(1 << nn))) for v in thetas})
        out.append(env)
    return out


@pytest.mark.parametrize("alg", ALGS, ids=lambda a: a.name)
@pytest.mark.parametrize("cid", list(CLAUSES))
def test_clause_expressions_agree_with_scalar(alg, cid):
    clause = CLAUSES[cid]
    ops = {"F": BUILTINS["tc"], "G": BUILTINS["tol"]}
    rng = np.random.default_rng(hash(cid) % 1000)
    for p in clause.params:
        names = clause.adm_vars(p)
        envs = _bindings(alg, names, clause.theta_vars, rng, 20)
        batch = BatchEvaluator(alg, ops)
        codes = {v: batch.codes([e[v] for e in envs]) for v in envs[0]}
        scalar = Evaluator(alg, ops)
        for inc in clause.inclusions(p):
            for side in (inc.lhs, inc.rhs):
                got = batch.evaluate(side, codes)
                want = [scalar.evaluate(side, e).bits for e in envs]
                assert got.tolist() == want


def test_compose_and_converse_against_oracle():
    rng = np.random.default_rng(7)
    for n in (2, 3, 4):
        alg = make_algebra(f"set{n}", n, [])
        ev = BatchEvaluator(alg)
        a = rng.integers(0, 1 << (n * n), size=50, dtype=np.int64)
        b = rng.integers(0, 1 << (n * n), size=50, dtype=np.int64)
        comp = ev.compose(a, b)
        conv = ev.unary("conv", a)
        tc = ev.unary("tc", a)
        sm = ev.rel_sum(a, b)
        for i in range(50):
            R, S = (oracles.pairs_of(BinaryRelation(n, int(x[i]))) for x in (a, b))
            assert oracles.pairs_of(ev.relation(comp[i])) == oracles.compose(R, S)
            assert oracles.pairs_of(ev.relation(conv[i])) == oracles.converse(R)
            assert oracles.pairs_of(ev.relation(tc[i])) == oracles.tc(R)
            assert oracles.pairs_of(ev.relation(sm[i])) == oracles.rel_sum(R, S, n)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4), st.lists(st.integers(0, 2 ** 16 - 1), min_size=5, max_size=5))
def test_encode_decode_roundtrip(n, raw):
    ev = BatchEvaluator(make_algebra("s", n, []))
    codes = np.asarray([r % (1 << (n * n)) for r in raw], dtype=np.int64)
    assert ev.encode(ev.decode(codes)).tolist() == codes.tolist()


def test_diagram_matches_definition(sl3):
    ev = BatchEvaluator(sl3)
    rng = np.random.default_rng(3)
    for _ in range(30):
        rels = [BinaryRelation(3, int(rng.integers(1 << 9))) for _ in range(5)]
        R, S, T, T1, T2 = (oracles.pairs_of(x) for x in rels)
        want = {(a, c) for a in range(3) for b in range(3) for c in range(3) for d in range(3)
                if (a, b) in R and (b, c) in T1 and (a, d) in T2 and (d, c) in S and (b, d) in T}
        got = ev.diagram(*(ev.codes([x]) for x in rels))
        assert oracles.pairs_of(ev.relation(got[0])) == want


def test_strict_and_lenient_operator_application(sl2):
    e = parse_expr("F(R)")
    bad = BatchEvaluator(sl2).codes([BinaryRelation.from_pairs(2, [(1, 0)])])
    with pytest.raises(NotAdmissible):
        BatchEvaluator(sl2, {"F": BUILTINS["tc"]}).evaluate(e, {"R": bad})
    ev = BatchEvaluator(sl2, {"F": BUILTINS["id"]}, strict=False)
    out = ev.evaluate(e, {"R": bad})
    # the generated admissible relation adds the diagonal
    assert oracles.pairs_of(ev.relation(out[0])) == {(0, 0), (1, 1), (1, 0)}
    assert ev.coercions == 1


def test_unbound_names(sl2):
    ev = BatchEvaluator(sl2)
    with pytest.raises(UnboundName):
        ev.evaluate(parse_expr("R o S"), {"R": ev.codes([BinaryRelation.diagonal(2)])})
    with pytest.raises(UnboundName):
        ev.evaluate(parse_expr("H(R)"), {"R": ev.codes([BinaryRelation.diagonal(2)])})


def test_carrier_limit():
    big = make_algebra("big", MAX_BATCH_CARRIER + 1, [])
    with pytest.raises(MalrelError):
        BatchEvaluator(big)
