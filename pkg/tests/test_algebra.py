from __future__ import annotations

import json

import oracles
import pytest
from hypothesis import given, settings, strategies as st

from malrel import (
    CapExceeded, Limits, ParseError, algebra_from_function, dump_algebra, enumerate_subuniverses, eval_term,
    free_algebra, generate_subalgebra, induced_subalgebra, make_algebra, parse_algebra, product_power,
    term_operation,
)
from malrel.algebra import flat_index, unflatten
from malrel.errors import MalrelError
from malrel.terms import App, Var, parse_term

from conftest import CHAIN3, CORPUS, TRIVIAL


def _doc(**over):
    d = {"name": "a", "size": 2, "operations": [{"name": "f", "arity": 2, "table": [0, 1, 1, 0]}]}
    d.update(over)
    return json.dumps(d)


def test_parse_valid():
    alg = parse_algebra(_doc())
    assert alg.size == 2 and alg.apply("f", 1, 1) == 0


@pytest.mark.parametrize("text,where", [
    ('{"name": "a", "size": 2', "line 1"),
    (_doc(extra=1), "document"),
    (_doc(size=0), "size"),
    (_doc(operations=[{"name": "f", "arity": 2, "table": [0, 1, 2, 0]}]), "operations[0].table[2]"),
    (_doc(operations=[{"name": "f", "arity": 2, "table": [0, 1, 1]}]), "operations[0]"),
    (_doc(operations=[{"name": "f", "arity": 1, "table": [0, 1], "x": 1}]), "operations[0]"),
    (_doc(operations=[{"name": "f", "arity": 1, "table": [0, 1]}, {"name": "f", "arity": 1, "table": [1, 0]}]),
     "operations[1]"),
])
def test_parse_errors_have_locations(text, where):
    with pytest.raises(ParseError) as exc:
        parse_algebra(text)
    assert exc.value.location.startswith(where)


def test_length_mismatch_message():
    with pytest.raises(ParseError, match="arity/table-length mismatch"):
        parse_algebra(_doc(operations=[{"name": "f", "arity": 2, "table": [0]}]))


def test_carrier_cap():
    with pytest.raises(CapExceeded):
        parse_algebra(_doc(size=5, operations=[]), Limits(max_carrier=4))


def test_constructor_validation():
    with pytest.raises(MalrelError):
        make_algebra("bad", 2, [("f", 1, [0, 2])])
    with pytest.raises(MalrelError):
        make_algebra("bad", 2, [("f", 1, [0, 1]), ("f", 1, [0, 1])])


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_dump_parse_roundtrip(name):
    alg = CORPUS[name]
    again = parse_algebra(dump_algebra(alg))
    assert again == alg and again.name == alg.name


def test_flat_index_row_major():
    # leftmost argument most significant
    assert flat_index((1, 0, 1), 2) == 5
    assert unflatten(5, 2, 3) == (1, 0, 1)
    alg = make_algebra("p", 3, [("minus", 2, [(a - b) % 3 for a in range(3) for b in range(3)])])
    assert alg.apply("minus", 0, 1) == 2


def test_eval_term_and_term_operation(z2):
    t = parse_term("+(x,+(y,z))")
    for a in range(2):
        for b in range(2):
            for c in range(2):
                assert eval_term(z2, t, [a, b, c]) == (a + b + c) % 2
    assert term_operation(z2, t, 3) == tuple((a + b + c) % 2 for a in range(2) for b in range(2) for c in range(2))


def test_product_power_coordinatewise(sl2):
    sq = product_power(sl2, 2)
    assert sq.size == 4
    for p in range(4):
        for q in range(4):
            (a1, a2), (b1, b2) = divmod(p, 2), divmod(q, 2)
            assert divmod(sq.apply("meet", p, q), 2) == (a1 & b1, a2 & b2)


def test_product_power_cap(z3):
    with pytest.raises(CapExceeded):
        product_power(z3, 3, Limits(max_power_carrier=10))


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_subuniverses_match_oracle(name):
    alg = CORPUS[name]
    found = set(enumerate_subuniverses(alg))
    n = alg.size
    expected = set()
    for mask in range(1, 1 << n):
        s = {a for a in range(n) if mask >> a & 1}
        if oracles.clone_closure(alg, [(a,) for a in s]) == {(a,) for a in s}:
            expected.add(frozenset(s))
    # nullary-free signatures may also have the empty subuniverse; the library lists nonempty ones
    assert {u for u in found if u} == expected


def test_generate_subalgebra_witnesses(sl3):
    elems, wits = generate_subalgebra(sl3, [1, 2], want_witnesses=True)
    assert sorted(elems) == [0, 1, 2]
    for e, w in zip(elems, wits):
        assert eval_term(sl3, w, [1, 2]) == e


def test_induced_subalgebra(sl3):
    sub = induced_subalgebra(sl3, [0, 1])
    assert sub.size == 2 and sub.apply("meet", 1, 1) == 1 and sub.apply("meet", 0, 1) == 0
    with pytest.raises(MalrelError):
        induced_subalgebra(sl3, [1, 2])


@pytest.mark.parametrize("name,k,size", [
    ("z2", 2, 4), ("z2", 3, 8), ("z3", 2, 9), ("semilattice2", 2, 3), ("semilattice2", 3, 7),
    ("semilattice3", 2, 3), ("lattice2", 2, 4), ("lattice2", 3, 18), ("set2", 3, 3), ("z2_malcev", 2, 2),
    ("z2_malcev", 3, 4),
])
def test_free_algebra_sizes(name, k, size):
    alg = CORPUS[name]
    X = free_algebra(alg, k)
    assert len(X) == size
    assert set(X.elements) == oracles.free_elements(alg, k)
    for i, (elem, w) in enumerate(zip(X.elements, X.witnesses)):
        assert term_operation(alg, w, k) == tuple(elem)
        assert X.element_of(w) == i
    for j, g in enumerate(X.generators):
        assert X.witnesses[g] == Var(j)


def test_free_algebra_is_an_algebra_of_term_operations(sl2):
    X = free_algebra(sl2, 2)
    x, y = X.generators
    xy = X.algebra.apply("meet", x, y)
    assert X.witnesses[xy] in (App("meet", (Var(0), Var(1))), App("meet", (Var(1), Var(0))))


def test_free_algebra_cap(z3):
    with pytest.raises(CapExceeded) as exc:
        free_algebra(z3, 3, Limits(max_free_elements=10))
    assert exc.value.reached > 10


def test_trivial_and_chain():
    assert len(free_algebra(TRIVIAL, 3)) == 1
    assert len(free_algebra(CHAIN3, 2)) == 3


# 2-element carriers keep the oracle cheap: a random 3-element groupoid can
# have close to 3^9 binary term operations
@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=4, max_size=4), st.integers(2, 3))
def test_random_free_algebras_match_oracle(table, k):
    alg = algebra_from_function("r", 2, [("f", 2, lambda a, b: table[a * 2 + b])])
    X = free_algebra(alg, k)
    assert set(X.elements) == oracles.free_elements(alg, k)
