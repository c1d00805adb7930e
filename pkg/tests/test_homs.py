from __future__ import annotations

from itertools import product

import oracles
import pytest

from malrel import BinaryRelation, Homomorphism, enumerate_homomorphisms, generated_admissible, map_relation
from malrel.errors import CarrierMismatch, MalrelError

from conftest import CHAIN3, CORPUS, TRIVIAL

ALGS = sorted(CORPUS.values(), key=lambda a: a.name) + [CHAIN3, TRIVIAL]


@pytest.mark.parametrize("src,tgt", list(product(ALGS, repeat=2)), ids=lambda a: a.name)
def test_enumeration_matches_brute_force(src, tgt):
    found = enumerate_homomorphisms(src, tgt)
    assert found.complete
    expected = oracles.all_homs(src, tgt) if dict(src.signature) == dict(tgt.signature) else []
    assert [h.map for h in found] == sorted(expected)


def test_known_counts(z2, sl2):
    # z2 -> z2: zero map and identity; sl2 -> sl2: both constants and identity
    assert len(enumerate_homomorphisms(z2, z2)) == 2
    assert len(enumerate_homomorphisms(sl2, sl2)) == 3
    assert len(enumerate_homomorphisms(CORPUS["set2"], CORPUS["set2"])) == 4


def test_cap_gives_partial_result(sl3):
    part = enumerate_homomorphisms(sl3, sl3, cap=2)
    assert not part.complete


def test_homomorphism_validation(sl2, z2):
    with pytest.raises(MalrelError):
        Homomorphism(sl2, sl2, (1, 0))
    with pytest.raises(MalrelError):
        Homomorphism(sl2, z2, (0, 0))
    h = Homomorphism(sl2, sl2, (0, 0))
    assert h(1) == 0
    assert h.then(Homomorphism(sl2, sl2, (0, 1))).map == (0, 0)


def test_map_relation(sl3, sl2):
    h = Homomorphism(sl3, sl2, (0, 0, 1))
    R = BinaryRelation.from_pairs(3, [(a, a) for a in range(3)] + [(2, 1)])
    assert map_relation(h, R) == generated_admissible(sl2, [(1, 0)])
    with pytest.raises(CarrierMismatch):
        map_relation(h, BinaryRelation.diagonal(2))
