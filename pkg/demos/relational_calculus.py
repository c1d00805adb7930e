"""A short tour of relations on a small algebra."""

from __future__ import annotations

from malrel import (
    BinaryRelation, compatible_closure, congruence_closure, converse, enumerate_admissible, rel_sum,
)
from malrel.corpus_io import resolve_algebra

alg = resolve_algebra("semilattice3")
R = BinaryRelation.from_pairs(3, [(1, 0)])
print("R            ", sorted(R.pairs()))
print("bar(R)       ", sorted(compatible_closure(alg, R).pairs()))
print("Cg(R)        ", sorted(congruence_closure(alg, R).pairs()))

print("\nadmissible relations:", len(enumerate_admissible(alg)))
for A in enumerate_admissible(alg):
    # Cg(A) = A + A^- for reflexive compatible A
    assert congruence_closure(alg, A) == rel_sum(A, converse(A))
print("Cg(A) = A + conv(A) holds for all of them")
