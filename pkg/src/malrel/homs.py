"""Homomorphisms between finite algebras of the same signature."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .algebra import FiniteAlgebra, flat_index
from .config import DEFAULT_LIMITS, Limits
from .errors import CarrierMismatch, MalrelError
from .relations import AdmissibleRelation, BinaryRelation, Enumeration, generated_admissible


def _same_signature(a: FiniteAlgebra, b: FiniteAlgebra) -> bool:
    return dict(a.signature) == dict(b.signature)


@dataclass(frozen=True)
class Homomorphism:
    source: FiniteAlgebra
    target: FiniteAlgebra
    map: tuple[int, ...]

    def __post_init__(self):
        if not _same_signature(self.source, self.target):
            raise MalrelError(f"{self.source.name!r} and {self.target.name!r} have different signatures")
        if len(self.map) != self.source.size or any(not 0 <= v < self.target.size for v in self.map):
            raise MalrelError("map is not a total function between the carriers")
        bad = first_violation(self.source, self.target, self.map)
        if bad is not None:
            raise MalrelError(f"map does not commute with {bad[0]!r} at {bad[1]}")

    def __call__(self, a: int) -> int:
        return self.map[a]

    def then(self, other: "Homomorphism") -> "Homomorphism":
        """``other`` after ``self``."""
        if other.source != self.target:
            raise MalrelError("homomorphisms are not composable")
        return Homomorphism(self.source, other.target, tuple(other.map[v] for v in self.map))


def first_violation(source: FiniteAlgebra, target: FiniteAlgebra, mapping) -> tuple[str, tuple] | None:
    n = source.size
    for op in source.ops:
        tgt = target.op(op.name)
        for args in product(range(n), repeat=op.arity):
            lhs = mapping[op.table[flat_index(args, n)]]
            rhs = tgt.table[flat_index([mapping[a] for a in args], target.size)]
            if lhs != rhs:
                return op.name, args
    return None


def enumerate_homomorphisms(source: FiniteAlgebra, target: FiniteAlgebra, cap: int | None = None,
                            limits: Limits = DEFAULT_LIMITS) -> Enumeration:
    """All homomorphisms, in lexicographic order of the map.

    Backtracking over source elements in increasing order. After each
    choice every operation tuple whose arguments are all mapped forces the
    image of its result, which is either checked or propagated. ``cap``
    bounds the branching choices tried; exceeding it returns a partial list
    with ``complete = False``.
    """
    if not _same_signature(source, target):
        return Enumeration([], True)
    cap = limits.max_hom_candidates if cap is None else cap
    n, m = source.size, target.size
    # (op table, target table, arity) plus, per element, the tuples it occurs in
    ops = [(op.table, target.op(op.name).table, op.arity) for op in source.ops]
    occurs: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in range(n)]
    nullary = []
    for oi, (tab, _, ar) in enumerate(ops):
        if ar == 0:
            nullary.append(oi)
            continue
        for args in product(range(n), repeat=ar):
            for a in set(args):
                occurs[a].append((oi, args))

    found: list[Homomorphism] = []
    tried = 0
    complete = True

    def propagate(assign: list[int], start: list[int]) -> bool:
        queue = list(start)
        while queue:
            e = queue.pop()
            for oi, args in occurs[e]:
                if any(assign[a] < 0 for a in args):
                    continue
                tab, ttab, _ = ops[oi]
                r = tab[flat_index(args, n)]
                img = ttab[flat_index([assign[a] for a in args], m)]
                if assign[r] < 0:
                    assign[r] = img
                    queue.append(r)
                elif assign[r] != img:
                    return False
        return True

    root = [-1] * n
    for oi in nullary:
        tab, ttab, _ = ops[oi]
        c, img = tab[0], ttab[0]
        if root[c] >= 0 and root[c] != img:
            return Enumeration([], True)
        root[c] = img
    if not propagate(root, [a for a in range(n) if root[a] >= 0]):
        return Enumeration([], True)

    def search(assign: list[int]):
        nonlocal tried, complete
        try:
            pos = assign.index(-1)
        except ValueError:
            found.append(Homomorphism(source, target, tuple(assign)))
            return
        for v in range(m):
            if tried >= cap:
                complete = False
                return
            tried += 1
            nxt = list(assign)
            nxt[pos] = v
            if propagate(nxt, [pos]):
                search(nxt)
            if not complete:
                return

    search(root)
    return Enumeration(found, complete)


def image_pairs(h: Homomorphism, R: BinaryRelation) -> BinaryRelation:
    if R.n != h.source.size:
        raise CarrierMismatch(f"relation on {R.n} elements, source {h.source.name!r} has {h.source.size}")
    return BinaryRelation.from_pairs(h.target.size, ((h.map[a], h.map[b]) for a, b in R.pairs()))


def map_relation(h: Homomorphism, R: BinaryRelation) -> AdmissibleRelation:
    """Least reflexive compatible relation on the target containing the image of ``R``."""
    return generated_admissible(h.target, image_pairs(h, R))
