"""Binary relations on ``0..n-1`` as bitsets, with the usual relational calculus.

Pair ``(a, b)`` is bit ``a*n + b`` of :attr:`BinaryRelation.bits`; row ``a``
is therefore the ``n``-bit slice starting at ``a*n``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from .algebra import FiniteAlgebra, _closure
from .config import DEFAULT_LIMITS, Limits
from .errors import CarrierMismatch, NotAdmissible


class BinaryRelation:
    __slots__ = ("n", "bits")

    def __init__(self, n: int, bits: int = 0):
        if n < 1:
            raise ValueError("carrier size must be positive")
        if bits < 0 or bits >> (n * n):
            raise ValueError("bits outside the n*n matrix")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "bits", bits)

    def __setattr__(self, name, value):
        raise AttributeError("relations are immutable")

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "BinaryRelation":
        bits = 0
        for a, b in pairs:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"pair {(a, b)} outside carrier 0..{n - 1}")
            bits |= 1 << (a * n + b)
        return cls(n, bits)

    @classmethod
    def diagonal(cls, n: int) -> "BinaryRelation":
        return cls(n, _diag_bits(n))

    @classmethod
    def full(cls, n: int) -> "BinaryRelation":
        return cls(n, (1 << (n * n)) - 1)

    @classmethod
    def empty(cls, n: int) -> "BinaryRelation":
        return cls(n, 0)

    @classmethod
    def from_matrix(cls, matrix) -> "BinaryRelation":
        m = np.asarray(matrix, dtype=bool)
        n = m.shape[0]
        return cls.from_pairs(n, zip(*np.nonzero(m)))

    def pairs(self) -> Iterator[tuple[int, int]]:
        n, bits = self.n, self.bits
        while bits:
            low = bits & -bits
            i = low.bit_length() - 1
            yield divmod(i, n)
            bits ^= low

    __iter__ = pairs

    def __contains__(self, pair) -> bool:
        a, b = pair
        return bool(self.bits >> (a * self.n + b) & 1)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryRelation):
            return NotImplemented
        return self.n == other.n and self.bits == other.bits

    def __hash__(self) -> int:
        return hash((self.n, self.bits))

    def _check(self, other: "BinaryRelation"):
        if not isinstance(other, BinaryRelation):
            raise TypeError(f"expected a BinaryRelation, got {type(other).__name__}")
        if other.n != self.n:
            raise CarrierMismatch(f"carrier sizes differ: {self.n} vs {other.n}")

    def __le__(self, other: "BinaryRelation") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def __ge__(self, other: "BinaryRelation") -> bool:
        self._check(other)
        return other.bits & ~self.bits == 0

    def __or__(self, other: "BinaryRelation") -> "BinaryRelation":
        self._check(other)
        return BinaryRelation(self.n, self.bits | other.bits)

    def __and__(self, other: "BinaryRelation") -> "BinaryRelation":
        self._check(other)
        return BinaryRelation(self.n, self.bits & other.bits)

    @property
    def rows(self) -> tuple[int, ...]:
        n, mask = self.n, (1 << self.n) - 1
        return tuple((self.bits >> (a * n)) & mask for a in range(n))

    def is_reflexive(self) -> bool:
        d = _diag_bits(self.n)
        return self.bits & d == d

    def is_symmetric(self) -> bool:
        return converse(self) == self

    def is_transitive(self) -> bool:
        return compose(self, self) <= self

    def to_matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=bool)
        for a, b in self.pairs():
            m[a, b] = True
        return m

    def sort_key(self) -> tuple[int, ...]:
        """Lexicographic key on the row-major bit-matrix."""
        return tuple((self.bits >> i) & 1 for i in range(self.n * self.n))

    def __repr__(self) -> str:
        return f"BinaryRelation({self.n}, {sorted(self.pairs())})"


class AdmissibleRelation(BinaryRelation):
    """A reflexive relation compatible with every operation of ``algebra``."""

    __slots__ = ("algebra",)

    def __init__(self, algebra: FiniteAlgebra, rel: BinaryRelation, *, check: bool = True):
        if rel.n != algebra.size:
            raise CarrierMismatch(f"relation on {rel.n} elements, algebra {algebra.name!r} has {algebra.size}")
        super().__init__(rel.n, rel.bits)
        object.__setattr__(self, "algebra", algebra)
        if check:
            if not rel.is_reflexive():
                raise NotAdmissible(f"relation is not reflexive on {algebra.name!r}")
            bad = compatibility_violation(algebra, rel)
            if bad is not None:
                raise NotAdmissible(f"relation is not compatible with {bad} of {algebra.name!r}")

    def __repr__(self) -> str:
        return f"AdmissibleRelation({self.algebra.name!r}, {sorted(self.pairs())})"


@lru_cache(maxsize=None)
def _diag_bits(n: int) -> int:
    return sum(1 << (a * n + a) for a in range(n))


def _as_relation(n: int, R) -> BinaryRelation:
    if isinstance(R, BinaryRelation):
        if R.n != n:
            raise CarrierMismatch(f"relation on {R.n} elements, expected {n}")
        return R
    return BinaryRelation.from_pairs(n, R)


# --- relational calculus -----------------------------------------------------


def compose(R: BinaryRelation, S: BinaryRelation) -> BinaryRelation:
    """``(a, c)`` iff some ``b`` has ``a R b`` and ``b S c``."""
    R._check(S)
    n = R.n
    srows = S.rows
    out = 0
    for a, row in enumerate(R.rows):
        acc = 0
        while row:
            low = row & -row
            acc |= srows[low.bit_length() - 1]
            row ^= low
        out |= acc << (a * n)
    return BinaryRelation(n, out)


def compose_n(R: BinaryRelation, S: BinaryRelation, n: int) -> BinaryRelation:
    """``R o S o R o ...`` with ``n`` factors."""
    if n < 1:
        raise ValueError("compose_n needs at least one factor")
    R._check(S)
    out = R
    for i in range(1, n):
        out = compose(out, S if i % 2 else R)
    return out


def power(R: BinaryRelation, k: int) -> BinaryRelation:
    """``R**0`` is the diagonal; otherwise the k-fold composite."""
    if k < 0:
        raise ValueError("negative power")
    if k == 0:
        return BinaryRelation.diagonal(R.n)
    return compose_n(R, R, k)


def converse(R: BinaryRelation) -> BinaryRelation:
    n = R.n
    bits = 0
    for a, b in R.pairs():
        bits |= 1 << (b * n + a)
    return BinaryRelation(n, bits)


def union(*rels: BinaryRelation) -> BinaryRelation:
    out = rels[0]
    for r in rels[1:]:
        out = out | r
    return out


def intersect(*rels: BinaryRelation) -> BinaryRelation:
    out = rels[0]
    for r in rels[1:]:
        out = out & r
    return out


def transitive_closure(R: BinaryRelation) -> BinaryRelation:
    """Warshall's algorithm on bit rows."""
    n = R.n
    rows = list(R.rows)
    for k in range(n):
        bit = 1 << k
        rk = rows[k]
        for i in range(n):
            if rows[i] & bit:
                rows[i] |= rk
    return BinaryRelation(n, sum(r << (a * n) for a, r in enumerate(rows)))


def rel_sum(R: BinaryRelation, S: BinaryRelation) -> BinaryRelation:
    """Union of ``compose_n(R, S, k)`` over all ``k >= 1``.

    The tail of the alternating sequence is determined by the current term
    and the parity of ``k``, so the union is complete as soon as such a state
    repeats. For reflexive arguments that takes at most ``n*n`` steps.
    """
    R._check(S)
    acc = 0
    term, k = R, 1
    seen = set()
    while (term.bits, k % 2) not in seen:
        seen.add((term.bits, k % 2))
        acc |= term.bits
        term = compose(term, S if k % 2 else R)
        k += 1
    return BinaryRelation(R.n, acc)


# --- closures depending on an algebra --------------------------------------


def _pair_closure(alg: FiniteAlgebra, seed_bits: int, n: int) -> int:
    codes = []
    bits = seed_bits
    while bits:
        low = bits & -bits
        codes.append(low.bit_length() - 1)
        bits ^= low
    if not codes and not any(a == 0 for _, a in alg.signature):
        return 0
    tables = [op.table for op in alg.ops]

    def apply(op_i, args):
        tab = tables[op_i]
        left = right = 0
        for c in args:
            a, b = divmod(c, n)
            left = left * n + a
            right = right * n + b
        return tab[left] * n + tab[right]

    elems, _ = _closure(codes, alg.signature, apply, want_witnesses=False, cap=n * n + 1, what="pairs")
    out = 0
    for c in elems:
        out |= 1 << c
    return out


@lru_cache(maxsize=1 << 16)
def _compatible_bits(alg: FiniteAlgebra, bits: int) -> int:
    return _pair_closure(alg, bits, alg.size)


def compatible_closure(alg: FiniteAlgebra, R) -> BinaryRelation:
    """Least compatible relation containing ``R`` (the diagonal is not added)."""
    R = _as_relation(alg.size, R)
    return BinaryRelation(alg.size, _compatible_bits(alg, R.bits))


def generated_admissible(alg: FiniteAlgebra, pairs=()) -> AdmissibleRelation:
    """Least reflexive compatible relation containing ``pairs``."""
    R = _as_relation(alg.size, pairs)
    bits = _compatible_bits(alg, R.bits | _diag_bits(alg.size))
    return AdmissibleRelation(alg, BinaryRelation(alg.size, bits), check=False)


def tolerance_closure(alg: FiniteAlgebra, R) -> AdmissibleRelation:
    R = _as_relation(alg.size, R)
    return generated_admissible(alg, R | converse(R))


def congruence_closure(alg: FiniteAlgebra, R) -> AdmissibleRelation:
    """Alternate tolerance and transitive closure until nothing changes."""
    cur = _as_relation(alg.size, R)
    while True:
        nxt = transitive_closure(tolerance_closure(alg, cur))
        if nxt == cur:
            return AdmissibleRelation(alg, cur, check=False)
        cur = nxt


def compatibility_violation(alg: FiniteAlgebra, R: BinaryRelation) -> str | None:
    """Name of an operation ``R`` is not closed under, or ``None``."""
    n = alg.size
    if R.n != n:
        raise CarrierMismatch(f"relation on {R.n} elements, algebra has {n}")
    pairs = np.array(list(R.pairs()), dtype=np.int64).reshape(-1, 2)
    mat = R.to_matrix()
    for op in alg.ops:
        m = op.arity
        tab = np.asarray(op.table, dtype=np.int64)
        if m == 0:
            if not mat[tab[0], tab[0]]:
                return op.name
            continue
        k = len(pairs)
        if k == 0:
            continue
        left, right = pairs[:, 0], pairs[:, 1]
        # vectorise over the last (m-1) argument positions, loop over the first
        tail = max(m - 1, 0)
        if tail:
            grids = np.meshgrid(*([np.arange(k)] * tail), indexing="ij")
            rest = [g.reshape(-1) for g in grids]
        else:
            rest = []
        chunk = 1 if k**tail > 1 << 20 else None
        firsts = range(k) if chunk else [slice(None)]
        for first in firsts:
            if chunk:
                lf = np.full(k**tail, left[first])
                rf = np.full(k**tail, right[first])
                li, ri = lf, rf
                for r in rest:
                    li = li * n + left[r]
                    ri = ri * n + right[r]
            else:
                li = left[:, None] if tail else left
                ri = right[:, None] if tail else right
                for r in rest:
                    li = li * n + left[r][None, :]
                    ri = ri * n + right[r][None, :]
            if not mat[tab[li], tab[ri]].all():
                return op.name
    return None


def is_compatible(alg: FiniteAlgebra, R: BinaryRelation) -> bool:
    return compatibility_violation(alg, R) is None


def is_admissible(alg: FiniteAlgebra, R: BinaryRelation) -> bool:
    return R.is_reflexive() and is_compatible(alg, R)


class Enumeration(list):
    """A list that also records whether the enumeration ran to completion."""

    def __init__(self, items=(), complete: bool = True):
        super().__init__(items)
        self.complete = complete


def enumerate_admissible(alg: FiniteAlgebra, cap: int | None = None,
                         limits: Limits = DEFAULT_LIMITS) -> Enumeration:
    """Every reflexive compatible relation, in lexicographic bit-matrix order.

    Each such relation is a join of principal ones, so starting from the
    diagonal and repeatedly closing ``R + one more pair`` reaches all of
    them. ``cap`` bounds the number of closures performed.
    """
    cap = limits.max_admissible_closures if cap is None else cap
    n = alg.size
    diag = generated_admissible(alg)
    found = {diag.bits: diag}
    frontier = [diag]
    off = [(a, b) for a in range(n) for b in range(n) if a != b]
    closures = 0
    complete = True
    while frontier and complete:
        nxt = []
        for R in frontier:
            for a, b in off:
                if (a, b) in R:
                    continue
                if closures >= cap:
                    complete = False
                    break
                closures += 1
                bits = _compatible_bits(alg, R.bits | 1 << (a * n + b))
                if bits not in found:
                    found[bits] = AdmissibleRelation(alg, BinaryRelation(n, bits), check=False)
                    nxt.append(found[bits])
            if not complete:
                break
        frontier = nxt
    return Enumeration(sorted(found.values(), key=BinaryRelation.sort_key), complete)


def all_relations(n: int) -> Iterator[BinaryRelation]:
    """All ``2**(n*n)`` relations on ``n`` elements, by increasing bit value."""
    for bits in range(1 << (n * n)):
        yield BinaryRelation(n, bits)


def format_matrix(R: BinaryRelation) -> str:
    return "\n".join(
        " ".join("1" if (a, b) in R else "." for b in range(R.n)) for a in range(R.n)
    )


def relation_from_literal(alg: FiniteAlgebra, pairs, *, reflexive_close=False, admissible_close=False) -> BinaryRelation:
    R = _as_relation(alg.size, pairs)
    if admissible_close:
        return generated_admissible(alg, R)
    if reflexive_close:
        R = R | BinaryRelation.diagonal(alg.size)
    return R
