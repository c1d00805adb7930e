"""Finite algebras, term evaluation, powers, subalgebra generation, free algebras.

Conventions used throughout the package:

* the carrier of an algebra of size ``n`` is ``0..n-1``;
* an ``m``-ary operation table is a flat row-major tuple of length ``n**m``
  with the *leftmost* argument as the most significant digit, so
  ``f(a0, ..., a_{m-1})`` lives at index ``sum(a_i * n**(m-1-i))``;
* a k-tuple over the carrier is flattened the same way (coordinate 0 most
  significant), which fixes the indexing of powers and of free-algebra
  coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .config import DEFAULT_LIMITS, Limits
from .errors import CapExceeded, MalrelError, ParseError
from .terms import App, Term, Var, _postorder


@dataclass(frozen=True)
class Operation:
    name: str
    arity: int
    table: tuple[int, ...]


def flat_index(digits: Sequence[int], n: int) -> int:
    idx = 0
    for d in digits:
        idx = idx * n + d
    return idx


def unflatten(idx: int, n: int, k: int) -> tuple[int, ...]:
    out = [0] * k
    for i in range(k - 1, -1, -1):
        idx, out[i] = divmod(idx, n)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    name: str
    size: int
    ops: tuple[Operation, ...]
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.size
        if not isinstance(n, int) or n < 1:
            raise MalrelError(f"algebra {self.name!r}: size must be a positive integer")
        names = set()
        for op in self.ops:
            if op.name in names:
                raise MalrelError(f"algebra {self.name!r}: duplicate operation name {op.name!r}")
            names.add(op.name)
            if op.arity < 0:
                raise MalrelError(f"operation {op.name!r}: negative arity")
            if len(op.table) != n**op.arity:
                raise MalrelError(
                    f"operation {op.name!r}: table length {len(op.table)} != {n}^{op.arity}"
                )
            for pos, v in enumerate(op.table):
                if not 0 <= v < n:
                    raise MalrelError(
                        f"operation {op.name!r}: entry out of range ({v} at index {pos})"
                    )
        object.__setattr__(self, "_hash", hash((self.size, self.ops)))

    def __eq__(self, other):
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return self is other or (self.size == other.size and self.ops == other.ops)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        sig = ", ".join(f"{op.name}/{op.arity}" for op in self.ops)
        return f"FiniteAlgebra({self.name!r}, size={self.size}, ops=[{sig}])"

    @property
    def signature(self) -> tuple[tuple[str, int], ...]:
        return tuple((op.name, op.arity) for op in self.ops)

    def apply(self, name: str, *args: int) -> int:
        return self.op(name).table[flat_index(args, self.size)]

    def op(self, name: str) -> Operation:
        try:
            return self._by_name[name]
        except KeyError:
            raise MalrelError(f"algebra {self.name!r} has no operation {name!r}") from None

    @cached_property
    def _by_name(self) -> dict[str, Operation]:
        return {op.name: op for op in self.ops}

    @cached_property
    def np_tables(self) -> dict[str, np.ndarray]:
        return {op.name: np.asarray(op.table, dtype=np.int64) for op in self.ops}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "size": self.size,
            "operations": [
                {"name": op.name, "arity": op.arity, "table": list(op.table)} for op in self.ops
            ],
        }


def make_algebra(name: str, size: int, ops: Iterable[tuple[str, int, Sequence[int]]]) -> FiniteAlgebra:
    return FiniteAlgebra(name, size, tuple(Operation(o, a, tuple(int(v) for v in t)) for o, a, t in ops))


def algebra_from_function(name: str, size: int, ops: Iterable[tuple[str, int, Callable[..., int]]]) -> FiniteAlgebra:
    """Build an algebra by tabulating Python callables in row-major order."""
    return make_algebra(
        name,
        size,
        [(o, a, [f(*args) for args in product(range(size), repeat=a)]) for o, a, f in ops],
    )


_TOP_KEYS = {"name", "size", "operations"}
_OP_KEYS = {"name", "arity", "table"}


def parse_algebra(text: str, limits: Limits = DEFAULT_LIMITS) -> FiniteAlgebra:
    """Parse the JSON algebra format; every problem is reported with its location."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} col {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", "document")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ParseError(f"unknown field(s) {sorted(unknown)}", "document")
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise ParseError(f"missing field(s) {sorted(missing)}", "document")
    name, size, ops = doc["name"], doc["size"], doc["operations"]
    if not isinstance(name, str):
        raise ParseError("must be a string", "name")
    if not isinstance(size, int) or isinstance(size, bool) or size < 1:
        raise ParseError("must be a positive integer", "size")
    if size > limits.max_carrier:
        raise CapExceeded("carrier size", limits.max_carrier, size)
    if not isinstance(ops, list):
        raise ParseError("must be a list", "operations")
    parsed = []
    seen = set()
    for i, op in enumerate(ops):
        loc = f"operations[{i}]"
        if not isinstance(op, dict):
            raise ParseError("must be an object", loc)
        unknown = set(op) - _OP_KEYS
        if unknown:
            raise ParseError(f"unknown field(s) {sorted(unknown)}", loc)
        missing = _OP_KEYS - set(op)
        if missing:
            raise ParseError(f"missing field(s) {sorted(missing)}", loc)
        oname, arity, table = op["name"], op["arity"], op["table"]
        if not isinstance(oname, str) or not oname:
            raise ParseError("name must be a non-empty string", loc)
        if oname in seen:
            raise ParseError(f"duplicate operation name {oname!r}", loc)
        seen.add(oname)
        if not isinstance(arity, int) or isinstance(arity, bool) or arity < 0:
            raise ParseError("arity must be a non-negative integer", loc)
        if not isinstance(table, list):
            raise ParseError("table must be a flat list of integers", loc)
        if len(table) != size**arity:
            raise ParseError(
                f"arity/table-length mismatch: expected {size}^{arity} = {size**arity} entries, got {len(table)}",
                loc,
            )
        for j, v in enumerate(table):
            if not isinstance(v, int) or isinstance(v, bool):
                raise ParseError("table entries must be integers", f"{loc}.table[{j}]")
            if not 0 <= v < size:
                raise ParseError(f"entry out of range: {v} not in 0..{size - 1}", f"{loc}.table[{j}]")
        parsed.append(Operation(oname, arity, tuple(table)))
    return FiniteAlgebra(name, size, tuple(parsed))


def dump_algebra(alg: FiniteAlgebra) -> str:
    return json.dumps(alg.to_dict())


def load_algebra(path, limits: Limits = DEFAULT_LIMITS) -> FiniteAlgebra:
    with open(path, encoding="utf-8") as fh:
        return parse_algebra(fh.read(), limits)


# --- term evaluation -------------------------------------------------------


def _evaluate(alg: FiniteAlgebra, t: Term, leaves: Sequence):
    """Evaluate ``t`` bottom-up; leaves may be ints or equal-shape int arrays."""
    n = alg.size
    tables = alg.np_tables
    arities = dict(alg.signature)
    val: dict[int, object] = {}
    for node in _postorder(t):
        if isinstance(node, Var):
            if node.index >= len(leaves):
                raise MalrelError(
                    f"variable x{node.index} not covered by an assignment of length {len(leaves)}"
                )
            val[id(node)] = leaves[node.index]
            continue
        if node.op not in tables:
            raise MalrelError(f"unknown operation {node.op!r} for algebra {alg.name!r}")
        if arities[node.op] != len(node.args):
            raise MalrelError(
                f"operation {node.op!r} has arity {arities[node.op]}, applied to {len(node.args)} arguments"
            )
        idx = 0
        for c in node.args:
            idx = idx * n + val[id(c)]
        val[id(node)] = tables[node.op][idx]
    return val[id(t)]


def eval_term(alg: FiniteAlgebra, t: Term, asg: Sequence[int]) -> int:
    for v in asg:
        if not 0 <= v < alg.size:
            raise MalrelError(f"assignment value {v} outside carrier of {alg.name!r}")
    return int(_evaluate(alg, t, list(asg)))


def assignment_columns(n: int, k: int) -> list[np.ndarray]:
    """Column i holds the value of variable i over all n**k assignments, row-major."""
    idx = np.arange(n**k, dtype=np.int64)
    return [(idx // n ** (k - 1 - i)) % n for i in range(k)]


def term_operation(alg: FiniteAlgebra, t: Term, k: int) -> tuple[int, ...]:
    """The k-ary term operation of ``t`` as a flat row-major table."""
    cols = assignment_columns(alg.size, k)
    out = _evaluate(alg, t, cols)
    if np.ndim(out) == 0:
        # constant term (nullary op only)
        out = np.full(alg.size**k, int(out))
    return tuple(int(v) for v in out)


# --- powers ------------------------------------------------------------------


def product_power(alg: FiniteAlgebra, k: int, limits: Limits = DEFAULT_LIMITS) -> FiniteAlgebra:
    """``alg**k`` with coordinatewise operations.

    Element ``i`` of the power is the k-tuple ``unflatten(i, n, k)``.
    Tables are materialised, so table size ``n**(k*m)`` is also capped.
    """
    if k < 1:
        raise ValueError("k must be positive")
    n = alg.size
    N = n**k
    if N > limits.max_power_carrier:
        raise CapExceeded("power carrier", limits.max_power_carrier, N)
    coords = np.array([unflatten(i, n, k) for i in range(N)], dtype=np.int64).reshape(N, k)
    weights = n ** np.arange(k - 1, -1, -1, dtype=np.int64)
    ops = []
    for op in alg.ops:
        m = op.arity
        if N**m > limits.max_power_carrier * 16:
            raise CapExceeded(f"power table for {op.name!r}", limits.max_power_carrier * 16, N**m)
        tab = np.asarray(op.table, dtype=np.int64)
        if m == 0:
            c = op.table[0]
            ops.append(Operation(op.name, 0, (int(flat_index([c] * k, n)),)))
            continue
        # all m-tuples of power elements, row-major
        grids = np.meshgrid(*([np.arange(N)] * m), indexing="ij")
        args = [g.reshape(-1) for g in grids]
        flat = np.zeros((N**m, k), dtype=np.int64)
        for a in args:
            flat = flat * n + coords[a]
        res = tab[flat] @ weights
        ops.append(Operation(op.name, m, tuple(int(v) for v in res)))
    return FiniteAlgebra(f"{alg.name}^{k}", N, tuple(ops))


# --- subalgebra generation -------------------------------------------------


def _closure(
    seeds: Sequence[Hashable],
    signature: Sequence[tuple[str, int]],
    apply: Callable[[int, tuple], Hashable],
    *,
    want_witnesses: bool,
    cap: int,
    what: str,
    record: dict | None = None,
):
    """Worklist fixpoint shared by every generation routine.

    Element ``i`` is processed once; at that moment every tuple whose
    largest element index is exactly ``i`` is applied (positions before the
    first occurrence of ``i`` range over indices ``< i``, later positions
    over indices ``<= i``), so each tuple is evaluated exactly once.
    Seed ``j`` gets witness ``Var(j)``; other witnesses are the first
    derivation found. ``record`` (if given) receives
    ``(op_position, index_tuple) -> result index`` for every application.
    """
    elems: list = []
    index: dict = {}
    wits: list | None = [] if want_witnesses else None

    def add(e, wit_fn):
        if e in index:
            return index[e]
        if len(elems) >= cap:
            raise CapExceeded(what, cap, len(elems) + 1)
        index[e] = len(elems)
        elems.append(e)
        if wits is not None:
            wits.append(wit_fn())
        return index[e]

    for j, s in enumerate(seeds):
        add(s, lambda j=j: Var(j))
    for op_i, (name, arity) in enumerate(signature):
        if arity == 0:
            r = add(apply(op_i, ()), lambda name=name: App(name, ()))
            if record is not None:
                record[(op_i, ())] = r

    i = 0
    while i < len(elems):
        for op_i, (name, arity) in enumerate(signature):
            if arity == 0:
                continue
            for pos in range(arity):
                ranges = [range(i)] * pos + [(i,)] + [range(i + 1)] * (arity - pos - 1)
                for idx in product(*ranges):
                    r = apply(op_i, tuple(elems[j] for j in idx))
                    if r in index:
                        ri = index[r]
                    else:
                        ri = add(r, lambda: App(name, tuple(wits[j] for j in idx)))
                    if record is not None:
                        record[(op_i, idx)] = ri
        i += 1
    return elems, wits


def generate_subalgebra(
    alg: FiniteAlgebra,
    generators: Sequence[int],
    want_witnesses: bool = False,
) -> tuple[list[int], list[Term] | None]:
    """Least subuniverse containing ``generators``.

    Returns the elements in discovery order and, if asked, one witness term
    per element over variables ``x0..`` naming the generators in order.
    Duplicate generators keep the variable of their first occurrence.
    """
    if not generators and not any(a == 0 for _, a in alg.signature):
        return [], ([] if want_witnesses else None)
    for g in generators:
        if not 0 <= g < alg.size:
            raise MalrelError(f"generator {g} outside carrier of {alg.name!r}")
    n = alg.size
    tables = [op.table for op in alg.ops]

    def apply(op_i, args):
        idx = 0
        for a in args:
            idx = idx * n + a
        return tables[op_i][idx]

    return _closure(
        list(generators), alg.signature, apply,
        want_witnesses=want_witnesses, cap=n + 1, what="subalgebra",
    )


def induced_subalgebra(alg: FiniteAlgebra, elements: Iterable[int], name: str | None = None) -> FiniteAlgebra:
    """The subalgebra on a subuniverse, relabelled in increasing order."""
    elems = sorted(set(elements))
    pos = {e: i for i, e in enumerate(elems)}
    m = len(elems)
    ops = []
    for op in alg.ops:
        table = []
        for args in product(elems, repeat=op.arity):
            r = op.table[flat_index(args, alg.size)]
            if r not in pos:
                raise MalrelError(f"{elems} is not closed under {op.name!r}")
            table.append(pos[r])
        ops.append(Operation(op.name, op.arity, tuple(table)))
    return FiniteAlgebra(name or f"{alg.name}|{elems}", m, tuple(ops))


def enumerate_subuniverses(alg: FiniteAlgebra) -> list[frozenset[int]]:
    """All non-empty subuniverses, via joins of one-generated ones."""
    principal = {}
    for a in range(alg.size):
        principal[a] = frozenset(generate_subalgebra(alg, [a])[0])
    found = set(principal.values())
    frontier = list(found)
    while frontier:
        nxt = []
        for u in frontier:
            for a in range(alg.size):
                if a in u:
                    continue
                v = frozenset(generate_subalgebra(alg, sorted(u | principal[a]))[0])
                if v not in found:
                    found.add(v)
                    nxt.append(v)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


# --- free algebras -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FreeAlgebra:
    """Free algebra on k generators in the variety generated by ``base``.

    Element ``i`` is the k-ary term operation ``elements[i]`` (a tuple of
    length ``n**k`` indexed by assignments in row-major order) and
    ``witnesses[i]`` is a k-variable term producing it.  ``algebra`` is the
    same structure as a :class:`FiniteAlgebra` on ``0..len(elements)-1``.
    """

    base: FiniteAlgebra
    generator_count: int
    elements: tuple[tuple[int, ...], ...]
    witnesses: tuple[Term, ...]
    generator_indices: tuple[int, ...]
    algebra: FiniteAlgebra

    def __len__(self):
        return len(self.elements)

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {e: i for i, e in enumerate(self.elements)}

    def element_of(self, t: Term) -> int:
        """Index of the element represented by a k-variable term."""
        return self.index[term_operation(self.base, t, self.generator_count)]

    @property
    def generators(self) -> tuple[int, ...]:
        return self.generator_indices


def free_algebra(alg: FiniteAlgebra, k: int, limits: Limits = DEFAULT_LIMITS) -> FreeAlgebra:
    """Subalgebra of ``alg**(n**k)`` generated by the k projection tuples."""
    if k < 1:
        raise ValueError("k must be positive")
    n = alg.size
    N = n**k
    if N > limits.max_power_carrier:
        raise CapExceeded("free algebra coordinates", limits.max_power_carrier, N)
    dtype = np.uint8 if n <= 256 else np.int64
    cols = assignment_columns(n, k)
    seeds = [c.astype(dtype).tobytes() for c in cols]
    tables = [np.asarray(op.table, dtype=np.int64) for op in alg.ops]
    cache: dict[bytes, np.ndarray] = {}

    def vec(b: bytes) -> np.ndarray:
        v = cache.get(b)
        if v is None:
            v = np.frombuffer(b, dtype=dtype).astype(np.int64)
            cache[b] = v
        return v

    def apply(op_i, args):
        if not args:
            return np.full(N, tables[op_i][0], dtype=dtype).tobytes()
        idx = vec(args[0])
        for a in args[1:]:
            idx = idx * n + vec(a)
        return tables[op_i][idx].astype(dtype).tobytes()

    record: dict = {}
    elems, wits = _closure(
        seeds, alg.signature, apply,
        want_witnesses=True, cap=limits.max_free_elements, what="free algebra elements",
        record=record,
    )
    size = len(elems)
    ops = []
    for op_i, op in enumerate(alg.ops):
        m = op.arity
        if size**m > limits.max_power_carrier * 16:
            raise CapExceeded(f"free algebra table for {op.name!r}", limits.max_power_carrier * 16, size**m)
        # every tuple over the final element set was applied exactly once
        table = [record[(op_i, args)] for args in product(range(size), repeat=m)]
        ops.append(Operation(op.name, m, tuple(table)))
    algebra = FiniteAlgebra(f"F{k}({alg.name})", size, tuple(ops))
    gens = tuple(elems.index(s) for s in seeds)
    return FreeAlgebra(
        base=alg,
        generator_count=k,
        elements=tuple(tuple(int(v) for v in vec(e)) for e in elems),
        witnesses=tuple(wits),
        generator_indices=gens,
        algebra=algebra,
    )
