"""Batched evaluation of relational expressions over many bindings at once.

A relation on an ``n``-element carrier is encoded as the integer whose bit
``a*n + b`` is set iff ``(a, b)`` is in it, the same encoding as
:attr:`BinaryRelation.bits`. An environment maps each relation variable to
an int64 array of such codes, one entry per binding, and evaluation returns
one code array per expression.

Unary maps (closures, converse, operator applications) and the relational
sum are computed once per distinct argument with the scalar functions and
remembered in lookup tables. Composition and the diagram relation are
computed directly on stacks of boolean matrices.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from . import relations as rel
from .algebra import FiniteAlgebra
from .errors import MalrelError, NotAdmissible, UnboundName
from .relations import AdmissibleRelation, BinaryRelation
from .relexpr import Binary, ComposeN, Const, Diagram, OperatorApp, Power, RelExpr, RelVar, Unary

MAX_BATCH_CARRIER = 7  # n*n bits must fit in an int64

_DENSE_UNARY_BITS = 16
_DENSE_BINARY_BITS = 9


class _Table:
    """Memo from codes (or code pairs) to codes, dense when the key space is small."""

    def __init__(self, key_bits: int, dense: bool):
        self.dense = dense
        if dense:
            self.values = np.full(1 << key_bits, -1, dtype=np.int64)
        else:
            self.values = {}

    def lookup(self, keys: np.ndarray, compute) -> np.ndarray:
        if self.dense:
            out = self.values[keys]
            miss = out < 0
            if miss.any():
                todo = np.unique(keys[miss])
                self.values[todo] = compute(todo)
                out = self.values[keys]
            return out
        uniq, inv = np.unique(keys, return_inverse=True)
        todo = [k for k in uniq.tolist() if k not in self.values]
        if todo:
            for k, v in zip(todo, compute(np.asarray(todo, dtype=np.int64)).tolist()):
                self.values[k] = v
        return np.asarray([self.values[k] for k in uniq.tolist()], dtype=np.int64)[inv]


class BatchEvaluator:
    """Vectorized counterpart of :class:`malrel.relexpr.Evaluator`.

    Operators are looked up by name in ``ops``. With ``strict`` an operator
    applied to a non-admissible relation raises :class:`NotAdmissible`;
    otherwise the argument is replaced by the admissible relation it
    generates and counted in :attr:`coercions`.
    """

    def __init__(self, alg: FiniteAlgebra, ops: Mapping | None = None, strict: bool = True):
        n = alg.size
        if n > MAX_BATCH_CARRIER:
            raise MalrelError(f"batch evaluation supports carriers up to {MAX_BATCH_CARRIER} elements")
        self.alg = alg
        self.ops = dict(ops or {})
        self.strict = strict
        self.n = n
        self.nn = n * n
        self.coercions = 0
        self._weights = np.left_shift(np.int64(1), np.arange(self.nn, dtype=np.int64))
        self._unary: dict[str, _Table] = {}
        self._binary: dict[str, _Table] = {}
        self.diag_code = BinaryRelation.diagonal(n).bits
        self.full_code = BinaryRelation.full(n).bits

    # -- encoding --------------------------------------------------------------

    def decode(self, codes: np.ndarray) -> np.ndarray:
        bits = (codes[:, None] >> np.arange(self.nn, dtype=np.int64)) & 1
        return bits.astype(bool).reshape(len(codes), self.n, self.n)

    def encode(self, mats: np.ndarray) -> np.ndarray:
        return mats.reshape(len(mats), self.nn).astype(np.int64) @ self._weights

    def codes(self, rels) -> np.ndarray:
        return np.asarray([R.bits for R in rels], dtype=np.int64)

    def relation(self, code: int) -> BinaryRelation:
        return BinaryRelation(self.n, int(code))

    # -- primitive maps --------------------------------------------------------

    def _table(self, store: dict, name: str, bits: int, dense_limit: int) -> _Table:
        t = store.get(name)
        if t is None:
            t = store[name] = _Table(bits, bits <= dense_limit)
        return t

    def unary(self, kind: str, codes: np.ndarray) -> np.ndarray:
        table = self._table(self._unary, kind, self.nn, _DENSE_UNARY_BITS)
        return table.lookup(codes, lambda todo: np.asarray([self._scalar_unary(kind, c) for c in todo.tolist()],
                                                           dtype=np.int64))

    def _scalar_unary(self, kind: str, code: int) -> int:
        R = BinaryRelation(self.n, code)
        alg = self.alg
        if kind == "conv":
            return rel.converse(R).bits
        if kind == "tc":
            return rel.transitive_closure(R).bits
        if kind == "bar":
            return rel.compatible_closure(alg, R).bits
        if kind == "adm":
            return rel.generated_admissible(alg, R).bits
        if kind == "tol":
            return rel.tolerance_closure(alg, R).bits
        if kind == "cg":
            return rel.congruence_closure(alg, R).bits
        if kind.startswith("op:"):
            return self._scalar_operator(kind[3:], R).bits
        raise ValueError(f"unknown unary map {kind!r}")

    def _scalar_operator(self, name: str, R: BinaryRelation) -> BinaryRelation:
        from .operators import apply_operator

        if rel.is_admissible(self.alg, R):
            adm = AdmissibleRelation(self.alg, R, check=False)
        elif self.strict:
            raise NotAdmissible(f"operator {name} applied to a non-admissible relation {sorted(R.pairs())}")
        else:
            adm = rel.generated_admissible(self.alg, R)
            self.coercions += 1
        return apply_operator(self.ops[name], self.alg, adm)

    def compose(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.nn <= _DENSE_BINARY_BITS:
            table = self._table(self._binary, "compose", 2 * self.nn, 2 * _DENSE_BINARY_BITS)
            keys = (a << self.nn) | b
            return table.lookup(keys, self._compose_keys)
        return self._compose_direct(a, b)

    def _compose_keys(self, keys: np.ndarray) -> np.ndarray:
        mask = (np.int64(1) << self.nn) - 1
        return self._compose_direct(keys >> self.nn, keys & mask)

    def _compose_direct(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        A = self.decode(a).astype(np.uint8)
        B = self.decode(b).astype(np.uint8)
        return self.encode(np.matmul(A, B) > 0)

    def rel_sum(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        table = self._table(self._binary, "sum", 2 * self.nn, 2 * _DENSE_BINARY_BITS)
        mask = (1 << self.nn) - 1

        def compute(keys):
            return np.asarray([rel.rel_sum(BinaryRelation(self.n, k >> self.nn),
                                           BinaryRelation(self.n, k & mask)).bits for k in keys.tolist()],
                              dtype=np.int64)

        return table.lookup((a << self.nn) | b, compute)

    def compose_n(self, a: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
        out = a
        for i in range(1, k):
            out = self.compose(out, b if i % 2 else a)
        return out

    def power(self, a: np.ndarray, k: int) -> np.ndarray:
        if k == 0:
            return np.full(len(a), self.diag_code, dtype=np.int64)
        return self.compose_n(a, a, k)

    def diagram(self, R, S, theta, theta1, theta2) -> np.ndarray:
        """Pairs ``(a, c)`` with ``a R b``, ``b theta1 c``, ``a theta2 d``, ``d S c`` and ``b theta d``."""
        mR, mS, mT, mT1, mT2 = (self.decode(x) for x in (R, S, theta, theta1, theta2))
        left = mR[:, :, :, None] & mT2[:, :, None, :] & mT[:, None, :, :]   # [N, a, b, d]
        right = mT1[:, :, None, :] & mS[:, None, :, :]                     # [N, b, d, c]
        hit = np.einsum("nabd,nbdc->nac", left.astype(np.uint8), right.astype(np.uint8)) > 0
        return self.encode(hit)

    # -- expressions -----------------------------------------------------------

    def evaluate(self, e: RelExpr, env: Mapping[str, np.ndarray], memo: dict | None = None) -> np.ndarray:
        """Evaluate ``e`` for every binding; ``memo`` may be shared between expressions on the same ``env``."""
        if memo is None:
            memo = {}
        hit = memo.get(e)
        if hit is not None:
            return hit
        out = self._compute(e, env, memo)
        memo[e] = out
        return out

    def _size(self, env) -> int:
        for v in env.values():
            return len(v)
        return 1

    def _compute(self, e, env, memo) -> np.ndarray:
        ev = lambda x: self.evaluate(x, env, memo)  # noqa: E731
        if isinstance(e, RelVar):
            try:
                return np.asarray(env[e.name], dtype=np.int64)
            except KeyError:
                raise UnboundName(f"unbound relation variable {e.name!r}") from None
        if isinstance(e, Const):
            code = self.diag_code if e.which == "diag" else self.full_code
            return np.full(self._size(env), code, dtype=np.int64)
        if isinstance(e, Unary):
            return self.unary(e.kind, ev(e.arg))
        if isinstance(e, OperatorApp):
            if e.name not in self.ops:
                raise UnboundName(f"unbound operator {e.name!r}")
            return self.unary("op:" + e.name, ev(e.arg))
        if isinstance(e, Binary):
            a, b = ev(e.left), ev(e.right)
            if e.kind == "compose":
                return self.compose(a, b)
            if e.kind == "union":
                return a | b
            if e.kind == "intersect":
                return a & b
            return self.rel_sum(a, b)
        if isinstance(e, ComposeN):
            return self.compose_n(ev(e.left), ev(e.right), e.n)
        if isinstance(e, Power):
            return self.power(ev(e.arg), e.n)
        if isinstance(e, Diagram):
            return self.diagram(ev(e.R), ev(e.S), ev(e.theta), ev(e.theta1), ev(e.theta2))
        raise TypeError(f"not a relational expression: {e!r}")
