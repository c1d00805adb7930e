"""Terms over a finite signature: variables and operation applications.

Witness terms produced by subalgebra generation share subterms heavily, so
every traversal here is iterative and memoised on node identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import ParseError


@dataclass(frozen=True)
class Var:
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("variable index must be non-negative")


@dataclass(frozen=True)
class App:
    op: str
    args: tuple = ()


Term = Union[Var, App]

DEFAULT_NAMES = ("x", "y", "z", "u", "v", "w")


def variable_name(i: int) -> str:
    return DEFAULT_NAMES[i] if i < len(DEFAULT_NAMES) else f"x{i}"


def _postorder(t: Term):
    """Yield each distinct node once, children before parents."""
    seen = set()
    stack = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if isinstance(node, Var) or expanded:
            seen.add(id(node))
            yield node
            continue
        stack.append((node, True))
        for child in reversed(node.args):
            if id(child) not in seen:
                stack.append((child, False))


def variables(t: Term) -> set[int]:
    return {node.index for node in _postorder(t) if isinstance(node, Var)}


def arity_needed(t: Term) -> int:
    """Smallest variable count under which ``t`` is well formed."""
    vs = variables(t)
    return max(vs) + 1 if vs else 0


def term_depth(t: Term) -> int:
    depth: dict[int, int] = {}
    for node in _postorder(t):
        if isinstance(node, Var):
            depth[id(node)] = 0
        else:
            depth[id(node)] = 1 + max((depth[id(c)] for c in node.args), default=0)
    return depth[id(t)]


def substitute(t: Term, images: Sequence[Term]) -> Term:
    """Replace variable ``i`` by ``images[i]`` everywhere in ``t``."""
    done: dict[int, Term] = {}
    for node in _postorder(t):
        if isinstance(node, Var):
            if node.index >= len(images):
                raise IndexError(f"no image for variable {node.index}")
            done[id(node)] = images[node.index]
        else:
            done[id(node)] = App(node.op, tuple(done[id(c)] for c in node.args))
    return done[id(t)]


def permute_variables(t: Term, order: Sequence[int]) -> Term:
    """Return the term ``t(z[order[0]], z[order[1]], ...)``."""
    return substitute(t, [Var(i) for i in order])


def format_term(t: Term, names: Sequence[str] | None = None) -> str:
    """Prefix notation, e.g. ``+(x,+(y,z))``."""
    out: dict[int, str] = {}
    for node in _postorder(t):
        if isinstance(node, Var):
            i = node.index
            out[id(node)] = names[i] if names is not None else variable_name(i)
        elif node.args:
            out[id(node)] = f"{node.op}({','.join(out[id(c)] for c in node.args)})"
        else:
            out[id(node)] = node.op
    return out[id(t)]


_TOKEN = re.compile(r"\s*(?:(?P<punct>[(),])|(?P<name>[^\s(),]+))")


def parse_term(text: str, names: Sequence[str] | None = None) -> Term:
    """Inverse of :func:`format_term`.

    Identifiers found in ``names`` (default x, y, z, u, v, w, x6, x7, ...)
    are variables; anything else is an operation symbol. A bare symbol
    that is not a variable is a nullary application.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r}", f"col {pos + 1}")
        tokens.append((m.group("punct") or m.group("name"), m.start(m.lastindex)))
        pos = m.end()

    def var_index(name: str) -> int | None:
        if names is not None:
            return names.index(name) if name in names else None
        if name in DEFAULT_NAMES:
            return DEFAULT_NAMES.index(name)
        if re.fullmatch(r"x\d+", name) and int(name[1:]) >= len(DEFAULT_NAMES):
            return int(name[1:])
        return None

    i = 0

    def parse() -> Term:
        nonlocal i
        if i >= len(tokens):
            raise ParseError("unexpected end of term", f"col {len(text) + 1}")
        tok, col = tokens[i]
        if tok in "(),":
            raise ParseError(f"unexpected {tok!r}", f"col {col + 1}")
        i += 1
        if i < len(tokens) and tokens[i][0] == "(":
            i += 1
            args = []
            if i < len(tokens) and tokens[i][0] == ")":
                i += 1
                return App(tok, ())
            while True:
                args.append(parse())
                if i >= len(tokens):
                    raise ParseError("missing ')'", f"col {len(text) + 1}")
                sep, scol = tokens[i]
                i += 1
                if sep == ")":
                    return App(tok, tuple(args))
                if sep != ",":
                    raise ParseError(f"expected ',' or ')', got {sep!r}", f"col {scol + 1}")
        v = var_index(tok)
        return Var(v) if v is not None else App(tok, ())

    t = parse()
    if i != len(tokens):
        raise ParseError(f"trailing input {tokens[i][0]!r}", f"col {tokens[i][1] + 1}")
    return t
