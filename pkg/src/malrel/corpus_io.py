"""Locating and loading the bundled corpus of small algebras."""

from __future__ import annotations

import os
from pathlib import Path

from .algebra import FiniteAlgebra, load_algebra
from .config import DEFAULT_LIMITS, Limits
from .errors import MalrelError

CORPUS_ENV = "MALREL_CORPUS"
SUFFIX = ".alg"


def corpus_dir(override: str | os.PathLike | None = None) -> Path:
    """``override``, else ``$MALREL_CORPUS``, else the copy shipped with the package."""
    if override:
        return Path(override)
    env = os.environ.get(CORPUS_ENV)
    if env:
        return Path(env)
    return Path(__file__).with_name("corpus")


def load_corpus(directory: str | os.PathLike | None = None,
                limits: Limits = DEFAULT_LIMITS) -> list[FiniteAlgebra]:
    """Every ``*.alg`` file of the corpus, sorted by file name."""
    d = corpus_dir(directory)
    if not d.is_dir():
        raise MalrelError(f"corpus directory {str(d)!r} does not exist")
    return [load_algebra(p, limits) for p in sorted(d.glob("*" + SUFFIX))]


def resolve_algebra(spec: str, directory: str | os.PathLike | None = None,
                    limits: Limits = DEFAULT_LIMITS) -> FiniteAlgebra:
    """Load ``spec`` as a path, falling back to a file name inside the corpus."""
    p = Path(spec)
    if p.is_file():
        return load_algebra(p, limits)
    d = corpus_dir(directory)
    for cand in (d / spec, d / (spec + SUFFIX), d / p.name):
        if cand.is_file():
            return load_algebra(cand, limits)
    raise FileNotFoundError(f"no algebra file {spec!r} (also looked in {str(d)!r})")
