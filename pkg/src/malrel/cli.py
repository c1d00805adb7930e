"""Command-line front end: ``malrel closure|search|verify|operators|free``.

Exit codes: 0 success or found, 1 not found or an asserted check failed,
2 parse or usage error, 3 a size cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import relations as rel
from .algebra import FiniteAlgebra, free_algebra
from .config import DEFAULT_LIMITS, Limits
from .corpus_io import load_corpus, resolve_algebra
from .errors import CapExceeded, MalrelError, ParseError
from .homs import enumerate_homomorphisms
from .malcev import ROUTES, malcev_family, verify_malcev_term
from .operators import BUILTINS, check_hom_property, check_monotone, parse_operator
from .relexpr import Evaluator, parse_expr
from .terms import format_term
from .verifier import (
    DEFAULT_BUDGET, DEFAULT_THETA_SAMPLES, SCHEMA, format_table, operator_guarantee, parse_clause_selection,
    run_selection,
)

EXIT_OK, EXIT_NOT_FOUND, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


@dataclass
class RunConfig:
    subcommand: str
    algebra: str | None = None
    F: str = "diag"
    G: str = "diag"
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    samples: int = DEFAULT_THETA_SAMPLES
    cap_free: int = DEFAULT_LIMITS.max_free_elements
    output: str = "text"
    strict: bool = False
    threads: int = 1
    corpus: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("budget", "samples", "cap_free", "threads"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name.replace('_', '-')} must be positive")

    @property
    def limits(self) -> Limits:
        return replace(DEFAULT_LIMITS, max_free_elements=self.cap_free)


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="output", choices=("text", "structured"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET,
                        help="instances evaluated per clause before giving up")
    common.add_argument("--samples", type=_positive, default=DEFAULT_THETA_SAMPLES,
                        help="sampled theta tuples per binding on carriers above 2 elements")
    common.add_argument("--cap-free", type=_positive, default=DEFAULT_LIMITS.max_free_elements,
                        help="largest free algebra to build")
    common.add_argument("--strict", action="store_true",
                        help="reject operator arguments that are not reflexive and compatible")
    common.add_argument("--threads", type=_positive, default=1, help="accepted; evaluation is sequential")
    common.add_argument("--corpus", default=None, help="corpus directory (default: $MALREL_CORPUS or bundled)")

    ops = argparse.ArgumentParser(add_help=False)
    ops.add_argument("-F", default="diag", help="operator spec for F")
    ops.add_argument("-G", default="diag", help="operator spec for G")

    p = argparse.ArgumentParser(prog="malrel", description="Finite workbench for Mal'cev terms modulo relation operators.")
    sub = p.add_subparsers(dest="subcommand", required=True)

    c = sub.add_parser("closure", parents=[common, ops], help="evaluate a relational expression")
    c.add_argument("algebra")
    c.add_argument("--rel", action="append", default=[], metavar="[NAME=]PAIRS [adm|refl]",
                   help='relation literal, e.g. "[[0,1]] adm" or "S=[[1,0]] refl"')
    c.add_argument("--expr", required=True)

    s = sub.add_parser("search", parents=[common, ops], help="search for a Mal'cev-modulo term")
    s.add_argument("algebra")
    s.add_argument("--route", choices=("iv", "vii", "x", "all"), default="iv")
    s.add_argument("--full", action="store_true", help="full-inclusion mode for routes vii and x")

    v = sub.add_parser("verify", parents=[common, ops], help="check the consequences clause by clause")
    v.add_argument("algebra")
    v.add_argument("--clauses", default="i-xiv,f2,equiv")

    o = sub.add_parser("operators", parents=[common], help="monotonicity and homomorphism property")
    o.add_argument("-F", action="append", dest="ops", required=True, help="operator spec (repeatable)")
    o.add_argument("-G", action="append", dest="ops", help=argparse.SUPPRESS)
    o.add_argument("--max-size", type=_positive, default=3, help="largest algebras used for homomorphisms")

    f = sub.add_parser("free", parents=[common], help="free algebra of the generated variety")
    f.add_argument("algebra")
    f.add_argument("-k", type=int, required=True, help="number of generators")
    f.add_argument("--witnesses", action="store_true", help="list a term for every element")
    return p


def _emit(cfg: RunConfig, kind: str, payload: dict, text: str, out) -> None:
    if cfg.output == "structured":
        doc = {"schema": SCHEMA, "kind": kind, **payload}
        out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        out.write(text.rstrip("\n") + "\n")


def _pairs(R) -> list[list[int]]:
    return [list(p) for p in sorted(R.pairs())]


def parse_relation_literal(text: str, alg: FiniteAlgebra) -> tuple[str, rel.BinaryRelation]:
    name = "R"
    body = text.strip()
    head, sep, tail = body.partition("=")
    if sep and head.strip().isidentifier():
        name, body = head.strip(), tail.strip()
    end = body.rfind("]")
    if not body.startswith("[") or end < 0:
        raise ParseError("expected a JSON list of pairs", f"--rel {text!r}")
    try:
        pairs = json.loads(body[:end + 1])
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"--rel {text!r} col {exc.colno}") from None
    if not isinstance(pairs, list) or any(
            not isinstance(p, list) or len(p) != 2 or not all(isinstance(x, int) and not isinstance(x, bool) for x in p)
            for p in pairs):
        raise ParseError("pairs must look like [[a,b],...]", f"--rel {text!r}")
    for a, b in pairs:
        if not (0 <= a < alg.size and 0 <= b < alg.size):
            raise ParseError(f"pair [{a},{b}] outside carrier 0..{alg.size - 1}", f"--rel {text!r}")
    flags = body[end + 1:].split()
    known = {"adm": "admissible_close", "admissible_close": "admissible_close",
             "refl": "reflexive_close", "reflexive_close": "reflexive_close"}
    bad = [f for f in flags if f not in known]
    if bad:
        raise ParseError(f"unknown flag(s) {bad}", f"--rel {text!r}")
    opts = {known[f]: True for f in flags}
    return name, rel.relation_from_literal(alg, [tuple(p) for p in pairs], **opts)


def cmd_closure(cfg: RunConfig, out) -> int:
    alg = resolve_algebra(cfg.algebra, cfg.corpus, cfg.limits)
    env = dict(parse_relation_literal(t, alg) for t in cfg.extra["rel"])
    expr = parse_expr(cfg.extra["expr"])
    ops = dict(BUILTINS)
    ops.update({"F": parse_operator(cfg.F), "G": parse_operator(cfg.G)})
    ev = Evaluator(alg, ops, strict=cfg.strict)
    R = ev.evaluate(expr, env)
    payload = {
        "algebra": alg.name, "expr": cfg.extra["expr"], "relation": _pairs(R),
        "matrix": R.to_matrix().astype(int).tolist(), "size": len(R),
        "coercions": len(ev.coercions),
    }
    text = f"{_pairs(R)}\n{rel.format_matrix(R)}"
    if ev.coercions:
        text += f"\n({len(ev.coercions)} operator argument(s) replaced by their admissible closure)"
    _emit(cfg, "closure", payload, text, out)
    return EXIT_OK


def cmd_search(cfg: RunConfig, out) -> int:
    alg = resolve_algebra(cfg.algebra, cfg.corpus, cfg.limits)
    F, G = parse_operator(cfg.F), parse_operator(cfg.G)
    routes = ("iv", "vii", "x") if cfg.extra["route"] == "all" else (cfg.extra["route"],)
    results = {}
    for r in routes:
        fn = ROUTES[r]
        results[r] = fn(alg, F, G, limits=cfg.limits) if r == "iv" else fn(alg, F, G, full=cfg.extra["full"],
                                                                            limits=cfg.limits)
    found = all(w is not None for w in results.values())
    flags = operator_guarantee(alg, (F, G), cfg.limits)
    lines = []
    payload = {"algebra": alg.name, "operators": {"F": F.name, "G": G.name}, "routes": {},
               "operator_properties": flags}
    family = rels = None
    for r, w in results.items():
        entry = {"found": w is not None}
        if w is None:
            lines.append(f"{r}: none" if len(routes) > 1 else "none")
        else:
            if family is None:
                family, rels = malcev_family(alg, cfg.limits)
            vr = verify_malcev_term(family, w.term, F, G, rels)
            entry.update(w.to_dict())
            entry["verification"] = {"status": "pass" if vr.passed else "fail", "checked": vr.checked,
                                     "violations": vr.violations[:20],
                                     "algebras": [a.name for a in family]}
            term = format_term(w.term)
            lines.append(f"{r}: {term}" if len(routes) > 1 else term)
            lines.append(f"  verified on {len(family)} algebras, {vr.checked} instances: "
                         f"{'pass' if vr.passed else 'FAIL'}")
        payload["routes"][r] = entry
    weak = [n for n, d in flags.items() if not all(d.values())]
    if weak:
        lines.append(f"note: {', '.join(weak)} fails monotonicity or the homomorphism property; "
                     "the routes need not agree")
    payload["found"] = found
    _emit(cfg, "search", payload, "\n".join(lines), out)
    return EXIT_OK if found else EXIT_NOT_FOUND


def cmd_verify(cfg: RunConfig, out) -> int:
    alg = resolve_algebra(cfg.algebra, cfg.corpus, cfg.limits)
    F, G = parse_operator(cfg.F), parse_operator(cfg.G)
    try:
        selection = parse_clause_selection(cfg.extra["clauses"])
    except ValueError as exc:
        raise ParseError(str(exc), "--clauses") from None
    reports = run_selection(alg, selection, F, G, cfg.budget, cfg.seed, cfg.samples, cfg.strict, cfg.limits)
    ok = not any(r.failed_assertion for r in reports)
    payload = {"algebra": alg.name, "operators": {"F": F.name, "G": G.name}, "seed": cfg.seed,
               "budget": cfg.budget, "reports": [r.to_dict() for r in reports], "ok": ok}
    text = f"{alg.name}  F={F.name}  G={G.name}\n{format_table(reports)}"
    for r in reports:
        if r.violations:
            text += f"\nfirst violation of {r.clause}: {json.dumps(r.violations[0], sort_keys=True)}"
    _emit(cfg, "verify", payload, text, out)
    return EXIT_OK if ok else EXIT_NOT_FOUND


def cmd_operators(cfg: RunConfig, out) -> int:
    algs = load_corpus(cfg.corpus, cfg.limits)
    ops = [parse_operator(t) for t in cfg.extra["ops"]]
    small = [a for a in algs if a.size <= cfg.extra["max_size"]]
    homs = [h for s in small for t in small for h in enumerate_homomorphisms(s, t)]
    payload = {"algebras": [a.name for a in algs], "homomorphisms": len(homs), "operators": []}
    lines = [f"{len(algs)} algebras, {len(homs)} homomorphisms between those of size <= {cfg.extra['max_size']}"]
    ok = True
    for op in ops:
        mono = [check_monotone(op, a) for a in algs]
        hom = check_hom_property(op, homs)
        mono_ok = all(m.passed for m in mono)
        ok &= mono_ok and hom.passed
        cex = [c for m in mono for c in m.counterexamples]
        payload["operators"].append({
            "operator": op.name,
            "monotone": {"status": "pass" if mono_ok else "fail", "checked": sum(m.checked for m in mono),
                         "counterexamples": cex[:20]},
            "homomorphism": {"status": "pass" if hom.passed else "fail", "checked": hom.checked,
                             "counterexamples": hom.counterexamples[:20]},
        })
        lines.append(f"{op.name}: monotone {'pass' if mono_ok else 'FAIL'}, "
                     f"homomorphism property {'pass' if hom.passed else 'FAIL'}")
        if cex:
            lines.append(f"  monotonicity counterexample: {json.dumps(cex[0], sort_keys=True)}")
        if hom.counterexamples:
            lines.append(f"  homomorphism counterexample: {json.dumps(hom.counterexamples[0], sort_keys=True)}")
    payload["ok"] = ok
    _emit(cfg, "operators", payload, "\n".join(lines), out)
    return EXIT_OK if ok else EXIT_NOT_FOUND


def cmd_free(cfg: RunConfig, out) -> int:
    alg = resolve_algebra(cfg.algebra, cfg.corpus, cfg.limits)
    k = cfg.extra["k"]
    if k < 0:
        raise ParseError("k must be non-negative", "-k")
    X = free_algebra(alg, k, cfg.limits)
    payload = {"algebra": alg.name, "k": k, "elements": len(X), "generators": list(X.generators)}
    lines = [f"free algebra on {k} generators in the variety of {alg.name}: {len(X)} elements",
             f"generators: {list(X.generators)}"]
    if cfg.extra["witnesses"]:
        payload["witnesses"] = [{"index": i, "term": format_term(w), "operation": list(X.elements[i])}
                                for i, w in enumerate(X.witnesses)]
        for i, w in enumerate(X.witnesses):
            lines.append(f"{i:>4}  {format_term(w)}  {list(X.elements[i])}")
    _emit(cfg, "free", payload, "\n".join(lines), out)
    return EXIT_OK


COMMANDS = {"closure": cmd_closure, "search": cmd_search, "verify": cmd_verify,
            "operators": cmd_operators, "free": cmd_free}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    extra = {k: v for k, v in vars(ns).items()
             if k not in {"subcommand", "algebra", "F", "G", "seed", "budget", "samples", "cap_free",
                          "output", "strict", "threads", "corpus"}}
    return RunConfig(
        subcommand=ns.subcommand, algebra=getattr(ns, "algebra", None),
        F=getattr(ns, "F", "diag"), G=getattr(ns, "G", "diag"), seed=ns.seed, budget=ns.budget,
        samples=ns.samples, cap_free=ns.cap_free, output=ns.output, strict=ns.strict,
        threads=ns.threads, corpus=ns.corpus, extra=extra,
    )


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.subcommand](cfg, out)
    except CapExceeded as exc:
        err.write(f"malrel: {exc}\n")
        return EXIT_CAP
    except (MalrelError, ValueError, FileNotFoundError, KeyError) as exc:
        err.write(f"malrel: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
