"""Brute-force checks of the consequences of a Mal'cev-modulo term.

Every clause is a chain of inclusions ``e0 <= e1 <= ...`` between
relational expressions. Variables named ``R``, ``S``, ``R1``, ... range
over the reflexive admissible relations of the algebra; ``T``, ``T1``,
``T2`` range over arbitrary relations (all of them on 2-element carriers,
a seeded sample otherwise). Some clauses carry an integer parameter.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import relations as rel
from .algebra import FiniteAlgebra
from .config import DEFAULT_LIMITS, Limits
from .errors import MalrelError
from .homs import enumerate_homomorphisms
from .malcev import (
    ROUTES, check_cond_vii, check_cond_x, find_term_cond_iv, malcev_family, malcev_term_on_algebra,
    verify_malcev_term,
)
from .operators import RelationOperator, check_hom_property, check_monotone, triple_pointwise
from .relations import BinaryRelation
from .relexpr import Evaluator, RelExpr, parse_expr
from .tables import MAX_BATCH_CARRIER, BatchEvaluator
from .terms import Term, format_term

CLAUSE_IDS = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi", "xii", "xiii", "xiv")
SPECIAL_IDS = ("f2", "equiv")

DEFAULT_BUDGET = 10**6
DEFAULT_THETA_SAMPLES = 200
BATCH = 1 << 16
MAX_RECORDED = 20


@dataclass(frozen=True)
class Inclusion:
    lhs: RelExpr
    rhs: RelExpr
    text: str


@dataclass(frozen=True)
class ClauseSpec:
    """One clause: its variables, parameter range and inclusion chains."""

    id: str
    theta_vars: tuple[str, ...]
    params: tuple
    param_name: str
    adm_vars_fn: Callable[[object], tuple[str, ...]]
    chains_fn: Callable[[object], list[list[str]]]

    def adm_vars(self, p) -> tuple[str, ...]:
        return self.adm_vars_fn(p)

    def inclusions(self, p) -> list[Inclusion]:
        out = []
        for chain in self.chains_fn(p):
            for lo, hi in zip(chain, chain[1:]):
                out.append(Inclusion(parse_expr(lo), parse_expr(hi), f"{lo}  <=  {hi}"))
        return out


def _fixed(*names):
    return lambda p: names


def _chain_vars(k):
    return tuple(f"R{i}" for i in range(1, k + 1))


def _bar_union(items):
    return "bar(" + " u ".join(items) + ")"


def _clause_iv(n):
    sb = "S" if n % 2 == 0 else "R"
    return [[f"compn(R, S, {n + 2})",
             f"F(R) o bar(F(R) u F(S))^{n} o bar(R u S) o bar(G(R) u G(S))^{n} o G({sb})"]]


def _clause_xii(k):
    R = _chain_vars(k)
    parts = [f"F({R[0]})"]
    parts += [_bar_union([f"F({r})" for r in R[:j]]) for j in range(2, k)]
    parts.append(_bar_union(R))
    parts += [_bar_union([f"G({r})" for r in R[j - 1:]]) for j in range(2, k)]
    parts.append(f"G({R[-1]})")
    return [[" o ".join(R), " o ".join(parts)]]


def _clause_xiii(k):
    R = _chain_vars(k)
    fs = " + ".join(f"F({r})" for r in R)
    gs = " + ".join(f"G({r})" for r in R)
    return [[" + ".join(R), f"({fs}) o {_bar_union(R)} o ({gs})"]]


def _clause_xiv(k):
    R = _chain_vars(k)
    fs = " + ".join(f"F({r}) + F(conv({r}))" for r in R)
    gs = " + ".join(f"G({r}) + G(conv({r}))" for r in R)
    return [[f"cg({' u '.join(R)})", f"({fs}) o {_bar_union(R)} o ({gs})"]]


CLAUSES: dict[str, ClauseSpec] = {c.id: c for c in [
    ClauseSpec("i", ("T", "T1", "T2"), (None,), "", _fixed("R", "S"), lambda p: [
        ["diagram(R, S, T, T1, T2)", "F(R) o bar(T2 u T u T1) o G(S)"]]),
    ClauseSpec("ii", ("T",), (None,), "", _fixed("R", "S"), lambda p: [
        ["R o T o S", "F(R) o bar((R o T) u (T o S)) o G(S)"]]),
    ClauseSpec("iii", (), (None,), "", _fixed("R", "S"), lambda p: [
        ["R o S", "F(R) o bar(R u S) o G(S)", "F(R) o S o R o G(S)"]]),
    ClauseSpec("iv", (), (0, 1, 2, 3), "n", _fixed("R", "S"), _clause_iv),
    ClauseSpec("v", (), (None,), "", _fixed("R", "S"), lambda p: [
        ["R + S", "(F(R) + F(S)) o bar(R u S) o (G(R) + G(S))", "(F(R) + F(S)) o R o S o (G(R) + G(S))"]]),
    ClauseSpec("vi", (), (None,), "", _fixed("R"), lambda p: [["R o R", "F(R) o R o G(R)"]]),
    ClauseSpec("vii", (), (0, 1, 2, 3), "n", _fixed("R"), lambda n: [
        [f"R^{n + 1}", f"F(R)^{n} o R o G(R)^{n}"]]),
    ClauseSpec("viii", (), (None,), "", _fixed("R"), lambda p: [["tc(R)", "tc(F(R)) o R o tc(G(R))"]]),
    ClauseSpec("ix", (), (None,), "", _fixed("R"), lambda p: [
        ["conv(R)", "F(conv(R)) o R o G(conv(R))"], ["R", "F(R) o conv(R) o G(R)"]]),
    ClauseSpec("x", (), (None,), "", _fixed("R", "S"), lambda p: [
        ["R + conv(S)", "(F(R) + F(conv(S))) o bar(R u S) o (G(R) + G(conv(S)))",
         "(F(R) + F(conv(S))) o R o S o (G(R) + G(conv(S)))"]]),
    ClauseSpec("xi", (), (None,), "", _fixed("R"), lambda p: [
        ["cg(R)", "(F(R) + F(conv(R))) o R o (G(R) + G(conv(R)))"]]),
    ClauseSpec("xii", (), (2, 3, 4), "k", _chain_vars, _clause_xii),
    ClauseSpec("xiii", (), (2, 3, 4), "k", _chain_vars, _clause_xiii),
    ClauseSpec("xiv", (), (2, 3, 4), "k", _chain_vars, _clause_xiv),
]}


def parse_clause_selection(text: str) -> list[str]:
    """``"i-xiv"``, ``"vi,ix"``, ``"iii-v,f2,equiv"`` -> clause ids in order."""
    order = CLAUSE_IDS + SPECIAL_IDS
    out: list[str] = []
    for part in text.split(","):
        part = part.strip().lower()
        if not part:
            continue
        if "-" in part:
            lo, hi = (s.strip() for s in part.split("-", 1))
            if lo not in CLAUSE_IDS or hi not in CLAUSE_IDS:
                raise ValueError(f"bad clause range {part!r}")
            i, j = CLAUSE_IDS.index(lo), CLAUSE_IDS.index(hi)
            if i > j:
                raise ValueError(f"empty clause range {part!r}")
            picked = CLAUSE_IDS[i:j + 1]
        elif part in order:
            picked = (part,)
        else:
            raise ValueError(f"unknown clause {part!r}")
        out.extend(c for c in picked if c not in out)
    if not out:
        raise ValueError("no clauses selected")
    return out


# --- reports --------------------------------------------------------------------


@dataclass
class VerificationReport:
    clause: str
    algebra: str
    operators: tuple[str, str]
    instances: int = 0
    violations: list = field(default_factory=list)
    violation_count: int = 0
    status: str = "pass"
    asserted: bool = True
    note: str = ""
    details: dict = field(default_factory=dict)

    def add_violation(self, record: dict) -> None:
        self.violation_count += 1
        self.status = "fail"
        if len(self.violations) < MAX_RECORDED:
            self.violations.append(record)

    @property
    def failed_assertion(self) -> bool:
        return self.asserted and self.status == "fail"

    def to_dict(self) -> dict:
        return {
            "clause": self.clause,
            "algebra": self.algebra,
            "operators": {"F": self.operators[0], "G": self.operators[1]},
            "status": self.status,
            "asserted": self.asserted,
            "instances": self.instances,
            "violation_count": self.violation_count,
            "violations": self.violations,
            "note": self.note,
            "details": self.details,
        }


def _pairs(R: BinaryRelation) -> list[list[int]]:
    return [list(p) for p in sorted(R.pairs())]


def _resolve_precondition(alg, F, G, witness, limits) -> tuple[bool, str]:
    if witness is None:
        witness = malcev_term_on_algebra(alg, F, G, limits)
    if witness is None or witness is False:
        return False, f"exploratory: {alg.name} has no term Mal'cev modulo {F.name}, {G.name}"
    return True, f"witness {format_term(witness)}"


def check_clause(alg: FiniteAlgebra, clause: ClauseSpec | str, F: RelationOperator, G: RelationOperator,
                 budget: int = DEFAULT_BUDGET, seed: int = 0, theta_samples: int = DEFAULT_THETA_SAMPLES,
                 relations: Sequence[BinaryRelation] | None = None, witness: Term | bool | None = None,
                 strict: bool = True, limits: Limits = DEFAULT_LIMITS) -> VerificationReport:
    """Check every instance of ``clause`` on ``alg``.

    ``witness`` may be a known term, ``False`` to force exploratory mode,
    or ``None`` to search for a term Mal'cev modulo ``F``, ``G`` on ``alg``.
    ``relations`` overrides the admissible relations quantified over.
    Instances are counted against ``budget``; running out marks the report
    skipped unless a violation was already found.
    """
    if isinstance(clause, str):
        clause = CLAUSES[clause]
    report = VerificationReport(clause.id, alg.name, (F.name, G.name))
    if budget <= 0:
        raise ValueError("budget must be positive")
    report.asserted, report.note = _resolve_precondition(alg, F, G, witness, limits)
    adm = list(relations) if relations is not None else rel.enumerate_admissible(alg)
    if alg.size > MAX_BATCH_CARRIER:
        return _check_clause_scalar(report, alg, clause, F, G, adm, budget, seed, theta_samples, strict)

    ev = BatchEvaluator(alg, {"F": F, "G": G}, strict=strict)
    adm_codes = ev.codes(adm)
    n = alg.size
    rng = np.random.default_rng(seed)
    total_planned = 0
    plans = []
    for p in clause.params:
        names = clause.adm_vars(p)
        if clause.theta_vars:
            if n <= 2:
                space = np.arange(1 << (n * n), dtype=np.int64)
                grids = np.meshgrid(*([space] * len(clause.theta_vars)), indexing="ij")
                thetas = np.stack([g.ravel() for g in grids], axis=1)
            else:
                thetas = rng.integers(0, 1 << (n * n), size=(theta_samples, len(clause.theta_vars)), dtype=np.int64)
        else:
            thetas = np.zeros((1, 0), dtype=np.int64)
        shape = (len(adm_codes),) * len(names) + (len(thetas),)
        size = int(np.prod(shape))
        plans.append((p, names, thetas, shape, size))
        total_planned += size
    report.details["planned"] = total_planned
    report.details["relations"] = len(adm_codes)

    done = 0
    for p, names, thetas, shape, size in plans:
        incs = clause.inclusions(p)
        for start in range(0, size, BATCH):
            stop = min(size, start + BATCH)
            if done + (stop - start) > budget:
                stop = start + max(0, budget - done)
            if stop <= start:
                break
            idx = np.unravel_index(np.arange(start, stop, dtype=np.int64), shape)
            env = {v: adm_codes[idx[j]] for j, v in enumerate(names)}
            for j, v in enumerate(clause.theta_vars):
                env[v] = thetas[idx[-1], j]
            memo: dict = {}
            for step, inc in enumerate(incs):
                lhs = ev.evaluate(inc.lhs, env, memo)
                rhs = ev.evaluate(inc.rhs, env, memo)
                bad = np.nonzero(lhs & ~rhs)[0]
                if len(bad) == 0:
                    continue
                report.violation_count += len(bad)
                report.status = "fail"
                for b in bad[:max(0, MAX_RECORDED - len(report.violations))].tolist():
                    missing = BinaryRelation(n, int(lhs[b] & ~rhs[b]))
                    report.violations.append({
                        **({clause.param_name: p} if clause.param_name else {}),
                        "inclusion": inc.text,
                        "bindings": {v: _pairs(BinaryRelation(n, int(env[v][b]))) for v in sorted(env)},
                        "missing": _pairs(missing),
                    })
            done += stop - start
        if done >= budget and done < total_planned:
            break
    report.instances = done
    if done < total_planned and report.status != "fail":
        report.status = "skipped"
        report.note += f"; budget exhausted after {done} of {total_planned} instances"
    if ev.coercions:
        report.details["coercions"] = ev.coercions
    return report


def _check_clause_scalar(report, alg, clause, F, G, adm, budget, seed, theta_samples, strict):
    """Binding-at-a-time fallback for carriers too large for the batch encoding."""
    ev = Evaluator(alg, {"F": F, "G": G}, strict=strict)
    rng = np.random.default_rng(seed)
    n = alg.size
    nbytes = (n * n + 7) // 8
    mask = (1 << (n * n)) - 1
    done = 0
    plans = []
    for p in clause.params:
        thetas = [tuple(BinaryRelation(n, int.from_bytes(rng.bytes(nbytes), "little") & mask)
                        for _ in clause.theta_vars) for _ in range(theta_samples if clause.theta_vars else 1)]
        plans.append((p, thetas))
    total = sum(len(adm) ** len(clause.adm_vars(p)) * len(th) for p, th in plans)
    report.details["planned"] = total
    report.details["relations"] = len(adm)
    for p, thetas in plans:
        names = clause.adm_vars(p)
        incs = clause.inclusions(p)
        for combo in itertools.product(adm, repeat=len(names)):
            for th in thetas:
                if done >= budget:
                    break
                env = dict(zip(names, combo)) | dict(zip(clause.theta_vars, th))
                for inc in incs:
                    lhs, rhs = ev.evaluate(inc.lhs, env), ev.evaluate(inc.rhs, env)
                    if not lhs <= rhs:
                        report.violation_count += 1
                        report.status = "fail"
                        if len(report.violations) < MAX_RECORDED:
                            report.violations.append({
                                **({clause.param_name: p} if clause.param_name else {}),
                                "inclusion": inc.text,
                                "bindings": {v: _pairs(env[v]) for v in sorted(env)},
                                "missing": _pairs(BinaryRelation(n, lhs.bits & ~rhs.bits)),
                            })
                done += 1
    report.instances = done
    if done < total and report.status != "fail":
        report.status = "skipped"
        report.note += f"; budget exhausted after {done} of {total} instances"
    if ev.coercions:
        report.details["coercions"] = len(ev.coercions)
    return report


def check_theorem_f2(alg: FiniteAlgebra, F: RelationOperator, G: RelationOperator, budget: int = DEFAULT_BUDGET,
                     limits: Limits = DEFAULT_LIMITS) -> VerificationReport:
    """A witness for ``(F, G)`` should give one for the triple pointwise squares."""
    F2, G2 = triple_pointwise(F), triple_pointwise(G)
    report = VerificationReport("f2", alg.name, (F.name, G.name))
    w = find_term_cond_iv(alg, F, G, limits)
    report.instances = 1
    report.details = {"F'": F2.name, "G'": G2.name, "witness": None, "witness'": None}
    if w is None:
        report.note = "antecedent fails: no witness for (F, G); passes vacuously"
        return report
    report.details["witness"] = format_term(w.term)
    w2 = find_term_cond_iv(alg, F2, G2, limits)
    report.instances = 2
    if w2 is None:
        report.add_violation({"witness": format_term(w.term), "missing": "no witness for (F', G')"})
        report.note = "a witness for (F, G) exists but none for (F', G')"
    else:
        report.details["witness'"] = format_term(w2.term)
    return report


def operator_guarantee(alg: FiniteAlgebra, ops: Iterable[RelationOperator],
                       limits: Limits = DEFAULT_LIMITS) -> dict[str, dict[str, bool]]:
    """Monotonicity and the homomorphism property of each operator on ``alg`` and its subalgebras."""
    family, rels = malcev_family(alg, limits)
    small = [a for a in family if a.size <= alg.size]
    homs = [h for s in small for t in small for h in enumerate_homomorphisms(s, t)]
    out = {}
    for op in ops:
        if op.name in out:
            continue
        mono = all(check_monotone(op, a).passed for a in small)
        hom = check_hom_property(op, homs, rels).passed
        out[op.name] = {"monotone": mono, "homomorphism": hom}
    return out


def check_equivalence_suite(alg: FiniteAlgebra, F: RelationOperator, G: RelationOperator,
                            budget: int = DEFAULT_BUDGET, full: bool = False,
                            limits: Limits = DEFAULT_LIMITS) -> VerificationReport:
    """Routes iv, vii and x must agree; witnesses must verify on alg, subalgebras and the square."""
    report = VerificationReport("equiv", alg.name, (F.name, G.name))
    answers = {
        "iv": find_term_cond_iv(alg, F, G, limits),
        "vii": check_cond_vii(alg, F, G, full=full, limits=limits),
        "x": check_cond_x(alg, F, G, full=full, limits=limits),
    }
    report.instances = 3
    report.details["answers"] = {r: w is not None for r, w in answers.items()}
    report.details["witnesses"] = {r: (format_term(w.term) if w else None) for r, w in answers.items()}
    flags = operator_guarantee(alg, (F, G), limits)
    report.details["operator_properties"] = flags
    report.asserted = all(v for d in flags.values() for v in d.values())
    notes = [] if report.asserted else ["equivalence not guaranteed: an operator fails monotonicity or the "
                                        "homomorphism property"]
    if len(set(report.details["answers"].values())) > 1:
        report.add_violation({"disagreement": report.details["answers"]})
    elif answers["iv"] is not None:
        family, rels = malcev_family(alg, limits)
        for route, w in answers.items():
            vr = verify_malcev_term(family, w.term, F, G, rels)
            report.instances += vr.checked
            for v in vr.violations:
                report.add_violation({"route": route, **v})
        for member in family:
            for cid in ("vi", "ix"):
                sub = check_clause(member, cid, F, G, budget=budget, relations=rels[member],
                                   witness=answers["iv"].term, limits=limits)
                report.instances += sub.instances
                for v in sub.violations:
                    report.add_violation({"clause": cid, "algebra": member.name, **v})
                if sub.status == "skipped":
                    notes.append(f"clause {cid} on {member.name} skipped")
    report.note = "; ".join(notes)
    return report


# --- rendering ------------------------------------------------------------------

SCHEMA = "malrel-report/1"


def report_document(kind: str, payload: dict) -> dict:
    return {"schema": SCHEMA, "kind": kind, **payload}


def format_table(reports: Sequence[VerificationReport]) -> str:
    rows = [("clause", "status", "mode", "instances", "violations", "note")]
    for r in reports:
        rows.append((r.clause, r.status, "asserted" if r.asserted else "exploratory",
                     str(r.instances), str(r.violation_count), r.note))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = []
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row[:5], widths)) + "  " + row[5])
    return "\n".join(line.rstrip() for line in lines)


def run_selection(alg: FiniteAlgebra, selection: Sequence[str], F: RelationOperator, G: RelationOperator,
                  budget: int = DEFAULT_BUDGET, seed: int = 0, theta_samples: int = DEFAULT_THETA_SAMPLES,
                  strict: bool = True, limits: Limits = DEFAULT_LIMITS) -> list[VerificationReport]:
    """Run the selected clauses, sharing one precondition search."""
    needs_term = any(c in CLAUSES for c in selection)
    witness = (malcev_term_on_algebra(alg, F, G, limits) or False) if needs_term else None
    out = []
    for cid in selection:
        if cid == "f2":
            out.append(check_theorem_f2(alg, F, G, budget, limits))
        elif cid == "equiv":
            out.append(check_equivalence_suite(alg, F, G, budget, limits=limits))
        elif cid in CLAUSES:
            out.append(check_clause(alg, cid, F, G, budget, seed, theta_samples, witness=witness,
                                    strict=strict, limits=limits))
        else:
            raise MalrelError(f"unknown clause {cid!r}")
    return out


__all__ = [
    "CLAUSES", "CLAUSE_IDS", "ClauseSpec", "Inclusion", "VerificationReport", "check_clause",
    "check_equivalence_suite", "check_theorem_f2", "format_table", "operator_guarantee",
    "parse_clause_selection", "report_document", "run_selection", "ROUTES",
]
