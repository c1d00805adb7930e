"""Check every clause on the 2-element semilattice for two operator pairs.

Modulo congruence closure a witness exists, so every clause is asserted.
Modulo the constant diagonal there is none, so the report is exploratory
and some clauses fail.
"""

from __future__ import annotations

from malrel import BUILTINS, run_selection
from malrel.corpus_io import resolve_algebra
from malrel.verifier import CLAUSE_IDS, format_table

alg = resolve_algebra("semilattice2")
for name in ("cg", "diag"):
    op = BUILTINS[name]
    print(f"F = G = {name}")
    print(format_table(run_selection(alg, list(CLAUSE_IDS) + ["f2"], op, op)))
    print()
