"""Search for terms that are Mal'cev modulo a pair of relation operators.

A term is Mal'cev modulo F, G when t(a,b,b) lies F(R)-above a and t(a,a,b)
lies G(R)-below b whenever a R b. With F = G = diag that is an ordinary
Mal'cev term. The projection x works as soon as G(R) contains R, so
with F = diag only G = diag separates the algebras with a genuine
Mal'cev term from the rest.
"""

from __future__ import annotations

from malrel import BUILTINS, find_term_cond_iv, format_term, load_corpus

OPS = ["diag", "tc", "tol", "cg", "full"]


def main() -> None:
    for alg in load_corpus():
        row = []
        for name in OPS:
            op = BUILTINS[name]
            w = find_term_cond_iv(alg, BUILTINS["diag"], op)
            row.append(f"G={name}: {format_term(w.term) if w else '-'}")
        print(f"{alg.name:13s} " + "  ".join(row))


if __name__ == "__main__":
    main()
