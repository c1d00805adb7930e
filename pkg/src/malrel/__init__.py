"""malrel: finite algebras, relational calculus and Mal'cev terms modulo relation operators."""

from __future__ import annotations

from .algebra import (
    FiniteAlgebra, FreeAlgebra, Operation, algebra_from_function, dump_algebra, enumerate_subuniverses,
    eval_term, free_algebra, generate_subalgebra, induced_subalgebra, load_algebra, make_algebra,
    parse_algebra, product_power, term_operation,
)
from .config import DEFAULT_LIMITS, Limits
from .corpus_io import corpus_dir, load_corpus, resolve_algebra
from .errors import CapExceeded, CarrierMismatch, MalrelError, NotAdmissible, ParseError, UnboundName
from .homs import Homomorphism, enumerate_homomorphisms, map_relation
from .malcev import (
    MalcevWitness, check_cond_vii, check_cond_x, find_term_cond_iv, malcev_family, malcev_term_on_algebra,
    principal_free_relation, verify_malcev_term,
)
from .operators import (
    BUILTINS, CG, CORE_OPERATORS, DIAG, FULL, IDENTITY, TC, TOL, RelationOperator, apply_operator,
    check_hom_property, check_monotone, composite, parse_operator, pointwise_compose, triple_pointwise,
)
from .relations import (
    AdmissibleRelation, BinaryRelation, compatible_closure, compose, compose_n, congruence_closure, converse,
    enumerate_admissible, generated_admissible, power, rel_sum, tolerance_closure, transitive_closure,
)
from .relexpr import Evaluator, eval_rel_expr, parse_expr
from .terms import App, Var, format_term, parse_term
from .verifier import (
    CLAUSES, VerificationReport, check_clause, check_equivalence_suite, check_theorem_f2, run_selection,
)

__version__ = "0.1.0"
