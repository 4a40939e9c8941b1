'''
Linear arithmetic with integer and fractional parts.

:mod:`~tbpp.la.terms` builds formulas, :mod:`~tbpp.la.rewrite` separates them and
:func:`decide` answers satisfiability exactly, with the built-in procedure or with z3.
'''
from .linear import Constraint, SolverLimit, fourier_motzkin, from_atom, linearize
from .rewrite import (
    eliminate_scaling, is_separated, is_shallow, make_shallow, nnf, normalize, normalize_term, prenex, separate,
)
from .smt import export_smt, has_z3, solve_smt
from .solve import BACKENDS, backend_of, decide, solve_int_conjunction, solve_rat_conjunction
from .terms import (
    Add, And, Atom, Bool, Const, Exists, FALSE, Floor, Formula, Frac, Fresh, LaError, Neg, Not, Or, Scale, Term,
    TRUE, Var, all_vars, between, conj, disj, eq, evaluate, exists, free_vars, from_dict, from_json, ge, gt, le, lt,
    rename, rename_bound, size, substitute, term, to_dict, to_json, total, value,
)
