'''SMT-LIB v2 export of existential formulas, and the z3 backend of :func:`~tbpp.la.decide`.'''
import re
from fractions import Fraction
from typing import Dict, List, Optional

from ..logging import logger
from ..verdict import Verdict
from .rewrite import prenex
from .terms import Add, And, Atom, Bool, Const, Floor, Formula, Frac, LaError, Neg, Or, Scale, Term, Var, all_vars

try:
    import z3
except ImportError:  # the smt extra is not installed
    z3 = None

_SIMPLE = re.compile(r'^[A-Za-z~!@$%^&*_+=<>.?/-][A-Za-z0-9~!@$%^&*_+=<>.?/-]*$')


def symbol(name: str) -> str:
    return name if _SIMPLE.match(name) else f'|{name}|'


def real(q: Fraction) -> str:
    q = Fraction(q)
    body = f'{abs(q.numerator)}.0' if q.denominator == 1 else f'(/ {abs(q.numerator)}.0 {q.denominator}.0)'
    return f'(- {body})' if q < 0 else body


class _Writer:

    def __init__(self, reserved):
        self.floors: Dict[Term, str] = {}
        self.reserved = set(reserved)
        self.declarations: List[str] = []
        self.assertions: List[str] = []

    def floor_of(self, t: Term) -> str:
        if t not in self.floors:
            i = len(self.floors)
            while f'_n{i}' in self.reserved:
                i += 1
            name = f'_n{i}'
            self.reserved.add(name)
            self.floors[t] = name
            arg = self.term(t)
            self.declarations.append(f'(declare-fun {name} () Int)')
            self.assertions.append(f'(assert (<= (to_real {name}) {arg}))')
            self.assertions.append(f'(assert (< {arg} (+ (to_real {name}) 1.0)))')
        return f'(to_real {self.floors[t]})'

    def term(self, t: Term) -> str:
        if isinstance(t, Var):
            return f'(to_real {symbol(t.name)})' if t.integer else symbol(t.name)
        if isinstance(t, Const):
            return real(t.value)
        if isinstance(t, Floor):
            return self.floor_of(t.arg)
        if isinstance(t, Frac):
            return f'(- {self.term(t.arg)} {self.floor_of(t.arg)})'
        if isinstance(t, Neg):
            return f'(- {self.term(t.arg)})'
        if isinstance(t, Add):
            if len(t.args) == 1:
                return self.term(t.args[0])
            return '(+ ' + ' '.join(self.term(a) for a in t.args) + ')'
        if isinstance(t, Scale):
            return f'(* {real(Fraction(t.k))} {self.term(t.arg)})'
        raise LaError(f'not a term: {t!r}')

    def formula(self, f: Formula) -> str:
        if isinstance(f, Atom):
            return f'({f.rel} {self.term(f.lhs)} {self.term(f.rhs)})'
        if isinstance(f, (And, Or)):
            op = 'and' if isinstance(f, And) else 'or'
            return f'({op} ' + ' '.join(self.formula(g) for g in f.args) + ')'
        if isinstance(f, Bool):
            return 'true' if f.value else 'false'
        raise LaError(f'unexpected formula {f!r}')


def export_smt(f: Formula, check_sat: bool = True) -> str:
    '''
    SMT-LIB v2 script (logic ``QF_LIRA``) that is satisfiable iff ``f`` is.

    Existential variables become declared constants. ``floor(t)`` is a fresh integer ``n`` with
    ``n <= t < n + 1`` and ``frac(t)`` is ``t - n``.
    '''
    _, matrix = prenex(f)
    variables = sorted(all_vars(matrix), key=lambda x: x.name)
    w = _Writer(x.name for x in variables)
    body = w.formula(matrix)
    lines = ['(set-logic QF_LIRA)']
    lines += [f'(declare-fun {symbol(x.name)} () {"Int" if x.integer else "Real"})' for x in variables]
    lines += w.declarations
    lines += w.assertions
    lines.append(f'(assert {body})')
    if check_sat:
        lines.append('(check-sat)')
    return '\n'.join(lines) + '\n'


def has_z3() -> bool:
    return z3 is not None


def _fraction(v) -> Fraction:
    if z3.is_int_value(v):
        return Fraction(v.as_long())
    if z3.is_rational_value(v):
        return Fraction(v.numerator_as_long(), v.denominator_as_long())
    raise LaError(f'z3 returned a non-rational value {v}')


def solve_smt(f: Formula, timeout: Optional[int] = None) -> Verdict:
    '''
    Decide an existential formula with z3 on its :func:`export_smt` script.

    :param timeout: milliseconds before z3 gives up (``None``: no limit).
    :return: ``Sat`` with a valuation of every variable of the prenex matrix, ``Unsat`` or ``Unknown``.
    '''
    if z3 is None:
        raise LaError('the z3 backend needs z3-solver; install TBPP-check[smt]')
    _, matrix = prenex(f)
    solver = z3.Solver()
    if timeout:
        solver.set('timeout', timeout)
    solver.from_string(export_smt(f, check_sat=False))
    answer = solver.check()
    if answer == z3.unsat:
        return Verdict.unsat(backend='z3')
    if answer != z3.sat:
        reason = solver.reason_unknown()
        logger.warning(f'z3 answered unknown ({reason}).')
        return Verdict.unknown(f'z3: {reason}', backend='z3')
    model = solver.model()
    values = {d.name(): model[d] for d in model.decls()}
    valuation = {}
    for x in sorted(all_vars(matrix), key=lambda x: x.name):
        v = values.get(x.name)
        valuation[x.name] = Fraction(0) if v is None else _fraction(v)
    return Verdict.sat(valuation, backend='z3')
