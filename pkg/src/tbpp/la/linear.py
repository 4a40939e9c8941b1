'''
Linear constraints over exact rationals.

A :class:`Constraint` reads ``sum(c * x) + const REL 0`` with ``REL`` one of ``<=``, ``<``, ``=``.
Symbols are the term objects :class:`Var`, ``Floor(Var)`` and ``Frac(Var)``.

:func:`fourier_motzkin` decides conjunctions over the rationals, :func:`eliminate_equalities`
and :func:`tighten` prepare conjunctions over the integers for branch and bound.
'''
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd, lcm
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Tuple

from .terms import Add, Atom, Const, Floor, Frac, LaError, Neg, Scale, Term, Var

Symbol = Hashable


class SolverLimit(RuntimeError):
    '''A resource limit of a decision procedure was exceeded.'''


def symbol_key(s: Symbol):
    return str(s), repr(s)


@dataclass(frozen=True)
class Constraint:
    coeffs: Tuple[Tuple[Symbol, Fraction], ...]
    const: Fraction
    rel: str

    @classmethod
    def of(cls, coeffs: Mapping[Symbol, Fraction], const, rel: str) -> 'Constraint':
        items = sorted(((s, Fraction(c)) for s, c in coeffs.items() if c != 0), key=lambda sc: symbol_key(sc[0]))
        return cls(tuple(items), Fraction(const), rel)

    @property
    def symbols(self):
        return [s for s, _ in self.coeffs]

    def as_dict(self) -> Dict[Symbol, Fraction]:
        return dict(self.coeffs)

    def lhs(self, model: Mapping[Symbol, Fraction]) -> Fraction:
        return sum((c * model.get(s, 0) for s, c in self.coeffs), self.const)

    def holds(self, model: Mapping[Symbol, Fraction]) -> bool:
        v = self.lhs(model)
        return v <= 0 if self.rel == '<=' else v < 0 if self.rel == '<' else v == 0

    @property
    def trivial(self) -> Optional[bool]:
        '''Truth value of a constraint without symbols, ``None`` otherwise.'''
        if self.coeffs:
            return None
        return self.holds({})

    def substitute(self, s: Symbol, coeffs: Mapping[Symbol, Fraction], const: Fraction) -> 'Constraint':
        '''Replace ``s`` by ``sum(coeffs) + const``.'''
        mine = self.as_dict()
        a = mine.pop(s, 0)
        if a == 0:
            return self
        for t, c in coeffs.items():
            mine[t] = mine.get(t, 0) + a * c
        return Constraint.of(mine, self.const + a * const, self.rel)

    def scaled(self, k: Fraction) -> 'Constraint':
        return Constraint(tuple((s, c * k) for s, c in self.coeffs), self.const * k, self.rel)

    def __str__(self):
        terms = ' + '.join(f'{c}*{s}' for s, c in self.coeffs) or '0'
        return f'{terms} + {self.const} {self.rel} 0'


def linearize(t: Term) -> Tuple[Dict[Symbol, Fraction], Fraction]:
    '''Coefficients and constant of a linear term.'''
    if isinstance(t, Const):
        return {}, t.value
    if isinstance(t, Var):
        return {t: Fraction(1)}, Fraction(0)
    if isinstance(t, (Floor, Frac)):
        if not isinstance(t.arg, Var):
            raise LaError(f'{t} is not a linear symbol')
        return {t: Fraction(1)}, Fraction(0)
    if isinstance(t, (Neg, Scale)):
        k = -1 if isinstance(t, Neg) else t.k
        coeffs, const = linearize(t.arg)
        return {s: k * c for s, c in coeffs.items()}, k * const
    if isinstance(t, Add):
        out: Dict[Symbol, Fraction] = {}
        const = Fraction(0)
        for a in t.args:
            coeffs, c = linearize(a)
            const += c
            for s, v in coeffs.items():
                out[s] = out.get(s, 0) + v
        return out, const
    raise LaError(f'not a term: {t!r}')


def from_atom(a: Atom) -> Constraint:
    '''``lhs REL rhs`` as ``lhs - rhs REL 0``.'''
    lc, lk = linearize(a.lhs)
    rc, rk = linearize(a.rhs)
    for s, v in rc.items():
        lc[s] = lc.get(s, 0) - v
    return Constraint.of(lc, lk - rk, a.rel)


def as_constraints(items: Iterable) -> List[Constraint]:
    return [c if isinstance(c, Constraint) else from_atom(c) for c in items]


# rational conjunctions

def _normalized(c: Constraint) -> Constraint:
    '''Scale so that the first coefficient has absolute value 1.'''
    if not c.coeffs:
        return c
    return c.scaled(1 / abs(c.coeffs[0][1]))


def _dedupe(cs: Iterable[Constraint]) -> List[Constraint]:
    '''Keep the tightest constraint per coefficient vector.'''
    best: Dict[tuple, Constraint] = {}
    equalities = []
    for c in cs:
        if c.rel == '=':
            equalities.append(c)
            continue
        n = _normalized(c)
        old = best.get(n.coeffs)
        if old is None or n.const > old.const or (n.const == old.const and n.rel == '<'):
            best[n.coeffs] = n
    return equalities + list(best.values())


def fourier_motzkin(constraints: Iterable[Constraint]) -> Tuple[Optional[Dict[Symbol, Fraction]], dict]:
    '''
    Decide a conjunction over the rationals.

    Equalities are eliminated by substitution first. Each round eliminates the symbol with the
    fewest generated pairs; a combined bound is strict if any contributor is strict.

    :return: ``(model, statistics)``, ``model`` is ``None`` if the conjunction is unsatisfiable.
    '''
    cs = list(constraints)
    history: List[tuple] = []
    statistics = {'eliminated': 0, 'generated': 0}

    while True:
        eqs = [c for c in cs if c.rel == '=' and c.coeffs]
        if not eqs:
            break
        e = eqs[0]
        s, a = e.coeffs[0]
        coeffs = {t: -c / a for t, c in e.coeffs[1:]}
        const = -e.const / a
        history.append(('=', s, coeffs, const))
        cs = [c.substitute(s, coeffs, const) for c in cs if c is not e]

    for c in cs:
        if c.trivial is False:
            return None, statistics
    cs = _dedupe(c for c in cs if c.coeffs)

    while cs:
        symbols = sorted({s for c in cs for s in c.symbols}, key=symbol_key)

        def cost(s):
            pos = sum(1 for c in cs if c.as_dict().get(s, 0) > 0)
            neg = sum(1 for c in cs if c.as_dict().get(s, 0) < 0)
            return pos * neg - pos - neg

        s = min(symbols, key=cost)
        upper = [c for c in cs if c.as_dict().get(s, 0) > 0]
        lower = [c for c in cs if c.as_dict().get(s, 0) < 0]
        rest = [c for c in cs if c.as_dict().get(s, 0) == 0]
        history.append(('<', s, upper + lower))
        statistics['eliminated'] += 1
        for u in upper:
            un = u.scaled(1 / u.as_dict()[s])
            for lo in lower:
                ln = lo.scaled(1 / -lo.as_dict()[s])
                combined = un.as_dict()
                for t, v in ln.coeffs:
                    combined[t] = combined.get(t, 0) + v
                combined.pop(s, None)
                rel = '<' if '<' in (u.rel, lo.rel) else '<='
                c = Constraint.of(combined, un.const + ln.const, rel)
                if c.trivial is False:
                    return None, statistics
                if c.coeffs:
                    rest.append(c)
                statistics['generated'] += 1
        cs = _dedupe(rest)

    model: Dict[Symbol, Fraction] = {}
    for entry in reversed(history):
        if entry[0] == '=':
            _, s, coeffs, const = entry
            model[s] = sum((c * model.get(t, 0) for t, c in coeffs.items()), const)
            continue
        _, s, bounds = entry
        lo, lo_strict, hi, hi_strict = None, False, None, False
        for c in bounds:
            a = c.as_dict()[s]
            rest_value = c.lhs(model) - a * model.get(s, 0)
            bound = -rest_value / a
            strict = c.rel == '<'
            if a > 0:
                if hi is None or bound < hi or (bound == hi and strict):
                    hi, hi_strict = bound, strict
            elif lo is None or bound > lo or (bound == lo and strict):
                lo, lo_strict = bound, strict
        if lo is not None and hi is not None:
            model[s] = lo if lo == hi else (lo + hi) / 2
        elif lo is not None:
            model[s] = lo + 1 if lo_strict else lo
        elif hi is not None:
            model[s] = hi - 1 if hi_strict else hi
        else:
            model[s] = Fraction(0)
    return model, statistics


# integer conjunctions

def integral(c: Constraint) -> Constraint:
    '''Scale to integer coefficients; strict constraints become non-strict over the integers.'''
    m = 1
    for _, v in c.coeffs:
        m = lcm(m, v.denominator)
    m = lcm(m, c.const.denominator)
    c = c.scaled(Fraction(m))
    if c.rel == '<':
        c = Constraint(c.coeffs, c.const + 1, '<=')
    return c


def _gcd(c: Constraint) -> int:
    g = 0
    for _, v in c.coeffs:
        g = gcd(g, int(v))
    return g


class Substitution:
    '''``symbol = sum(coeffs) + const`` recorded during equality elimination.'''

    def __init__(self, symbol, coeffs, const):
        self.symbol = symbol
        self.coeffs = coeffs
        self.const = const

    def apply(self, model: Dict[Symbol, Fraction]):
        model[self.symbol] = sum((c * model.get(t, 0) for t, c in self.coeffs.items()), Fraction(self.const))


def eliminate_equalities(constraints: List[Constraint], fresh) -> Tuple[Optional[List[Constraint]], List[Substitution]]:
    '''
    Remove integer equalities by unimodular substitutions.

    A unit coefficient is solved for directly. Otherwise the symbol ``x`` with the smallest
    coefficient ``a`` is replaced by ``s - sum((b // a) * y)`` for a fresh integer ``s``, which
    shrinks the other coefficients to ``b mod a``.

    :param fresh: callable returning fresh integer symbols.
    :return: the remaining inequalities (``None`` if unsatisfiable) and the substitutions made.
    '''
    cs = [integral(c) for c in constraints]
    subs: List[Substitution] = []
    while True:
        eqs = [c for c in cs if c.rel == '=' and c.coeffs]
        if not eqs:
            break
        e = eqs[0]
        g = _gcd(e)
        if e.const % g:
            return None, subs
        e2 = e.scaled(Fraction(1, g))
        s, a = min(e2.coeffs, key=lambda sc: (abs(sc[1]), symbol_key(sc[0])))
        if abs(a) == 1:
            coeffs = {t: -c / a for t, c in e2.coeffs if t != s}
            const = -e2.const / a
            cs = [c for c in cs if c is not e]
        else:
            sigma = fresh()
            coeffs = {sigma: Fraction(1)}
            for t, c in e2.coeffs:
                if t != s:
                    coeffs[t] = Fraction(-(int(c) // int(a)))
            const = Fraction(0)
        subs.append(Substitution(s, coeffs, const))
        cs = [c.substitute(s, coeffs, const) for c in cs]
        for c in cs:
            if c.trivial is False:
                return None, subs
    return [c for c in cs if c.coeffs], subs


def tighten(c: Constraint) -> Constraint:
    '''Divide an integer inequality by the gcd of its coefficients and round the constant up.'''
    g = _gcd(c)
    if g <= 1:
        return c
    return Constraint(tuple((s, v / g) for s, v in c.coeffs), Fraction(ceil(c.const / g)), c.rel)


def small_model_bound(constraints: List[Constraint]) -> int:
    '''
    ``n * (m * a) ** (2m + 1)`` for ``n`` symbols, ``m`` constraints and largest absolute
    coefficient or constant ``a``: a feasible system has a solution within this bound.
    '''
    n = len({s for c in constraints for s in c.symbols})
    m = len(constraints)
    a = max([abs(int(v)) for c in constraints for _, v in c.coeffs] + [abs(int(c.const)) for c in constraints] + [1])
    return max(n, 1) * (m * a) ** (2 * m + 1)


def bounds_of(c: Constraint) -> Tuple[Optional[Fraction], Optional[Fraction]]:
    '''Bounds implied on the single symbol of a one-symbol integer inequality.'''
    (s, a), = c.coeffs
    b = -c.const / a
    if a > 0:
        return None, Fraction(floor(b))
    return Fraction(ceil(b)), None
