'''
Rewriting passes that bring an existential formula into separated form:

1. :func:`nnf` and :func:`prenex` push negations into atoms and pull quantifiers to the front.
2. :func:`make_shallow` names nested subterms with fresh variables.
3. :func:`eliminate_scaling` replaces ``k * x`` by sums of doubled copies of ``x``.
4. :func:`separate` rewrites floors and fractional parts to a fixpoint and splits every atom into
   atoms over integer parts only or fractional parts only.

Every pass is equisatisfiable with its input. Fresh variables start with an underscore.
'''
from fractions import Fraction
from math import ceil, floor
from typing import Dict, List, Tuple

from .terms import (
    Add, And, Atom, Bool, Const, Exists, FALSE, Floor, Formula, Frac, Fresh, LaError, Neg, Not, Or, Scale,
    Term, TRUE, Var, all_vars, conj, disj, eq, exists, free_vars, lt, map_subterms, rename_bound, term, total,
)


def negate_atom(a: Atom) -> Formula:
    if a.rel == '<=':
        return Atom(a.rhs, '<', a.lhs)
    if a.rel == '<':
        return Atom(a.rhs, '<=', a.lhs)
    return disj(Atom(a.lhs, '<', a.rhs), Atom(a.rhs, '<', a.lhs))


def nnf(f: Formula, positive: bool = True) -> Formula:
    '''
    Negation normal form without ``Not`` nodes.

    :raises LaError: if an existential quantifier occurs under a negation.
    '''
    if isinstance(f, Atom):
        return f if positive else negate_atom(f)
    if isinstance(f, Bool):
        return f if positive else Bool(not f.value)
    if isinstance(f, Not):
        return nnf(f.arg, not positive)
    if isinstance(f, And):
        parts = [nnf(g, positive) for g in f.args]
        return conj(*parts) if positive else disj(*parts)
    if isinstance(f, Or):
        parts = [nnf(g, positive) for g in f.args]
        return disj(*parts) if positive else conj(*parts)
    if isinstance(f, Exists):
        if not positive:
            raise LaError('universal quantification is outside the existential fragment')
        return exists(f.vars, nnf(f.body))
    raise LaError(f'not a formula: {f!r}')


def prenex(f: Formula) -> Tuple[Tuple[Var, ...], Formula]:
    '''Split an existential formula into its bound variables and a quantifier-free matrix in NNF.'''
    f = nnf(rename_bound(f))
    bound: List[Var] = []

    def pull(g):
        if isinstance(g, Exists):
            bound.extend(g.vars)
            return pull(g.body)
        if isinstance(g, And):
            return conj(*(pull(h) for h in g.args))
        if isinstance(g, Or):
            return disj(*(pull(h) for h in g.args))
        return g

    matrix = pull(f)
    return tuple(bound), matrix


def is_integer_term(t: Term) -> bool:
    if isinstance(t, Var):
        return t.integer
    if isinstance(t, Const):
        return t.value.denominator == 1
    if isinstance(t, Floor):
        return True
    if isinstance(t, Frac):
        return False
    if isinstance(t, (Neg, Scale)):
        return is_integer_term(t.arg)
    return all(is_integer_term(a) for a in t.args)


def _is_leaf(t: Term) -> bool:
    return isinstance(t, (Var, Const))


def is_shallow_term(t: Term) -> bool:
    if _is_leaf(t):
        return True
    if isinstance(t, Add):
        return all(_is_leaf(a) for a in t.args)
    return _is_leaf(t.arg)


def _atoms_of(f: Formula):
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (And, Or)):
        for g in f.args:
            yield from _atoms_of(g)
    elif isinstance(f, Not):
        yield from _atoms_of(f.arg)
    elif isinstance(f, Exists):
        yield from _atoms_of(f.body)


def is_shallow(f: Formula) -> bool:
    return all(is_shallow_term(a.lhs) and is_shallow_term(a.rhs) for a in _atoms_of(f))


def _map_atoms(f: Formula, fn) -> Formula:
    if isinstance(f, Atom):
        return fn(f)
    if isinstance(f, And):
        return conj(*(_map_atoms(g, fn) for g in f.args))
    if isinstance(f, Or):
        return disj(*(_map_atoms(g, fn) for g in f.args))
    if isinstance(f, Exists):
        return exists(f.vars, _map_atoms(f.body, fn))
    if isinstance(f, Not):
        return Not(_map_atoms(f.arg, fn))
    return f


def _fresh_for(f: Formula, prefix: str) -> Fresh:
    return Fresh({x.name for x in all_vars(f)} | {x.name for x in free_vars(f)}, prefix)


def make_shallow(f: Formula, fresh: Fresh = None) -> Formula:
    '''
    Name every compound argument of an operator with a fresh existential variable.

    ``floor(x + y) <= z`` becomes ``exists u. u = x + y & floor(u) <= z``. Equal subterms share
    one variable. Shallow input is returned unchanged.
    '''
    if is_shallow(f):
        return f
    bound, matrix = prenex(f)
    fresh = fresh or _fresh_for(f, '_u')
    names: Dict[Term, Var] = {}
    definitions: List[Formula] = []

    def atomize(t: Term) -> Term:
        if _is_leaf(t):
            return t
        s = flat(t)
        if s not in names:
            u = fresh(is_integer_term(s))
            names[s] = u
            definitions.append(eq(u, s))
        return names[s]

    def flat(t: Term) -> Term:
        if _is_leaf(t):
            return t
        if isinstance(t, Add):
            return Add(tuple(atomize(a) for a in t.args))
        if isinstance(t, Scale):
            return Scale(t.k, atomize(t.arg))
        return type(t)(atomize(t.arg))

    matrix = _map_atoms(matrix, lambda a: Atom(flat(a.lhs), a.rel, flat(a.rhs)))
    return exists(bound + tuple(names.values()), conj(*definitions, matrix))


def eliminate_scaling(f: Formula, fresh: Fresh = None) -> Formula:
    '''
    Replace ``k * x`` by sums over the chain ``x0 = x, x1 = x0 + x0, x2 = x1 + x1, ...``.

    ``5 * x`` becomes ``x0 + x2``. Chains are shared between occurrences of the same variable.
    '''
    if not is_shallow(f):
        f = make_shallow(f, fresh)
    if not any(isinstance(t, Scale) for a in _atoms_of(f) for t in (a.lhs, a.rhs)):
        return f
    bound, matrix = prenex(f)
    fresh = fresh or _fresh_for(f, '_d')
    chains: Dict[Term, List[Var]] = {}
    negations: Dict[Tuple[int, Term], Var] = {}
    introduced: List[Var] = []
    definitions: List[Formula] = []

    def define(s: Term, integer: bool) -> Var:
        u = fresh(integer)
        introduced.append(u)
        definitions.append(eq(u, s))
        return u

    def multiple(k: int, x: Term) -> Term:
        c = chains.setdefault(x, [])
        if not c:
            c.append(define(x, is_integer_term(x)))
        while len(c) < k.bit_length():
            c.append(define(Add((c[-1], c[-1])), c[-1].integer))
        return total(c[i] for i in range(k.bit_length()) if k >> i & 1)

    def scaled(t: Term) -> Term:
        if not isinstance(t, Scale):
            return t
        k, x = t.k, t.arg
        if isinstance(x, Const):
            return Const(k * x.value)
        if k == 0:
            return Const(0)
        if k == 1:
            return x
        if k == -1:
            return Neg(x)
        if k > 0:
            return multiple(k, x)
        s = multiple(-k, x)
        if isinstance(s, Var):
            return Neg(s)
        if (-k, x) not in negations:
            negations[-k, x] = define(s, is_integer_term(x))
        return Neg(negations[-k, x])

    matrix = _map_atoms(matrix, lambda a: Atom(scaled(a.lhs), a.rel, scaled(a.rhs)))
    return exists(bound + tuple(introduced), conj(*definitions, matrix))


def _args(t: Term):
    return t.args if isinstance(t, Add) else ()


# floor and fractional part normalization

def _step(t: Term) -> Term:
    '''One root rewrite, or ``t`` itself when no rule applies.'''
    if isinstance(t, Floor):
        a = t.arg
        if isinstance(a, Const):
            return Const(floor(a.value))
        if isinstance(a, Floor) or is_integer_term(a):
            return a
        if isinstance(a, Frac):
            return Const(0)
        if isinstance(a, Add):
            ints = [b for b in a.args if is_integer_term(b)]
            if ints and len(ints) < len(a.args):
                rest = [b for b in a.args if not is_integer_term(b)]
                return Add((Floor(total(rest)), *ints))
    if isinstance(t, Frac):
        a = t.arg
        if isinstance(a, Const):
            return Const(a.value - floor(a.value))
        if is_integer_term(a):
            return Const(0)
        if isinstance(a, Frac):
            return a
        if isinstance(a, Add):
            rest = [b for b in a.args if not is_integer_term(b)]
            if len(rest) < len(a.args):
                return Frac(total(rest))
    if isinstance(t, Neg):
        if isinstance(t.arg, Neg):
            return t.arg.arg
        if isinstance(t.arg, Const):
            return Const(-t.arg.value)
    if isinstance(t, Scale) and isinstance(t.arg, Const):
        return Const(t.k * t.arg.value)
    if isinstance(t, Add):
        args = []
        k = Fraction(0)
        for a in t.args:
            for b in (a.args if isinstance(a, Add) else (a,)):
                if isinstance(b, Const):
                    k += b.value
                else:
                    args.append(b)
        if k:
            args.append(Const(k))
        if tuple(args) != t.args:
            return total(args)
    return t


def _innermost(t: Term) -> Term:
    while True:
        u = map_subterms(t, _step)
        if u == t:
            return t
        t = u


def _outermost(t: Term) -> Term:
    while True:
        u = _step(t)
        if u == t:
            if isinstance(t, (Floor, Frac, Neg)):
                u = type(t)(_outermost(t.arg))
            elif isinstance(t, Scale):
                u = Scale(t.k, _outermost(t.arg))
            elif isinstance(t, Add):
                u = Add(tuple(_outermost(a) for a in t.args))
            u = _step(u)
        if u == t:
            return t
        t = u


def normalize_term(t: Term, order: str = 'innermost') -> Term:
    '''
    Rewrite floors and fractional parts to a fixpoint::

        floor(k) -> k'   frac(k) -> k''   floor(floor(x)) -> floor(x)   frac(floor(x)) -> 0
        floor(frac(x)) -> 0   frac(frac(x)) -> frac(x)   floor(t + n) -> floor(t) + n   frac(t + n) -> frac(t)

    for integer-sorted ``n``, together with flattening of sums and folding of constants.

    :param order: ``innermost`` or ``outermost`` strategy; both reach the same normal form.
    '''
    if order == 'innermost':
        return _innermost(t)
    if order == 'outermost':
        return _outermost(t)
    raise ValueError(f'unknown rewriting order {order!r}')


def normalize(f: Formula, order: str = 'innermost') -> Formula:
    return _map_atoms(f, lambda a: Atom(normalize_term(a.lhs, order), a.rel, normalize_term(a.rhs, order)))


# separation

INT, FRAC, MIXED = 'int', 'frac', 'mixed'


def sort_of(t: Term) -> set:
    '''Sorts of the symbols a term mentions.'''
    if isinstance(t, Const):
        return set()
    if isinstance(t, Var):
        return {INT} if t.integer else {MIXED}
    if isinstance(t, Floor):
        return {INT} if isinstance(t.arg, Var) else {MIXED}
    if isinstance(t, Frac):
        return {FRAC} if isinstance(t.arg, Var) and not t.arg.integer else {MIXED}
    if isinstance(t, (Neg, Scale)):
        return sort_of(t.arg)
    return set().union(*(sort_of(a) for a in t.args))


def atom_sort(a: Atom):
    '''``int``, ``frac``, ``None`` for constant atoms, or ``mixed``.'''
    s = sort_of(a.lhs) | sort_of(a.rhs)
    if not s:
        return None
    if len(s) == 1 and MIXED not in s:
        return s.pop()
    return MIXED


def is_separated(f: Formula) -> bool:
    return all(atom_sort(a) != MIXED for a in _atoms_of(f))


class _Case:
    '''Under ``cond`` a term equals ``ipart + fpart`` with ``0 <= fpart < 1``.'''

    __slots__ = ('cond', 'ipart', 'fpart')

    def __init__(self, cond: Formula, ipart: Term, fpart: Term):
        self.cond = cond
        self.ipart = ipart
        self.fpart = fpart


def _constant(t: Term):
    t = normalize_term(t)
    return t.value if isinstance(t, Const) else None


def _split(t: Term) -> List[_Case]:
    if isinstance(t, Const):
        n = floor(t.value)
        return [_Case(TRUE, Const(n), Const(t.value - n))]
    if isinstance(t, Var):
        if t.integer:
            return [_Case(TRUE, t, Const(0))]
        return [_Case(TRUE, Floor(t), Frac(t))]
    if isinstance(t, Floor):
        return [_Case(c.cond, c.ipart, Const(0)) for c in _split(t.arg)]
    if isinstance(t, Frac):
        return [_Case(c.cond, Const(0), c.fpart) for c in _split(t.arg)]
    if isinstance(t, Neg):
        out = []
        for c in _split(t.arg):
            k = _constant(c.fpart)
            if k is not None:
                if k == 0:
                    out.append(_Case(c.cond, Neg(c.ipart), Const(0)))
                else:
                    out.append(_Case(c.cond, Add((Neg(c.ipart), Const(-1))), Const(1 - k)))
                continue
            out.append(_Case(conj(c.cond, eq(c.fpart, 0)), Neg(c.ipart), Const(0)))
            out.append(_Case(conj(c.cond, lt(0, c.fpart)), Add((Neg(c.ipart), Const(-1))), Add((Const(1), Neg(c.fpart)))))
        return out
    if isinstance(t, Add):
        combos = [_Case(TRUE, Const(0), Const(0))]
        for a in t.args:
            combos = [
                _Case(conj(c.cond, d.cond), Add((c.ipart, d.ipart)), Add((c.fpart, d.fpart)))
                for c in combos for d in _split(a)
            ]
        out = []
        for c in combos:
            s = normalize_term(c.fpart)
            k = _constant(s)
            if k is not None:
                n = floor(k)
                out.append(_Case(c.cond, Add((c.ipart, Const(n))), Const(k - n)))
                continue
            parts = _args(s) or (s,)
            offset = sum((a.value for a in parts if isinstance(a, Const)), Fraction(0))
            rising = len([a for a in parts if not isinstance(a, (Const, Neg))])
            falling = len([a for a in parts if isinstance(a, Neg)])
            for carry in range(floor(offset) - falling, ceil(offset + rising)):
                cond = conj(c.cond, Atom(Const(carry), '<=', s), lt(s, carry + 1))
                out.append(_Case(cond, Add((c.ipart, Const(carry))), Add((s, Const(-carry)))))
        return out
    raise LaError(f'cannot separate {t}; eliminate scaling first')


def _fold(a: Atom) -> Formula:
    lhs, rhs = normalize_term(a.lhs), normalize_term(a.rhs)
    if isinstance(lhs, Const) and isinstance(rhs, Const):
        x, y = lhs.value, rhs.value
        return Bool(x <= y if a.rel == '<=' else x < y if a.rel == '<' else x == y)
    return Atom(lhs, a.rel, rhs)


def _fold_all(f: Formula) -> Formula:
    return _map_atoms(f, _fold)


def separate_atom(a: Atom) -> Formula:
    '''Expand one atom into atoms over integer parts and atoms over fractional parts.'''
    if atom_sort(a) != MIXED:
        return _fold(a)
    branches = []
    for s in _split(a.lhs):
        for t in _split(a.rhs):
            ints_eq = eq(s.ipart, t.ipart)
            fracs = Atom(s.fpart, a.rel, t.fpart)
            if a.rel == '=':
                body = conj(ints_eq, fracs)
            else:
                body = disj(lt(s.ipart, t.ipart), conj(ints_eq, fracs))
            branches.append(conj(s.cond, t.cond, body))
    return _fold_all(disj(*branches))


def separate(f: Formula, order: str = 'innermost') -> Formula:
    '''
    Separated, equisatisfiable form of an existential formula.

    Floors and fractional parts are first rewritten to a fixpoint (:func:`normalize_term`), then
    every atom ``s ~ t`` mentioning a rational variable is expanded into
    ``floor(s) < floor(t) | (floor(s) = floor(t) & frac(s) ~ frac(t))`` with case splits on the
    carries of sums and on the sign of fractional parts under negation. Atoms that are already
    separated are kept.
    '''
    bound, matrix = prenex(f)
    matrix = normalize(matrix, order)
    g = exists(bound, matrix)
    if not is_shallow(g):
        g = make_shallow(g)
    g = eliminate_scaling(g)
    bound, matrix = prenex(g)
    return exists(bound, _map_atoms(matrix, separate_atom))
