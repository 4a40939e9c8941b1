'''
Terms and formulas of linear arithmetic with integer part and fractional part operators.

Terms::

    t ::= x | k | floor(t) | frac(t) | -t | t + ... + t | k * t

Formulas are boolean combinations of atoms ``s <= t``, ``s < t`` and ``s = t`` under existential
quantifiers. The derived relations ``>=`` and ``>`` are built by :func:`ge` and :func:`gt`.

'''
import json
from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Callable, Dict, Iterable, Mapping, Tuple, Union


class LaError(ValueError):
    '''Raised for unbound variables and formulas outside the existential fragment.'''


class Term:
    '''Base class of terms. Python operators build terms; comparisons stay structural.'''

    def __add__(self, other):
        return Add((self, term(other)))

    def __radd__(self, other):
        return Add((term(other), self))

    def __neg__(self):
        return Neg(self)

    def __sub__(self, other):
        return Add((self, Neg(term(other))))

    def __rsub__(self, other):
        return Add((term(other), Neg(self)))

    def __mul__(self, k):
        return Scale(int(k), self)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Var(Term):
    name: str
    integer: bool = False

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const(Term):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'value', Fraction(self.value))

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Floor(Term):
    arg: Term

    def __str__(self):
        return f'floor({self.arg})'


@dataclass(frozen=True)
class Frac(Term):
    arg: Term

    def __str__(self):
        return f'frac({self.arg})'


@dataclass(frozen=True)
class Neg(Term):
    arg: Term

    def __str__(self):
        return f'-{_paren(self.arg)}'


@dataclass(frozen=True)
class Add(Term):
    args: Tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, 'args', tuple(self.args))

    def __str__(self):
        return ' + '.join(_paren(a) if isinstance(a, Add) else str(a) for a in self.args)


@dataclass(frozen=True)
class Scale(Term):
    k: int
    arg: Term

    def __str__(self):
        return f'{self.k}*{_paren(self.arg)}'


def _paren(t: Term) -> str:
    return f'({t})' if isinstance(t, (Add, Scale, Neg)) else str(t)


def term(x: Union[Term, int, Fraction, str]) -> Term:
    '''Coerce numbers to :class:`Const` and strings to rational :class:`Var`.'''
    if isinstance(x, Term):
        return x
    if isinstance(x, str):
        return Var(x)
    return Const(Fraction(x))


class Formula:
    '''Base class of formulas.'''

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return Not(self)


RELS = ('<=', '<', '=')


@dataclass(frozen=True)
class Atom(Formula):
    lhs: Term
    rel: str
    rhs: Term

    def __post_init__(self):
        if self.rel not in RELS:
            raise LaError(f'unknown relation {self.rel!r}')

    def __str__(self):
        return f'{self.lhs} {self.rel} {self.rhs}'


@dataclass(frozen=True)
class And(Formula):
    args: Tuple[Formula, ...]

    def __str__(self):
        return '(' + ' & '.join(map(str, self.args)) + ')'


@dataclass(frozen=True)
class Or(Formula):
    args: Tuple[Formula, ...]

    def __str__(self):
        return '(' + ' | '.join(map(str, self.args)) + ')'


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def __str__(self):
        return f'!{self.arg}'


@dataclass(frozen=True)
class Bool(Formula):
    value: bool

    def __str__(self):
        return 'true' if self.value else 'false'


TRUE = Bool(True)
FALSE = Bool(False)


@dataclass(frozen=True)
class Exists(Formula):
    vars: Tuple[Var, ...]
    body: Formula

    def __str__(self):
        return 'exists ' + ' '.join(map(str, self.vars)) + f'. {self.body}'


# builders

def le(s, t) -> Atom:
    return Atom(term(s), '<=', term(t))


def lt(s, t) -> Atom:
    return Atom(term(s), '<', term(t))


def eq(s, t) -> Atom:
    return Atom(term(s), '=', term(t))


def ge(s, t) -> Atom:
    return Atom(term(t), '<=', term(s))


def gt(s, t) -> Atom:
    return Atom(term(t), '<', term(s))


def total(terms: Iterable) -> Term:
    '''The sum of ``terms``; ``0`` for no terms.'''
    terms = [term(t) for t in terms]
    if not terms:
        return Const(0)
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


def conj(*fs: Formula) -> Formula:
    '''Flattened conjunction; ``true`` is dropped and ``false`` absorbs.'''
    args = []
    for f in fs:
        if isinstance(f, Bool):
            if not f.value:
                return FALSE
            continue
        args.extend(f.args if isinstance(f, And) else (f,))
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else And(tuple(args))


def disj(*fs: Formula) -> Formula:
    '''Flattened disjunction; ``false`` is dropped and ``true`` absorbs.'''
    args = []
    for f in fs:
        if isinstance(f, Bool):
            if f.value:
                return TRUE
            continue
        args.extend(f.args if isinstance(f, Or) else (f,))
    if not args:
        return FALSE
    return args[0] if len(args) == 1 else Or(tuple(args))


def exists(variables: Iterable[Var], body: Formula) -> Formula:
    variables = tuple(variables)
    if not variables:
        return body
    if isinstance(body, Exists):
        return Exists(variables + body.vars, body.body)
    return Exists(variables, body)


def between(lo, x, hi, strict_lo=False, strict_hi=False) -> Formula:
    return conj((lt if strict_lo else le)(lo, x), (lt if strict_hi else le)(x, hi))


# evaluation

def value(t: Term, v: Mapping[str, Fraction]) -> Fraction:
    if isinstance(t, Var):
        try:
            return Fraction(v[t.name])
        except KeyError:
            raise LaError(f'unbound variable {t.name}') from None
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Floor):
        return Fraction(floor(value(t.arg, v)))
    if isinstance(t, Frac):
        a = value(t.arg, v)
        return a - floor(a)
    if isinstance(t, Neg):
        return -value(t.arg, v)
    if isinstance(t, Add):
        return sum((value(a, v) for a in t.args), Fraction(0))
    if isinstance(t, Scale):
        return t.k * value(t.arg, v)
    raise LaError(f'not a term: {t!r}')


def evaluate(f: Formula, v: Mapping[str, Fraction]) -> bool:
    '''Truth value of ``f`` under ``v``; existential variables must be assigned in ``v``.'''
    if isinstance(f, Atom):
        a, b = value(f.lhs, v), value(f.rhs, v)
        return a <= b if f.rel == '<=' else a < b if f.rel == '<' else a == b
    if isinstance(f, And):
        return all(evaluate(g, v) for g in f.args)
    if isinstance(f, Or):
        return any(evaluate(g, v) for g in f.args)
    if isinstance(f, Not):
        return not evaluate(f.arg, v)
    if isinstance(f, Bool):
        return f.value
    if isinstance(f, Exists):
        return evaluate(f.body, v)
    raise LaError(f'not a formula: {f!r}')


# traversal

def subterms(t: Term):
    yield t
    if isinstance(t, (Floor, Frac, Neg, Scale)):
        yield from subterms(t.arg)
    elif isinstance(t, Add):
        for a in t.args:
            yield from subterms(a)


def atoms(f: Formula):
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (And, Or)):
        for g in f.args:
            yield from atoms(g)
    elif isinstance(f, Not):
        yield from atoms(f.arg)
    elif isinstance(f, Exists):
        yield from atoms(f.body)


def term_vars(t: Term):
    return {s for s in subterms(t) if isinstance(s, Var)}


def all_vars(f: Formula) -> set:
    out = set()
    for a in atoms(f):
        out |= term_vars(a.lhs) | term_vars(a.rhs)
    return out


def free_vars(f: Formula) -> set:
    if isinstance(f, Atom):
        return term_vars(f.lhs) | term_vars(f.rhs)
    if isinstance(f, (And, Or)):
        return set().union(*(free_vars(g) for g in f.args))
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, Exists):
        bound = {x.name for x in f.vars}
        return {x for x in free_vars(f.body) if x.name not in bound}
    return set()


def map_terms(f: Formula, fn: Callable[[Term], Term]) -> Formula:
    '''Apply ``fn`` to both sides of every atom.'''
    if isinstance(f, Atom):
        return Atom(fn(f.lhs), f.rel, fn(f.rhs))
    if isinstance(f, And):
        return And(tuple(map_terms(g, fn) for g in f.args))
    if isinstance(f, Or):
        return Or(tuple(map_terms(g, fn) for g in f.args))
    if isinstance(f, Not):
        return Not(map_terms(f.arg, fn))
    if isinstance(f, Exists):
        return Exists(f.vars, map_terms(f.body, fn))
    return f


def map_subterms(t: Term, fn: Callable[[Term], Term]) -> Term:
    '''Rebuild ``t`` bottom-up, applying ``fn`` to every node.'''
    if isinstance(t, (Floor, Frac, Neg)):
        t = type(t)(map_subterms(t.arg, fn))
    elif isinstance(t, Scale):
        t = Scale(t.k, map_subterms(t.arg, fn))
    elif isinstance(t, Add):
        t = Add(tuple(map_subterms(a, fn) for a in t.args))
    return fn(t)


def substitute(f: Formula, mapping: Mapping[str, Term]) -> Formula:
    '''Replace free variables by terms.'''
    if isinstance(f, Exists):
        bound = {x.name for x in f.vars}
        inner = {k: t for k, t in mapping.items() if k not in bound}
        return Exists(f.vars, substitute(f.body, inner))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(substitute(g, mapping) for g in f.args))
    if isinstance(f, Not):
        return Not(substitute(f.arg, mapping))
    if isinstance(f, Atom):
        def fn(t):
            return term(mapping[t.name]) if isinstance(t, Var) and t.name in mapping else t

        return map_terms(f, lambda t: map_subterms(t, fn))
    return f


def rename(f: Formula, names: Mapping[str, str]) -> Formula:
    '''Rename variables, free and bound alike.'''

    def fn(t):
        return Var(names.get(t.name, t.name), t.integer) if isinstance(t, Var) else t

    if isinstance(f, Exists):
        return Exists(tuple(fn(x) for x in f.vars), rename(f.body, names))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(rename(g, names) for g in f.args))
    if isinstance(f, Not):
        return Not(rename(f.arg, names))
    if isinstance(f, Atom):
        return map_terms(f, lambda t: map_subterms(t, fn))
    return f


class Fresh:
    '''Generator of variable names that do not occur in a set of reserved names.'''

    def __init__(self, reserved: Iterable[str] = (), prefix: str = '_v'):
        self.reserved = set(reserved)
        self.prefix = prefix
        self.count = 0

    def __call__(self, integer: bool = False, hint: str = '') -> Var:
        while True:
            name = f'{self.prefix}{hint}{self.count}'
            self.count += 1
            if name not in self.reserved:
                self.reserved.add(name)
                return Var(name, integer)


def rename_bound(f: Formula, fresh: Fresh = None) -> Formula:
    '''Rename bound variables that are bound twice or clash with free variables.'''
    fresh = fresh or Fresh({x.name for x in all_vars(f)} | {x.name for x in free_vars(f)}, '_b')
    taken = {x.name for x in free_vars(f)}

    def go(g):
        if isinstance(g, Exists):
            names = {}
            for x in g.vars:
                if x.name in taken:
                    names[x.name] = fresh(x.integer)
                taken.add(names[x.name].name if x.name in names else x.name)
            body = substitute(g.body, names)
            return Exists(tuple(names.get(x.name, x) for x in g.vars), go(body))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(h) for h in g.args))
        if isinstance(g, Not):
            return Not(go(g.arg))
        return g

    return go(f)


def size(f: Formula) -> int:
    '''Number of formula and term nodes.'''
    if isinstance(f, Atom):
        return 1 + sum(1 for _ in subterms(f.lhs)) + sum(1 for _ in subterms(f.rhs))
    if isinstance(f, (And, Or)):
        return 1 + sum(size(g) for g in f.args)
    if isinstance(f, (Not,)):
        return 1 + size(f.arg)
    if isinstance(f, Exists):
        return 1 + len(f.vars) + size(f.body)
    return 1


# JSON

def _term_dict(t: Term):
    if isinstance(t, Var):
        return {'var': t.name, 'integer': t.integer}
    if isinstance(t, Const):
        return {'const': str(t.value)}
    if isinstance(t, Add):
        return {'add': [_term_dict(a) for a in t.args]}
    if isinstance(t, Scale):
        return {'scale': t.k, 'arg': _term_dict(t.arg)}
    return {type(t).__name__.lower(): _term_dict(t.arg)}


def _term_from(d: dict) -> Term:
    if 'var' in d:
        return Var(d['var'], d.get('integer', False))
    if 'const' in d:
        return Const(Fraction(d['const']))
    if 'add' in d:
        return Add(tuple(_term_from(a) for a in d['add']))
    if 'scale' in d:
        return Scale(d['scale'], _term_from(d['arg']))
    (key, arg), = d.items()
    return {'floor': Floor, 'frac': Frac, 'neg': Neg}[key](_term_from(arg))


def to_dict(f: Formula) -> dict:
    if isinstance(f, Atom):
        return {'atom': f.rel, 'lhs': _term_dict(f.lhs), 'rhs': _term_dict(f.rhs)}
    if isinstance(f, (And, Or)):
        return {type(f).__name__.lower(): [to_dict(g) for g in f.args]}
    if isinstance(f, Not):
        return {'not': to_dict(f.arg)}
    if isinstance(f, Bool):
        return {'bool': f.value}
    return {'exists': [_term_dict(x) for x in f.vars], 'body': to_dict(f.body)}


def from_dict(d: dict) -> Formula:
    if 'atom' in d:
        return Atom(_term_from(d['lhs']), d['atom'], _term_from(d['rhs']))
    if 'and' in d:
        return And(tuple(from_dict(g) for g in d['and']))
    if 'or' in d:
        return Or(tuple(from_dict(g) for g in d['or']))
    if 'not' in d:
        return Not(from_dict(d['not']))
    if 'bool' in d:
        return Bool(d['bool'])
    return Exists(tuple(_term_from(x) for x in d['exists']), from_dict(d['body']))


def to_json(f: Formula, indent: int = None) -> str:
    return json.dumps(to_dict(f), indent=indent)


def from_json(text: str) -> Formula:
    return from_dict(json.loads(text))


Valuation = Dict[str, Fraction]
