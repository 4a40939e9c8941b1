'''
TBPP models

The object model of timed basic parallel processes and its textual modeling language:

* :class:`Atom`, :class:`Guard`: clock constraints ``x ~ k``.
* :class:`Rule`: ``X -[guard; update]-> rhs`` with at most two rhs nonterminals.
* :class:`TbppModel`: clocks, nonterminals and rules.
* :class:`Query`: what should be decided about a model.

Source level transformations live here as well: constant-update desugaring, projection of
branching rules to a timed automaton and the normalization of resets on branching rules.

'''
import json
from collections import Counter, deque
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from . import config
from .logging import logger

RELATIONS = ('<', '<=', '=', '>=', '>')


class ModelError(ValueError):
    '''Raised for syntax errors and ill-formed models.'''

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f'{message} (line {line}, column {column})'
        super().__init__(message)


@dataclass(frozen=True)
class Atom:
    clock: str
    rel: str
    bound: int

    def holds(self, value) -> bool:
        return {
            '<': value < self.bound,
            '<=': value <= self.bound,
            '=': value == self.bound,
            '>=': value >= self.bound,
            '>': value > self.bound,
        }[self.rel]

    def __str__(self):
        return f'{self.clock} {self.rel} {self.bound}'


FALSE_BOUND = 0


@dataclass(frozen=True)
class Guard:
    '''
    Guard

    A conjunction of atoms. The empty guard is the trivial constraint.
    '''
    atoms: Tuple[Atom, ...] = ()

    def holds(self, valuation: Mapping[str, Fraction]) -> bool:
        return all(a.holds(valuation[a.clock]) for a in self.atoms)

    @property
    def clocks(self):
        return {a.clock for a in self.atoms}

    @property
    def constants(self):
        return {a.bound for a in self.atoms}

    def on(self, clock: str) -> 'Guard':
        '''The atoms constraining ``clock``.'''
        return Guard(tuple(a for a in self.atoms if a.clock == clock))

    def is_false(self) -> bool:
        '''True if the guard is syntactically unsatisfiable for some clock.'''
        for c in self.clocks:
            lo, lo_strict, hi, hi_strict = self.bounds(c)
            if hi is not None and (hi < lo or (hi == lo and (lo_strict or hi_strict))):
                return True
        return False

    def bounds(self, clock: str):
        '''Interval ``(lo, lo_strict, hi, hi_strict)`` the guard allows for ``clock``; ``hi`` may be ``None``.'''
        lo, lo_strict, hi, hi_strict = 0, False, None, False
        for a in self.on(clock).atoms:
            if a.rel in ('>', '>=', '='):
                strict = a.rel == '>'
                if a.bound > lo or (a.bound == lo and strict):
                    lo, lo_strict = a.bound, strict
            if a.rel in ('<', '<=', '='):
                strict = a.rel == '<'
                if hi is None or a.bound < hi or (a.bound == hi and strict):
                    hi, hi_strict = a.bound, strict
        return lo, lo_strict, hi, hi_strict

    def normalize(self) -> 'Guard':
        '''Keep at most one atom per clock and relation (the tightest one).'''
        atoms = []
        for c in sorted(self.clocks):
            lo, lo_strict, hi, hi_strict = self.bounds(c)
            if hi is not None and (hi < lo or (hi == lo and (lo_strict or hi_strict))):
                atoms.append(Atom(c, '<', FALSE_BOUND))
            elif hi is not None and hi == lo:
                atoms.append(Atom(c, '=', lo))
            else:
                if lo > 0 or lo_strict:
                    atoms.append(Atom(c, '>' if lo_strict else '>=', lo))
                if hi is not None:
                    atoms.append(Atom(c, '<' if hi_strict else '<=', hi))
        return Guard(tuple(atoms))

    def __and__(self, other: 'Guard') -> 'Guard':
        return Guard(self.atoms + other.atoms)

    def __str__(self):
        return '[' + ', '.join(str(a) for a in self.atoms) + ']'


Source = Union[str, int]


def apply_assignment(assign: Iterable[Tuple[str, Source]], valuation: Mapping[str, Fraction]) -> Dict[str, Fraction]:
    '''Apply ``x := e`` updates left to right.'''
    v = dict(valuation)
    for target, source in assign:
        v[target] = Fraction(source) if isinstance(source, int) else v[source]
    return v


@dataclass(frozen=True)
class Rule:
    lhs: str
    guard: Guard = Guard()
    assign: Tuple[Tuple[str, Source], ...] = ()
    rhs: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'rhs', tuple(sorted(self.rhs)))
        object.__setattr__(self, 'assign', tuple((t, s) for t, s in self.assign))

    @property
    def is_vanishing(self):
        return len(self.rhs) == 0

    @property
    def is_unary(self):
        return len(self.rhs) == 1

    @property
    def is_branching(self):
        return len(self.rhs) == 2

    @property
    def resets(self):
        '''Clocks set to the constant 0 by this rule.'''
        return {t for t, s in self.assign if s == 0 and isinstance(s, int)}

    def apply(self, valuation: Mapping[str, Fraction]) -> Dict[str, Fraction]:
        return apply_assignment(self.assign, valuation)

    def to_text(self):
        guard = f' {self.guard}' if self.guard.atoms else ''
        update = ''
        if self.assign:
            update = ' {' + ', '.join(f'{t} := {s}' for t, s in self.assign) + '}'
        rhs = ' '.join(self.rhs)
        return f"rule {self.lhs}{guard}{update} -> {rhs};"

    def to_dict(self):
        return {
            'lhs': self.lhs,
            'guard': [[a.clock, a.rel, a.bound] for a in self.guard.atoms],
            'assign': [[t, s] for t, s in self.assign],
            'rhs': list(self.rhs),
        }

    @classmethod
    def from_dict(cls, d: dict):
        return cls(
            lhs=d['lhs'],
            guard=Guard(tuple(Atom(c, r, b) for c, r, b in d.get('guard', []))),
            assign=tuple((t, s) for t, s in d.get('assign', [])),
            rhs=tuple(sorted(d.get('rhs', []))),
        )

    def __str__(self):
        return self.to_text()[len('rule '):-1]


@dataclass(frozen=True)
class TbppModel:
    '''
    TbppModel

    :param clocks: clock names.
    :param nonterminals: nonterminal names.
    :param rules: the rules; rule ids used in runs are indices into this tuple.
    '''
    clocks: Tuple[str, ...]
    nonterminals: Tuple[str, ...]
    rules: Tuple[Rule, ...] = ()

    @cached_property
    def max_constant(self) -> int:
        ks = [0]
        for r in self.rules:
            ks.extend(a.bound for a in r.guard.atoms)
            ks.extend(s for _, s in r.assign if isinstance(s, int))
        return max(ks)

    @cached_property
    def nt_index(self) -> Dict[str, int]:
        return {x: i for i, x in enumerate(self.nonterminals)}

    @cached_property
    def clock_index(self) -> Dict[str, int]:
        return {x: i for i, x in enumerate(self.clocks)}

    @property
    def is_ta(self):
        return not any(r.is_branching for r in self.rules)

    def rules_of(self, lhs: str) -> List[Tuple[int, Rule]]:
        return [(i, r) for i, r in enumerate(self.rules) if r.lhs == lhs]

    def constants(self) -> set:
        '''All integer constants occurring in guards.'''
        return {a.bound for r in self.rules for a in r.guard.atoms} | {0}

    def replace_rules(self, rules: Iterable[Rule], nonterminals: Optional[Iterable[str]] = None) -> 'TbppModel':
        return TbppModel(self.clocks, tuple(nonterminals) if nonterminals is not None else self.nonterminals, tuple(rules))

    def to_text(self, query: Optional['Query'] = None) -> str:
        '''Pretty print in the modeling language; ``parse_document`` reads it back.'''
        lines = [
            'clocks ' + ' '.join(self.clocks) + ';',
            'nonterminals ' + ' '.join(self.nonterminals) + ';',
        ]
        lines.extend(r.to_text() for r in self.rules)
        if query is not None:
            lines.extend(query.to_text())
        return '\n'.join(lines) + '\n'

    def to_dict(self):
        return {
            'clocks': list(self.clocks),
            'nonterminals': list(self.nonterminals),
            'rules': [r.to_dict() for r in self.rules],
        }

    @classmethod
    def from_dict(cls, d: dict) -> 'TbppModel':
        model = cls(tuple(d['clocks']), tuple(d['nonterminals']), tuple(Rule.from_dict(r) for r in d.get('rules', [])))
        check(model)
        return model

    def save(self, url: Path):
        with open(url, 'w') as f:
            json.dump(self.to_dict(), f, indent=4)
        return self

    @classmethod
    def load(cls, url: Path) -> 'TbppModel':
        url = Path(url)
        if url.suffix == '.json':
            with open(url, 'r') as f:
                return cls.from_dict(json.load(f))
        return parse_model(url.read_text(encoding='utf8'))


class Mode(str, Enum):
    reach = 'reach'
    cover = 'cover'
    simple_reach = 'simple-reach'
    simple_cover = 'simple-cover'
    nonempty = 'nonempty'
    ternary = 'ternary'

    @property
    def is_simple(self):
        return self in (Mode.simple_reach, Mode.simple_cover)

    @property
    def is_reach(self):
        return self in (Mode.reach, Mode.simple_reach, Mode.nonempty)


@dataclass(frozen=True)
class Query:
    '''
    Query

    :param mode: the decision problem.
    :param initial: initial nonterminal, started with all clocks 0.
    :param targets: target multiset (sorted), all clocks 0.
    :param delta: exact duration for ternary queries.
    :param u: initial clock value for ternary queries.
    :param v: final clock value for ternary queries.
    '''
    mode: Mode
    initial: str
    targets: Tuple[str, ...] = ()
    delta: Optional[Fraction] = None
    u: Fraction = Fraction(0)
    v: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, 'mode', Mode(self.mode))
        object.__setattr__(self, 'targets', tuple(sorted(self.targets)))

    @property
    def target_counts(self) -> Counter:
        return Counter(self.targets)

    def to_text(self) -> List[str]:
        lines = [f'init {self.initial};', 'targets ' + ' '.join(self.targets) + ';']
        if self.mode is Mode.ternary:
            extra = f' {self.u} {self.v}' if (self.u or self.v) else ''
            lines.append(f'query ternary {self.delta}{extra};')
        else:
            lines.append(f'query {self.mode.value};')
        return lines

    def to_dict(self):
        return {
            'mode': self.mode.value,
            'initial': self.initial,
            'targets': list(self.targets),
            'delta': None if self.delta is None else str(self.delta),
            'u': str(self.u),
            'v': str(self.v),
        }

    @classmethod
    def from_dict(cls, d: dict) -> 'Query':
        return cls(
            mode=Mode(d['mode']),
            initial=d['initial'],
            targets=tuple(d.get('targets', [])),
            delta=None if d.get('delta') is None else Fraction(d['delta']),
            u=Fraction(d.get('u', 0)),
            v=Fraction(d.get('v', 0)),
        )


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str

    def __str__(self):
        return f'{self.kind}: {self.message}'


GRAMMAR = r'''
    start: statement*
    ?statement: clocks | nonterminals | init | targets | rule | query
    clocks: "clocks" NAME* ";"
    nonterminals: "nonterminals" NAME* ";"
    init: "init" NAME ";"
    targets: "targets" NAME* ";"
    rule: "rule" NAME guard? update? "->" NAME* ";"
    guard: "[" (atom ("," atom)*)? "]"
    atom: NAME REL NUMBER
    update: "{" (assign ("," assign)*)? "}"
    assign: NAME ":=" (NAME | NUMBER)
    query: "query" MODE NUMBER* ";"

    REL: "<=" | ">=" | "<" | ">" | "="
    MODE: "simple-reach" | "simple-cover" | "reach" | "cover" | "nonempty" | "ternary"
    NUMBER: /\d+(\/\d+)?/
    NAME: /[A-Za-z_][A-Za-z0-9_@.^]*/
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
'''

PARSER = Lark(GRAMMAR, parser='lalr', propagate_positions=True)


@v_args(inline=True)
class _Document(Transformer):
    '''Turn the parse tree into ``(kind, payload, line, column)`` statements.'''

    def start(self, *statements):
        return list(statements)

    def clocks(self, *names):
        return ('clocks', [str(n) for n in names], names[0].line if names else None)

    def nonterminals(self, *names):
        return ('nonterminals', [str(n) for n in names], names[0].line if names else None)

    def init(self, name):
        return ('init', str(name), name.line)

    def targets(self, *names):
        return ('targets', [str(n) for n in names], names[0].line if names else None)

    def atom(self, clock, rel, number):
        if '/' in number:
            raise ModelError(f'guard constants must be integers, got {number}', number.line, number.column)
        return Atom(str(clock), str(rel), int(number))

    def guard(self, *atoms):
        return Guard(tuple(atoms))

    def assign(self, target, source):
        if source.type == 'NUMBER':
            if '/' in source:
                raise ModelError(f'assigned constants must be integers, got {source}', source.line, source.column)
            return (str(target), int(source))
        return (str(target), str(source))

    def update(self, *assigns):
        return tuple(assigns)

    def rule(self, lhs, *rest):
        guard, assign, rhs = Guard(), (), []
        for item in rest:
            if isinstance(item, Guard):
                guard = item
            elif isinstance(item, tuple):
                assign = item
            else:
                rhs.append(str(item))
        if len(rhs) > 2:
            raise ModelError(f'rhs size {len(rhs)} exceeds 2 in rule for {lhs}', lhs.line, lhs.column)
        targets = [t for t, _ in assign]
        if len(set(targets)) != len(targets):
            raise ModelError(f'simultaneous assignment to the same clock in rule for {lhs}', lhs.line, lhs.column)
        return ('rule', Rule(str(lhs), guard, assign, tuple(sorted(rhs))), lhs.line)

    def query(self, mode, *numbers):
        return ('query', (str(mode), [Fraction(str(n)) for n in numbers]), mode.line)


def parse_document(text: str) -> Tuple[TbppModel, Optional[Query]]:
    '''
    Parse a model and an optional query.

    :param text: the document in the modeling language.

    :return: ``(model, query)``; ``query`` is ``None`` when the document has no ``query`` statement.
    '''
    try:
        statements = _Document().transform(PARSER.parse(text))
    except UnexpectedInput as e:
        raise ModelError(f'syntax error: unexpected input {e.get_context(text).strip()!r}', e.line, e.column) from e
    except VisitError as e:
        if isinstance(e.orig_exc, ModelError):
            raise e.orig_exc from e
        raise

    clocks, nonterminals, rules, lines = [], [], [], {}
    init, targets, query = None, [], None
    for kind, payload, line in statements:
        if kind == 'clocks':
            clocks.extend(payload)
        elif kind == 'nonterminals':
            nonterminals.extend(payload)
        elif kind == 'rule':
            lines[len(rules)] = line
            rules.append(payload)
        elif kind == 'init':
            init = payload
        elif kind == 'targets':
            targets.extend(payload)
        elif kind == 'query':
            query = (payload, line)

    model = TbppModel(tuple(clocks), tuple(nonterminals), tuple(rules))
    for kind, names in (('clock', model.clocks), ('nonterminal', model.nonterminals)):
        duplicates = sorted(n for n, c in Counter(names).items() if c > 1)
        if duplicates:
            raise ModelError(f'duplicate {kind} declaration: {", ".join(duplicates)}')
    for d in validate(model):
        rule = getattr(d, "rule", None)
        raise ModelError(d.message, lines.get(rule), 1 if rule is not None else None)

    if query is None and init is None:
        return model, None

    (mode, numbers), line = query if query is not None else (('cover', []), None)
    if init is None:
        raise ModelError('query without init statement', line, 1)
    mode = Mode(mode)
    delta, u, v = None, Fraction(0), Fraction(0)
    if mode is Mode.ternary:
        if len(numbers) not in (1, 3):
            raise ModelError('ternary query needs a duration and optionally start and end clock values', line, 1)
        delta = numbers[0]
        if len(numbers) == 3:
            u, v = numbers[1], numbers[2]
    elif numbers:
        raise ModelError(f'query {mode.value} takes no numbers', line, 1)
    q = Query(mode, init, tuple(targets), delta, u, v)
    for d in validate_query(model, q):
        raise ModelError(d.message, line, 1)
    return model, q


def parse_model(text: str) -> TbppModel:
    '''
    Parse a model in the modeling language.

    :param text: the model text, e.g. ``"clocks x; nonterminals X;"``.

    :return: a validated :class:`TbppModel`.
    '''
    model, _ = parse_document(text)
    logger.debug(f'Parsed model ({len(model.clocks)} clocks, {len(model.nonterminals)} nonterminals, '
                 f'{len(model.rules)} rules).')
    return model


@dataclass(frozen=True)
class RuleDiagnostic(Diagnostic):
    rule: Optional[int] = None


def validate(model: TbppModel) -> List[Diagnostic]:
    '''
    Check the model invariants.

    :return: one diagnostic per violation; empty iff the model is well formed.
    '''
    out: List[Diagnostic] = []
    for kind, names in (('clock', model.clocks), ('nonterminal', model.nonterminals)):
        for n, c in Counter(names).items():
            if c > 1:
                out.append(Diagnostic(f'duplicate-{kind}', f'{kind} {n} declared {c} times'))
    clocks, nts = set(model.clocks), set(model.nonterminals)
    for i, r in enumerate(model.rules):
        if r.lhs not in nts:
            out.append(RuleDiagnostic('undeclared-nonterminal', f'rule {i}: undeclared nonterminal {r.lhs}', i))
        for y in r.rhs:
            if y not in nts:
                out.append(RuleDiagnostic('undeclared-nonterminal', f'rule {i}: undeclared nonterminal {y}', i))
        if len(r.rhs) > 2:
            out.append(RuleDiagnostic('rhs-size', f'rule {i}: rhs size {len(r.rhs)} exceeds 2', i))
        for a in r.guard.atoms:
            if a.clock not in clocks:
                out.append(RuleDiagnostic('undeclared-clock', f'rule {i}: undeclared clock {a.clock}', i))
            if a.rel not in RELATIONS:
                out.append(RuleDiagnostic('relation', f'rule {i}: unknown relation {a.rel}', i))
            if not isinstance(a.bound, int) or a.bound < 0:
                out.append(RuleDiagnostic('negative-constant', f'rule {i}: guard bound {a.bound} is not a nonnegative integer', i))
        for t, s in r.assign:
            if t not in clocks:
                out.append(RuleDiagnostic('undeclared-clock', f'rule {i}: undeclared clock {t}', i))
            if isinstance(s, int):
                if s < 0:
                    out.append(RuleDiagnostic('negative-constant', f'rule {i}: assigned constant {s} is negative', i))
            elif s not in clocks:
                out.append(RuleDiagnostic('undeclared-clock', f'rule {i}: undeclared clock {s}', i))
    return out


def validate_query(model: TbppModel, query: Query) -> List[Diagnostic]:
    out = []
    nts = set(model.nonterminals)
    for x in (query.initial, *query.targets):
        if x not in nts:
            out.append(Diagnostic('undeclared-nonterminal', f'query mentions undeclared nonterminal {x}'))
    if query.mode.is_simple and len(query.targets) != 1:
        out.append(Diagnostic('target-size', f'{query.mode.value} needs exactly one target'))
    if query.mode is Mode.nonempty and query.targets:
        out.append(Diagnostic('target-size', 'nonempty queries have no targets'))
    if query.mode is Mode.ternary:
        if not model.is_ta:
            out.append(Diagnostic('ternary', 'ternary queries apply to timed automata only'))
        if len(query.targets) != 1:
            out.append(Diagnostic('target-size', 'ternary queries need exactly one target location'))
        if query.delta is None or query.delta < 0:
            out.append(Diagnostic('ternary', 'ternary queries need a nonnegative duration'))
    for x, c in query.target_counts.items():
        if c > config.settings.max_multiplicity:
            out.append(Diagnostic('multiplicity', f'target {x} has multiplicity {c} above {config.settings.max_multiplicity}'))
    return out


def check(model: TbppModel) -> TbppModel:
    '''Raise :class:`ModelError` on the first diagnostic.'''
    for d in validate(model):
        raise ModelError(d.message)
    return model


def require_one_clock(model: TbppModel) -> str:
    '''
    Check the input of the 1-clock pipelines and return the clock name.

    Clock copies ``x := y`` between distinct clocks are rejected; with one clock they cannot occur
    except as ``x := x``.
    '''
    if len(model.clocks) != 1:
        raise ModelError(f'expected a 1-clock model, got {len(model.clocks)} clocks')
    x = model.clocks[0]
    for i, r in enumerate(model.rules):
        for t, s in r.assign:
            if isinstance(s, str) and s != t:
                raise ModelError(f'rule {i}: clock copy {t} := {s} is not supported by 1-clock procedures')
    return x


def project_to_ta(model: TbppModel, keep_vanishing: bool = False) -> TbppModel:
    '''
    Replace each branching rule ``X -> Y Z`` by ``X -> Y`` and ``X -> Z``.

    :param keep_vanishing: keep rules with empty rhs.
    '''
    rules = []
    for r in model.rules:
        if r.is_branching:
            for y in dict.fromkeys(r.rhs):
                rules.append(Rule(r.lhs, r.guard, r.assign, (y,)))
        elif r.is_unary or keep_vanishing:
            rules.append(r)
    return model.replace_rules(rules)


def normalize_branching_resets(model: TbppModel) -> TbppModel:
    '''
    Move updates off branching rules.

    ``X -[g; R]-> Y Z`` becomes ``X -[g; R]-> X.rN`` and ``X.rN -[x = 0]-> Y Z`` where ``x`` is a
    clock reset by ``R``, so that the branching still happens without delay.
    '''
    rules, nts = [], list(model.nonterminals)
    for i, r in enumerate(model.rules):
        if not (r.is_branching and r.assign):
            rules.append(r)
            continue
        resets = sorted(r.resets)
        if not resets:
            raise ModelError(f'rule {i}: branching rule with updates but no reset cannot be normalized')
        mid = f'{r.lhs}.r{i}'
        while mid in nts:
            mid += '_'
        nts.append(mid)
        rules.append(Rule(r.lhs, r.guard, r.assign, (mid,)))
        rules.append(Rule(mid, Guard((Atom(resets[0], '=', 0),)), (), r.rhs))
    return TbppModel(model.clocks, tuple(nts), tuple(rules))


def _offset_name(x: str, offsets: Tuple[Tuple[str, int], ...], single: bool) -> str:
    nonzero = [(c, k) for c, k in offsets if k]
    if not nonzero:
        return x
    if single:
        return f'{x}@{nonzero[0][1]}'
    return f'{x}@' + '.'.join(f'{c}^{k}' for c, k in nonzero)


def desugar_constant_updates(model: TbppModel) -> TbppModel:
    '''
    Replace updates ``x := k`` (k > 0) by resets.

    The last constant assigned to each clock is kept in the nonterminal (``Y@2`` for one such clock,
    ``Y@x^2.y^1`` for several) and guards are shifted by it. Only control refinements reachable from
    some original nonterminal are created.
    '''
    shifted = {t for r in model.rules for t, s in r.assign if isinstance(s, int) and s > 0}
    changed = True
    while changed:
        changed = False
        for r in model.rules:
            for t, s in r.assign:
                if isinstance(s, str) and s in shifted and t not in shifted:
                    shifted.add(t)
                    changed = True
    if not shifted:
        return model

    order = tuple(c for c in model.clocks if c in shifted)
    single = len(order) == 1
    zero = tuple((c, 0) for c in order)
    names: Dict[Tuple[str, tuple], str] = {}
    queue = deque()

    def state(x, offsets):
        key = (x, offsets)
        if key not in names:
            names[key] = _offset_name(x, offsets, single)
            queue.append(key)
        return names[key]

    for x in model.nonterminals:
        state(x, zero)

    rules = []
    while queue:
        x, offsets = queue.popleft()
        off = dict(offsets)
        for r in model.rules:
            if r.lhs != x:
                continue
            atoms, dead = [], False
            for a in r.guard.atoms:
                bound = a.bound - off.get(a.clock, 0)
                if bound >= 0:
                    atoms.append(Atom(a.clock, a.rel, bound))
                elif a.rel in ('<', '<=', '='):
                    dead = True
            if dead:
                continue
            new, assign = dict(off), []
            for t, s in r.assign:
                if isinstance(s, int):
                    if t in new:
                        new[t] = s
                    assign.append((t, 0))
                else:
                    if t in new:
                        new[t] = new.get(s, 0)
                    assign.append((t, s))
            offsets2 = tuple((c, new[c]) for c in order)
            rhs = tuple(sorted(state(y, offsets2) for y in r.rhs))
            rules.append(Rule(names[(x, offsets)], Guard(tuple(atoms)), tuple(assign), rhs))

    nts = tuple(dict.fromkeys(names.values()))
    logger.debug(f'Desugared constant updates ({len(model.nonterminals)} -> {len(nts)} nonterminals).')
    return TbppModel(model.clocks, nts, tuple(rules))


def reachable_nonterminals(model: TbppModel, start: str) -> set:
    '''Nonterminals occurring in some untimed derivation from ``start``.'''
    seen, stack = {start}, [start]
    while stack:
        x = stack.pop()
        for _, r in model.rules_of(x):
            for y in r.rhs:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    return seen
