'''
Ternary reachability of 1-clock timed automata

``(X, u) ->delta (Y, v)`` is compiled into existential linear arithmetic:

* :class:`IntervalSet` abstracts the clock value into points ``{k}`` and open intervals.
* :func:`build_tick_nfa` builds an NFA over ``(nonterminal, interval)`` states whose reset edges
  emit the interval the clock was reset in.
* :func:`parikh_formula` describes the Parikh images of paths of an NFA.
* :func:`path_formula` adds the timing: the reset values summed per interval give the elapsed
  time ``t = x' - x + sum(z)``.

'''
from collections import defaultdict, deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from .la import (
    FALSE, Formula, Term, Var, conj, decide, disj, eq, exists, ge, le, lt, term, total,
)
from .logging import logger
from .model import Atom, Guard, ModelError, Rule, TbppModel, require_one_clock
from .verdict import Verdict

State = Tuple[str, int]


class NfaError(ValueError):
    '''Raised for automata the tick construction does not support.'''


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Optional[Fraction]
    point: bool

    def contains(self, v) -> bool:
        if self.point:
            return v == self.lo
        return v > self.lo and (self.hi is None or v < self.hi)

    @property
    def sample(self) -> Fraction:
        '''A value inside the interval.'''
        if self.point:
            return self.lo
        if self.hi is None:
            return self.lo + 1
        return (self.lo + self.hi) / 2

    def __str__(self):
        if self.point:
            return f'{{{self.lo}}}'
        return f'({self.lo},{"inf" if self.hi is None else self.hi})'


class IntervalSet:
    '''
    IntervalSet

    ``{k0} < (k0,k1) < {k1} < ... < {kn} < (kn,inf)`` for the sorted endpoints ``0 = k0 < ... < kn``.
    The interval ``{ki}`` has index ``2i`` and ``(ki, ki+1)`` has index ``2i + 1``.
    '''

    def __init__(self, points: Iterable):
        self.points: Tuple[Fraction, ...] = tuple(sorted({Fraction(p) for p in points} | {Fraction(0)}))
        if self.points[0] < 0:
            raise ValueError(f'negative interval endpoint {self.points[0]}')
        self.intervals: Tuple[Interval, ...] = tuple(
            iv for i, k in enumerate(self.points)
            for iv in (Interval(k, k, True), Interval(k, self.points[i + 1] if i + 1 < len(self.points) else None, False))
        )

    def __len__(self):
        return len(self.intervals)

    def __getitem__(self, i) -> Interval:
        return self.intervals[i]

    def __iter__(self):
        return iter(self.intervals)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.points == other.points

    def __hash__(self):
        return hash(self.points)

    def index_of(self, v) -> int:
        v = Fraction(v)
        if v < 0:
            raise ValueError(f'negative clock value {v}')
        for i, iv in enumerate(self.intervals):
            if iv.contains(v):
                return i
        raise AssertionError(f'{v} not covered')

    def interval_of(self, v) -> Interval:
        return self.intervals[self.index_of(v)]

    def membership(self, x, i: int) -> Formula:
        '''``x`` lies in interval ``i``.'''
        iv = self.intervals[i]
        x = term(x)
        if iv.point:
            return eq(x, iv.lo)
        if iv.hi is None:
            return lt(iv.lo, x)
        return conj(lt(iv.lo, x), lt(x, iv.hi))

    def satisfies(self, guard: Guard, i: int) -> bool:
        '''Whether every value of interval ``i`` satisfies a 1-clock guard.'''
        v = self.intervals[i].sample
        return all(a.holds(v) for a in guard.atoms)

    def scaled(self, k) -> 'IntervalSet':
        return IntervalSet(p * k for p in self.points)

    def __str__(self):
        return ' < '.join(map(str, self.intervals))


def build_intervals(constants: Iterable) -> IntervalSet:
    return IntervalSet(constants)


@dataclass(frozen=True)
class Edge:
    '''
    Edge

    :param kind: ``eps`` (rule without reset), ``tick`` (rule resetting the clock) or ``tau`` (time).
    :param rule: the rule id, ``None`` for ``tau`` edges.
    :param interval: the interval emitted by a ``tick`` edge.
    :param label: a letter, for automata built directly with :meth:`Nfa.of`.
    '''
    index: int
    src: object
    dst: object
    kind: str
    rule: Optional[int] = None
    interval: Optional[int] = None
    label: Optional[str] = None


class Nfa:
    '''A finite automaton given by its edges.'''

    def __init__(self, states: Iterable, edges: Iterable[Edge]):
        self.states = tuple(states)
        self.edges = tuple(edges)

    @classmethod
    def of(cls, triples: Iterable[Tuple[object, str, object]]) -> 'Nfa':
        '''An NFA from ``(source, letter, target)`` triples.'''
        edges = [Edge(i, s, d, 'letter', label=a) for i, (s, a, d) in enumerate(triples)]
        states = dict.fromkeys(q for e in edges for q in (e.src, e.dst))
        return cls(states, edges)

    def trim(self, sources: Iterable, targets: Iterable) -> 'Nfa':
        '''Keep the edges on some path from ``sources`` to ``targets``.'''
        keep = useful_edges(self.edges, sources, targets)
        return self._rebuilt([e for e in self.edges if e.index in keep])

    def _rebuilt(self, edges):
        return Nfa(self.states, edges)

    def to_text(self) -> str:
        return '\n'.join(f'{e.src} -{e.label}-> {e.dst}' for e in self.edges) + '\n'


class TickNfa(Nfa):
    '''
    TickNfa

    States are ``(nonterminal, interval index)`` pairs over an :class:`IntervalSet`.
    '''

    def __init__(self, states: Iterable[State], edges: Iterable[Edge], intervals: IntervalSet):
        super().__init__(states, edges)
        self.intervals = intervals

    def _rebuilt(self, edges):
        return TickNfa(self.states, edges, self.intervals)

    def deduplicated(self, key: Optional[Callable[[Edge], Hashable]] = None) -> 'TickNfa':
        '''
        Keep one edge per ``(src, dst, kind, interval)`` and drop ``eps`` self-loops, which change
        neither the state nor the clock.

        :param key: extra component of the edge identity, for edges whose use carries a condition.
        '''
        seen, edges = set(), []
        for e in self.edges:
            if e.kind == 'eps' and e.src == e.dst:
                continue
            k = (e.src, e.dst, e.kind, e.interval, key(e) if key is not None else None)
            if k not in seen:
                seen.add(k)
                edges.append(e)
        if len(edges) < len(self.edges):
            logger.debug(f'Dropped {len(self.edges) - len(edges)} redundant tick NFA edges.')
        return self._rebuilt(edges)

    def state_name(self, q: State) -> str:
        return f'{q[0]}@{self.intervals[q[1]]}'

    def to_text(self) -> str:
        lines = []
        for e in self.edges:
            if e.kind == 'tau':
                label = 'tau'
            elif e.kind == 'tick':
                label = f'r{e.rule}/tick{self.intervals[e.interval]}'
            else:
                label = f'r{e.rule}/eps'
            lines.append(f'{self.state_name(e.src)} -{label}-> {self.state_name(e.dst)}')
        return '\n'.join(lines) + '\n'


def useful_edges(edges: Sequence[Edge], sources: Iterable, targets: Iterable) -> set:
    forward, backward = defaultdict(list), defaultdict(list)
    for e in edges:
        forward[e.src].append(e)
        backward[e.dst].append(e)

    def closure(start, adjacency, end):
        seen = set(start)
        queue = deque(seen)
        while queue:
            q = queue.popleft()
            for e in adjacency[q]:
                n = getattr(e, end)
                if n not in seen:
                    seen.add(n)
                    queue.append(n)
        return seen

    reach = closure(sources, forward, 'dst')
    coreach = closure(targets, backward, 'src')
    return {e.index for e in edges if e.src in reach and e.dst in coreach}


def ta_rules(ta: TbppModel) -> List[Tuple[int, Rule, bool]]:
    '''``(rule id, rule, resets)`` for the unary rules of a 1-clock TA with reset-or-keep updates.'''
    x = require_one_clock(ta)
    out = []
    for i, r in enumerate(ta.rules):
        if r.is_branching:
            raise NfaError(f'rule {i} is branching; project the model to a timed automaton first')
        if r.is_vanishing:
            continue
        resets = False
        for t, s in r.assign:
            if s == 0 and isinstance(s, int):
                resets = True
            elif s != x:
                raise NfaError(f'rule {i}: update {t} := {s} is neither a reset nor a keep')
        out.append((i, r, resets))
    return out


def build_tick_nfa(ta: TbppModel, intervals: IntervalSet) -> TickNfa:
    '''
    The tick NFA of a 1-clock timed automaton.

    For each rule ``X -[g]-> Y`` and interval ``l`` satisfying ``g``: an ``eps`` edge
    ``(X,l) -> (Y,l)``, or a ``tick`` edge ``(X,l) -> (Y,{0})`` emitting ``l`` if the rule resets
    the clock. ``tau`` edges lead from each interval to the next one.
    '''
    missing = {Fraction(k) for k in ta.constants()} - set(intervals.points)
    if missing:
        raise NfaError(f'guard constants {sorted(missing)} are not interval endpoints')
    edges: List[Edge] = []
    for i, r, resets in ta_rules(ta):
        for lam in range(len(intervals)):
            if not intervals.satisfies(r.guard, lam):
                continue
            if resets:
                edges.append(Edge(len(edges), (r.lhs, lam), (r.rhs[0], 0), 'tick', i, lam))
            else:
                edges.append(Edge(len(edges), (r.lhs, lam), (r.rhs[0], lam), 'eps', i))
    for x in ta.nonterminals:
        for lam in range(len(intervals) - 1):
            edges.append(Edge(len(edges), (x, lam), (x, lam + 1), 'tau'))
    states = [(x, lam) for x in ta.nonterminals for lam in range(len(intervals))]
    for e in edges:
        assert e.kind != 'tick' or e.dst[1] == 0
        assert e.kind != 'tau' or (e.src[0] == e.dst[0] and e.src[1] < e.dst[1])
    logger.debug(f'Tick NFA with {len(states)} states and {len(edges)} edges.')
    return TickNfa(states, edges, intervals)


def _flow(
        edges: Sequence[Tuple[object, object]],
        sources: Sequence,
        targets: Sequence,
        prefix: str,
        names: Optional[Sequence[int]] = None,
) -> Tuple[Formula, List[Var], List[Var], List[Var], List[Var]]:
    '''
    Paths from one of ``sources`` to one of ``targets`` through ``edges`` (``(src, dst)`` pairs).
    Edge variables are numbered by ``names`` (default: position).

    Connectivity takes one disjunction per state with outgoing edges: the state carries no flow
    out, or it is the selected source, or some used incoming edge comes from a state of smaller
    depth.

    :return: formula, edge counters ``z``, state depths ``d``, source selectors and target selectors.
    '''
    names = list(names) if names is not None else list(range(len(edges)))
    states = list(dict.fromkeys([q for a, b in edges for q in (a, b)] + list(sources) + list(targets)))
    number = {q: j for j, q in enumerate(states)}
    z = [Var(f'{prefix}z{i}', True) for i in names]
    d = [Var(f'{prefix}d{j}', True) for j in range(len(states))]
    s = [Var(f'{prefix}s{j}', True) for j in range(len(sources))]
    e = [Var(f'{prefix}e{j}', True) for j in range(len(targets))]
    parts: List[Formula] = [eq(total(s), 1), eq(total(e), 1)]
    parts += [conj(ge(v, 0), le(v, 1)) for v in s + e]
    parts += [ge(v, 0) for v in z]
    parts += [conj(ge(v, 0), le(v, len(states))) for v in d]
    balance: Dict[object, List[Term]] = defaultdict(list)
    outgoing: Dict[object, List[int]] = defaultdict(list)
    incoming: Dict[object, List[int]] = defaultdict(list)
    for i, (a, b) in enumerate(edges):
        balance[a].append(z[i])
        balance[b].append(-z[i])
        outgoing[a].append(i)
        if a != b:
            incoming[b].append(i)
    for j, q in enumerate(sources):
        balance[q].append(-s[j])
    for j, q in enumerate(targets):
        balance[q].append(e[j])
    for q, ts in balance.items():
        parts.append(eq(total(ts), 0))
    for q, out in outgoing.items():
        reasons = [eq(s[j], 1) for j, p in enumerate(sources) if p == q]
        reasons += [conj(ge(z[k], 1), lt(d[number[edges[k][0]]], d[number[q]])) for k in incoming[q]]
        parts.append(disj(eq(total([z[i] for i in out]), 0), *reasons))
    return conj(*parts), z, d, s, e


def parikh_formula(nfa: Nfa, c, d, prefix: str = '') -> Formula:
    '''
    Parikh images of the words from ``c`` to ``d``.

    The edge counters are the integer variables ``{prefix}z{i}`` for edge index ``i``; flow
    conservation and the state depths ``{prefix}d{j}`` for connectivity are existentially bound
    together with the selectors. For ``c = d`` the zero vector is admitted.
    '''
    f, _, depth, s, e = _flow([(x.src, x.dst) for x in nfa.edges], [c], [d], prefix, [x.index for x in nfa.edges])
    return exists(depth + s + e, f)


def path_formula(
        nfa: TickNfa,
        sources: Sequence[State],
        targets: Sequence[State],
        x,
        t,
        x2,
        prefix: str = '',
        enable: Optional[Callable[[Edge], Optional[Formula]]] = None,
        tally=None,
) -> Formula:
    '''
    Runs of the timed automaton from a state of ``sources`` with clock ``x`` to a state of ``targets``
    with clock ``x2`` taking time ``t``.

    The interval endpoints must be integers. Per interval ``l = (a, b)`` the reset values sum to
    ``z_l`` with ``a*y_l < z_l < b*y_l`` for ``y_l`` resets (``z_l = a*y_l`` for a point). Until the
    first reset the automaton runs in a copy of the states, so the first reset can be required to
    happen no earlier than ``x``: ``f_l = 0 | (y_l = 1 & x <= z_l) | (y_l >= 2 & x + a(y_l - 1) < z_l)``
    where ``f_l`` counts first resets in ``l``.

    :param enable: maps an edge to a condition under which it may be used (``None`` for always).
    :param tally: integer variable set to the number of uses of the edges with a condition.
    '''
    iv = nfa.intervals
    if any(p.denominator != 1 for p in iv.points):
        raise NfaError('path formulas need integer interval endpoints; scale the model first')
    x, t, x2 = term(x), term(t), term(x2)

    phased: List[Tuple[Tuple, Tuple, Edge, bool]] = []
    for e in nfa.edges:
        if e.kind == 'tick':
            phased.append(((e.src, 0), (e.dst, 1), e, True))
        else:
            phased.append(((e.src, 0), (e.dst, 0), e, False))
        phased.append(((e.src, 1), (e.dst, 1), e, False))
    starts = [(q, 0) for q in sources]
    ends = [(q, p) for q in targets for p in (0, 1)]
    pseudo = [Edge(i, a, b, 'phase') for i, (a, b, _, _) in enumerate(phased)]
    keep = useful_edges(pseudo, starts, ends)
    phased = [p for i, p in enumerate(phased) if i in keep]
    reachable = {b for a, b, _, _ in phased} | set(starts)
    if not any(q in reachable for q in ends):
        return FALSE

    flow, z, depth, s, sel = _flow([(a, b) for a, b, _, _ in phased], starts, ends, prefix)
    parts = [flow]
    parts += [disj(eq(s[j], 0), iv.membership(x, q[1])) for j, (q, _) in enumerate(starts)]
    parts += [disj(eq(sel[j], 0), iv.membership(x2, q[1])) for j, (q, _) in enumerate(ends)]

    ticks: Dict[int, List[Var]] = defaultdict(list)
    firsts: Dict[int, List[Var]] = defaultdict(list)
    conditional: List[Var] = []
    for i, (_, _, e, first) in enumerate(phased):
        if e.kind == 'tick':
            ticks[e.interval].append(z[i])
            if first:
                firsts[e.interval].append(z[i])
        if enable is not None:
            cond = enable(e)
            if cond is not None:
                parts.append(disj(cond, eq(z[i], 0)))
                conditional.append(z[i])

    extra: List[Var] = []
    sums: List[Term] = []
    for lam in sorted(ticks):
        y = Var(f'{prefix}y{lam}', True)
        r = Var(f'{prefix}r{lam}')
        extra += [y, r]
        sums.append(r)
        a, b = int(iv[lam].lo), iv[lam].hi
        parts.append(eq(y, total(ticks[lam])))
        if iv[lam].point:
            parts.append(eq(r, a * y))
            continue
        inside = [lt(a * y, r)] + ([lt(r, int(b) * y)] if b is not None else [])
        parts.append(disj(conj(eq(y, 0), eq(r, 0)), conj(ge(y, 1), *inside)))
        if firsts.get(lam):
            f = total(firsts[lam])
            parts.append(disj(
                eq(f, 0),
                conj(eq(y, 1), le(x, r)),
                conj(ge(y, 2), lt(x + a * y - a, r)),
            ))
    parts.append(eq(t, x2 - x + total(sums)))
    parts.append(ge(t, 0))
    if tally is not None:
        parts.append(eq(term(tally), total(conditional)))
    return exists(z + depth + s + sel + extra, conj(*parts))


def psi_cd(nfa: TickNfa, c: State, d: State, x='x', t='t', x2="x'", prefix: str = '') -> Formula:
    '''Runs from state ``c`` to state ``d``; includes the membership of ``x`` and ``x2`` in their intervals.'''
    return path_formula(nfa, [c], [d], x, t, x2, prefix)


def phi_xy(nfa: TickNfa, X: str, Y: str, x='x', t='t', x2="x'", prefix: str = '', merged: bool = True) -> Formula:
    '''
    ``(X, x) ->t (Y, x2)``.

    :param merged: one path formula with selectors over all start and end intervals instead of the
        disjunction over interval pairs.
    '''
    n = len(nfa.intervals)
    if merged:
        return path_formula(nfa, [(X, i) for i in range(n)], [(Y, j) for j in range(n)], x, t, x2, prefix)
    return disj(*(
        conj(nfa.intervals.membership(x, i), nfa.intervals.membership(x2, j),
             psi_cd(nfa, (X, i), (Y, j), x, t, x2, f'{prefix}{i}.{j}.'))
        for i in range(n) for j in range(n)
    ))


def scale_model(model: TbppModel, k: int) -> TbppModel:
    '''Multiply every guard and update constant by ``k``.'''
    if k == 1:
        return model
    rules = [
        Rule(
            r.lhs,
            Guard(tuple(Atom(a.clock, a.rel, a.bound * k) for a in r.guard.atoms)),
            tuple((c, s * k if isinstance(s, int) else s) for c, s in r.assign),
            r.rhs,
        )
        for r in model.rules
    ]
    return model.replace_rules(rules)


def decide_ternary(ta: TbppModel, X: str, Y: str, u, v, delta, merged: bool = True) -> Verdict:
    '''
    Does ``(X, u)`` reach ``(Y, v)`` in exactly ``delta`` time units?

    The model is scaled by the common denominator of ``u``, ``v`` and ``delta`` so that all
    interval endpoints are integers.
    '''
    u, v, delta = Fraction(u), Fraction(v), Fraction(delta)
    if min(u, v, delta) < 0:
        raise ValueError(f'negative ternary parameters ({u=}, {v=}, {delta=})')
    for nt in (X, Y):
        if nt not in ta.nonterminals:
            raise ModelError(f'undeclared nonterminal {nt}')
    k = lcm(u.denominator, v.denominator, delta.denominator)
    logger.info(f'Deciding ternary reachability ({X=}, {Y=}, {u=}, {v=}, {delta=}).')
    scaled = scale_model(ta, k)
    nfa = build_tick_nfa(scaled, build_intervals(scaled.constants())).deduplicated()
    f = phi_xy(nfa, X, Y, u * k, delta * k, v * k, merged=merged)
    verdict = decide(f)
    verdict.statistics.update(scale=k, edges=len(nfa.edges))
    return verdict
