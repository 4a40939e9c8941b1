'''
Vanishing predicates of 1-clock TBPP

``VAN_X(x, t)`` holds if the process ``(X, x)`` can rewrite to the empty configuration within time
``t``. It is computed as the outcome of a priced game in which Min picks rules, Max picks the branch
to follow after a branching rule and time costs 1 per time unit in every nonterminal.

Formulas over ``(x, y)`` are kept as :class:`PiecewiseBasic` lower envelopes: on each cell of a
partition of ``x >= 0`` into points and open intervals the formula reads ``c + d*x <= y`` (or ``<``)
with ``d`` in ``{0, -1}``, or is false. All formulas range over ``x >= 0, y >= 0``.
'''
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import config
from .la import Const, Formula, conj, disj, eq, ge, le, lt, term
from .logging import logger
from .model import Guard, ModelError, TbppModel, require_one_clock

INF = None


class GameError(ValueError):
    '''Raised for games outside the supported class or fixpoints that do not stabilize.'''


@dataclass(frozen=True)
class BasicFormula:
    '''
    BasicFormula

    ``(lo <1 x <2 hi) & (c + d*x <3 y)`` where ``<i`` is strict when the matching flag is set.

    :param hi: upper end of the domain, ``None`` for infinity.
    :param d: slope, ``0`` or ``-1``.
    '''
    lo: Fraction
    hi: Optional[Fraction]
    lo_strict: bool
    hi_strict: bool
    c: Fraction
    d: int = 0
    y_strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'lo', Fraction(self.lo))
        object.__setattr__(self, 'c', Fraction(self.c))
        if self.hi is not None:
            object.__setattr__(self, 'hi', Fraction(self.hi))
        if self.d not in (0, -1):
            raise GameError(f'slope {self.d} is not 0 or -1')

    @property
    def is_point(self):
        return self.hi is not None and self.lo == self.hi

    @property
    def is_empty(self):
        if self.hi is None:
            return False
        return self.hi < self.lo or (self.hi == self.lo and (self.lo_strict or self.hi_strict))

    def in_domain(self, x) -> bool:
        if x < self.lo or (self.lo_strict and x == self.lo):
            return False
        if self.hi is None:
            return True
        return x < self.hi or (not self.hi_strict and x == self.hi)

    def threshold(self, x) -> Fraction:
        return self.c + self.d * Fraction(x)

    def holds(self, x, y) -> bool:
        if not self.in_domain(x):
            return False
        v = self.threshold(x)
        return y > v if self.y_strict else y >= v

    def to_dict(self):
        return {
            'lo': str(self.lo), 'hi': None if self.hi is None else str(self.hi),
            'lo_strict': self.lo_strict, 'hi_strict': self.hi_strict,
            'c': str(self.c), 'd': self.d, 'y_strict': self.y_strict,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(Fraction(d['lo']), None if d['hi'] is None else Fraction(d['hi']), d['lo_strict'],
                   d['hi_strict'], Fraction(d['c']), d['d'], d['y_strict'])

    def __str__(self):
        left = '(' if self.lo_strict else '['
        right = 'inf)' if self.hi is None else (f'{self.hi})' if self.hi_strict else f'{self.hi}]')
        line = f'{self.c}' + (' - x' if self.d else '')
        return f'x in {left}{self.lo}, {right} & {line} {"<" if self.y_strict else "<="} y'


def point(p, v, strict) -> BasicFormula:
    return BasicFormula(p, p, False, False, v, 0, strict)


def open_cell(lo, hi, c, d, strict) -> BasicFormula:
    return BasicFormula(lo, hi, True, True, c, d, strict)


Key = Optional[Tuple[Fraction, bool]]


def better(a: Key, b: Key) -> Key:
    '''The weaker requirement of two ``(threshold, strict)`` pairs; ``None`` is false.'''
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def worse(a: Key, b: Key) -> Key:
    if a is None or b is None:
        return None
    return max(a, b)


def _cells(breaks: Sequence[Fraction], upto: Optional[Fraction] = None):
    '''Points and open intervals of the partition of ``[0, upto]`` by ``breaks``.'''
    for i, p in enumerate(breaks):
        yield p, p
        if p == upto:
            return
        yield p, breaks[i + 1] if i + 1 < len(breaks) else None


class PiecewiseBasic:
    '''
    PiecewiseBasic

    A disjunction of basic formulas kept as a canonical lower envelope: cells are points and open
    intervals, sorted, with adjacent cells merged where the envelope does not change. Equal formulas
    have equal pieces.
    '''

    def __init__(self, pieces: Iterable[BasicFormula] = ()):
        cells = []
        for b in pieces:
            cells.extend(_split_basic(b))
        env = _canonical([])
        for c in cells:
            env = _combine(env, _canonical([c]), better)
        self.pieces: Tuple[BasicFormula, ...] = tuple(env)

    @classmethod
    def _of_cells(cls, cells) -> 'PiecewiseBasic':
        out = cls.__new__(cls)
        out.pieces = tuple(_canonical(cells))
        return out

    @classmethod
    def true(cls) -> 'PiecewiseBasic':
        return cls._of_cells([point(0, 0, False), open_cell(0, None, 0, 0, False)])

    @classmethod
    def false(cls) -> 'PiecewiseBasic':
        return cls._of_cells([])

    @classmethod
    def constant(cls, key: Key, lo=0, lo_strict=False, hi=None, hi_strict=True) -> 'PiecewiseBasic':
        '''The threshold ``key`` over a domain.'''
        if key is None:
            return cls.false()
        return cls._of_cells(_split_basic(BasicFormula(lo, hi, lo_strict, hi_strict, key[0], 0, key[1])))

    def __eq__(self, other):
        return isinstance(other, PiecewiseBasic) and self.pieces == other.pieces

    def __hash__(self):
        return hash(self.pieces)

    def __repr__(self):
        return f'PiecewiseBasic({list(self.pieces)!r})'

    def __str__(self):
        return ' | '.join(map(str, self.basics())) or 'false'

    @property
    def is_false(self):
        return not self.pieces

    def endpoints(self) -> set:
        out = set()
        for p in self.pieces:
            out.add(p.lo)
            if p.hi is not None:
                out.add(p.hi)
        return out

    def piece_at(self, x) -> Optional[BasicFormula]:
        x = Fraction(x)
        for p in self.pieces:
            if p.in_domain(x):
                return p
        return None

    def at(self, x) -> Key:
        '''``(threshold, strict)`` at ``x``, ``None`` where the formula is false for every ``y``.'''
        p = self.piece_at(x)
        return None if p is None else (p.threshold(x), p.y_strict)

    def holds(self, x, y) -> bool:
        k = self.at(x)
        if k is None:
            return False
        return y > k[0] if k[1] else y >= k[0]

    def line_on(self, lo, hi) -> Optional[BasicFormula]:
        '''The piece covering the cell ``[lo, hi]`` (a point if ``lo == hi``, else open).'''
        if lo == hi:
            return self.piece_at(lo)
        for p in self.pieces:
            if p.is_point:
                continue
            if p.lo <= lo and (p.hi is None or (hi is not None and hi <= p.hi)):
                return p
        return None

    def __or__(self, other):
        return PiecewiseBasic._of_cells(_combine(self.pieces, other.pieces, better))

    def __and__(self, other):
        return PiecewiseBasic._of_cells(_combine(self.pieces, other.pieces, worse))

    def restrict(self, lo, lo_strict, hi, hi_strict) -> 'PiecewiseBasic':
        '''Conjunction with ``lo <1 x <2 hi``.'''
        dom = BasicFormula(lo, hi, lo_strict, hi_strict, 0)
        if dom.is_empty:
            return PiecewiseBasic.false()
        breaks = sorted(self.endpoints() | {Fraction(0), Fraction(lo)} | ({Fraction(hi)} if hi is not None else set()))
        cells = []
        for a, b in _cells(breaks):
            sample = a if a == b else _sample(a, b)
            if not dom.in_domain(sample):
                continue
            p = self.line_on(a, b)
            if p is not None:
                cells.append(point(a, p.threshold(a), p.y_strict) if a == b else open_cell(a, b, p.c, p.d, p.y_strict))
        return PiecewiseBasic._of_cells(cells)

    def restrict_open(self, a, b) -> 'PiecewiseBasic':
        return self.restrict(a, True, b, True)

    def shift(self, cost: int, upto: Optional[Fraction] = None) -> 'PiecewiseBasic':
        '''
        ``exists t >= 0. f(x + t, y - cost*t)`` with ``x + t <= upto``.

        Computed as a suffix infimum of ``h(x') = threshold(x') + cost*x'`` from right to left. An
        infimum that is only approached (at an open end or a strict piece) gives a strict bound.
        '''
        if cost not in (0, 1):
            raise GameError(f'cost rate {cost} is not 0 or 1')
        breaks = sorted(self.endpoints() | {Fraction(0)} | ({Fraction(upto)} if upto is not None else set()))
        cells = list(_cells(breaks, upto))
        best: Key = None
        out: List[BasicFormula] = []
        for a, b in reversed(cells):
            p = self.line_on(a, b)
            if a == b:
                cand = None if p is None else (p.threshold(a) + cost * a, p.y_strict)
                r = better(cand, best)
                if r is not None:
                    out.append(point(a, r[0] - cost * a, r[1]))
                best = better(best, cand)
                continue
            if p is None:
                if best is not None:
                    out.append(open_cell(a, b, best[0], -cost, best[1]))
                continue
            slope = p.d + cost
            if slope > 0:
                if best is None:
                    out.append(open_cell(a, b, p.c, p.d, p.y_strict))
                else:
                    e = best[0] - p.c
                    if e <= a:
                        out.append(open_cell(a, b, best[0], -cost, best[1]))
                    elif b is not None and e >= b:
                        out.append(open_cell(a, b, p.c, p.d, p.y_strict))
                    else:
                        out.append(open_cell(a, e, p.c, p.d, p.y_strict))
                        out.append(point(e, best[0] - cost * e, min(best[1], p.y_strict)))
                        out.append(open_cell(e, b, best[0], -cost, best[1]))
                best = better(best, (p.c + a, True))
            elif slope == 0:
                cand = (p.c, p.y_strict)
                r = better(cand, best)
                out.append(open_cell(a, b, r[0], -cost, r[1]))
                best = better(best, cand)
            else:
                if b is None:
                    raise GameError('decreasing threshold on an unbounded interval')
                cand = (p.c - b, True)
                r = better(cand, best)
                out.append(open_cell(a, b, r[0], -cost, r[1]))
                best = better(best, cand)
        return PiecewiseBasic._of_cells(out)

    def basics(self) -> List[BasicFormula]:
        '''Fewest basic formulas with closed ends where possible, left to right.'''
        out: List[BasicFormula] = []
        for p in self.pieces:
            if out:
                q = out[-1]
                touching = q.hi is not None and q.hi == p.lo and (q.hi_strict != p.lo_strict or p.is_point)
                if touching and p.is_point and q.hi_strict and q.threshold(p.lo) == p.c and q.y_strict == p.y_strict:
                    out[-1] = BasicFormula(q.lo, q.hi, q.lo_strict, False, q.c, q.d, q.y_strict)
                    continue
                if touching and q.is_point and not p.is_point and p.threshold(q.lo) == q.c and q.y_strict == p.y_strict \
                        and not q.hi_strict:
                    out[-1] = BasicFormula(q.lo, p.hi, False, p.hi_strict, p.c, p.d, p.y_strict)
                    continue
            out.append(p)
        return out

    def to_dict(self):
        return [b.to_dict() for b in self.basics()]

    @classmethod
    def from_dict(cls, records):
        return cls(BasicFormula.from_dict(r) for r in records)


def _sample(a, b) -> Fraction:
    return a + 1 if b is None else (a + b) / 2


def _split_basic(b: BasicFormula) -> List[BasicFormula]:
    '''Cells of a basic formula over ``x >= 0``.'''
    lo, lo_strict = b.lo, b.lo_strict
    if lo < 0:
        lo, lo_strict = Fraction(0), False
    clipped = BasicFormula(lo, b.hi, lo_strict, b.hi_strict, b.c, b.d, b.y_strict)
    if clipped.is_empty:
        return []
    if clipped.is_point:
        return [point(lo, clipped.threshold(lo), b.y_strict)]
    out = []
    if not lo_strict:
        out.append(point(lo, clipped.threshold(lo), b.y_strict))
    out.append(open_cell(lo, b.hi, b.c, b.d, b.y_strict))
    if b.hi is not None and not b.hi_strict:
        out.append(point(b.hi, clipped.threshold(b.hi), b.y_strict))
    return out


def _canonical(cells: Iterable[BasicFormula]) -> List[BasicFormula]:
    '''Sort cells and merge ``(l,p) {p} (p,r)`` triples on one line.'''
    cells = sorted(cells, key=lambda c: (c.lo, not c.is_point))
    cells = [point(c.lo, c.threshold(c.lo), c.y_strict) if c.is_point else c for c in cells]
    out: List[BasicFormula] = []
    for c in cells:
        out.append(c)
        while len(out) >= 3:
            a, p, b = out[-3], out[-2], out[-1]
            if (not a.is_point and p.is_point and not b.is_point and a.hi == p.lo == b.lo
                    and (a.c, a.d, a.y_strict) == (b.c, b.d, b.y_strict)
                    and a.threshold(p.lo) == p.c and a.y_strict == p.y_strict):
                out[-3:] = [open_cell(a.lo, b.hi, a.c, a.d, a.y_strict)]
            else:
                break
    return out


def _wrap(cells: Sequence[BasicFormula]) -> PiecewiseBasic:
    out = PiecewiseBasic.__new__(PiecewiseBasic)
    out.pieces = tuple(cells)
    return out


def _combine(f: Sequence[BasicFormula], g: Sequence[BasicFormula], pick) -> List[BasicFormula]:
    '''Pointwise ``pick`` of two canonical envelopes, splitting open cells where lines cross.'''
    ef, eg = _wrap(f), _wrap(g)
    breaks = sorted(ef.endpoints() | eg.endpoints() | {Fraction(0)})
    out: List[BasicFormula] = []
    for a, b in _cells(breaks):
        p, q = ef.line_on(a, b), eg.line_on(a, b)
        if a == b:
            kp = None if p is None else (p.threshold(a), p.y_strict)
            kq = None if q is None else (q.threshold(a), q.y_strict)
            r = pick(kp, kq)
            if r is not None:
                out.append(point(a, r[0], r[1]))
            continue
        if p is None or q is None:
            src = p if p is not None else q
            if src is not None and pick is better:
                out.append(open_cell(a, b, src.c, src.d, src.y_strict))
            continue
        pieces = [(a, b)]
        if p.d != q.d:
            e = (q.c - p.c) / (p.d - q.d)
            if a < e and (b is None or e < b):
                pieces = [(a, e), (e, e), (e, b)]
        for lo, hi in pieces:
            x = lo if lo == hi else _sample(lo, hi)
            r = pick((p.threshold(x), p.y_strict), (q.threshold(x), q.y_strict))
            if lo == hi:
                out.append(point(lo, r[0], r[1]))
                continue
            if p.threshold(x) == q.threshold(x) and (p.c, p.d) == (q.c, q.d):
                out.append(open_cell(lo, hi, p.c, p.d, r[1]))
            elif r == (p.threshold(x), p.y_strict):
                out.append(open_cell(lo, hi, p.c, p.d, p.y_strict))
            else:
                out.append(open_cell(lo, hi, q.c, q.d, q.y_strict))
    return _canonical(out)


def union(*fs: PiecewiseBasic) -> PiecewiseBasic:
    out = PiecewiseBasic.false()
    for f in fs:
        out = out | f
    return out


def intersection(*fs: PiecewiseBasic) -> PiecewiseBasic:
    if not fs:
        return PiecewiseBasic.false()
    out = fs[0]
    for f in fs[1:]:
        out = out & f
    return out


def _as_envelope(phi) -> PiecewiseBasic:
    if isinstance(phi, PiecewiseBasic):
        return phi
    if phi is True:
        return PiecewiseBasic.true()
    if phi is False or phi is None:
        return PiecewiseBasic.false()
    return PiecewiseBasic([phi])


def shift_diag(phi) -> PiecewiseBasic:
    '''``exists t >= 0. phi(x + t, y - t)``; a flat segment with an open left end gives two pieces.'''
    return _as_envelope(phi).shift(1)


def shift_flat(phi) -> PiecewiseBasic:
    '''``exists t >= 0. phi(x + t, y)``.'''
    return _as_envelope(phi).shift(0)


def simplify_family(family: Sequence[BasicFormula]) -> List[BasicFormula]:
    '''
    Split the segments of ``family`` at their pairwise crossing points, ``(lo, e)`` and ``[e, hi)``,
    so that no two results cross. Formulas without crossings are kept.
    '''
    crossings = set()
    for i, f in enumerate(family):
        for g in family[i + 1:]:
            if f.d == g.d:
                continue
            e = (g.c - f.c) / (f.d - g.d)
            if f.in_domain(e) and g.in_domain(e):
                crossings.add(e)
    out = []
    for f in family:
        cuts = sorted(e for e in crossings if f.lo < e and (f.hi is None or e < f.hi))
        lo, lo_strict = f.lo, f.lo_strict
        for e in cuts:
            out.append(BasicFormula(lo, e, lo_strict, True, f.c, f.d, f.y_strict))
            lo, lo_strict = e, False
        out.append(BasicFormula(lo, f.hi, lo_strict, f.hi_strict, f.c, f.d, f.y_strict))
    return sorted(out, key=lambda b: (b.lo, b.lo_strict, b.d, b.c))


# games

@dataclass(frozen=True)
class GameEdge:
    src: str
    dst: str
    guard: Guard = Guard()
    reset: bool = False
    rule: Optional[int] = None


@dataclass
class PGame:
    '''
    PGame

    :param owner: ``min`` or ``max`` per state; only Min may let time pass.
    :param cost: cost rate, 0 or 1, per state.
    :param payoff: where Min may stop the play, as formulas over ``(x, y)``.
    '''
    clock: str
    states: Tuple[str, ...]
    owner: Dict[str, str]
    cost: Dict[str, int]
    edges: Tuple[GameEdge, ...]
    payoff: Dict[str, PiecewiseBasic] = field(default_factory=dict)

    def successors(self, state) -> List[GameEdge]:
        return [e for e in self.edges if e.src == state]

    def constants(self) -> set:
        out = {Fraction(0)}
        for e in self.edges:
            out |= {Fraction(a.bound) for a in e.guard.atoms}
        for f in self.payoff.values():
            out |= f.endpoints()
        return out

    def to_dict(self):
        return {
            'clock': self.clock,
            'states': [{'name': s, 'owner': self.owner[s], 'cost': self.cost[s],
                        'payoff': self.payoff.get(s, PiecewiseBasic.false()).to_dict()} for s in self.states],
            'edges': [{'src': e.src, 'dst': e.dst, 'guard': str(e.guard), 'reset': e.reset, 'rule': e.rule}
                      for e in self.edges],
        }


def _guard_region(guard: Guard, clock: str):
    lo, lo_strict, hi, hi_strict = guard.bounds(clock)
    return Fraction(lo), lo_strict, None if hi is None else Fraction(hi), hi_strict


def _enabled(guard: Guard, x) -> bool:
    return all(a.holds(x) for a in guard.atoms)


def bracket_name(rule) -> str:
    guard = '&'.join(f'{a.clock}{a.rel}{a.bound}' for a in rule.guard.atoms) or 'true'
    update = ';' + ','.join(f'{t}:={s}' for t, s in rule.assign) if rule.assign else ''
    return f'[{",".join(rule.rhs)},{guard}{update}]'


def tbpp_to_pgame(model: TbppModel) -> PGame:
    '''
    The vanishing game of a 1-clock model.

    Nonterminals are Min states with cost 1 whose payoff is the disjunction of the guards of their
    vanishing rules (with ``y >= 0``). A branching rule ``X -[g; R]-> Y Z`` becomes a Min edge to the
    Max state ``[Y,Z,g]`` (cost 0), which moves on to ``Y`` or ``Z`` applying ``R``.
    '''
    try:
        x = require_one_clock(model)
    except ModelError as e:
        raise GameError(str(e)) from e
    for i, r in enumerate(model.rules):
        for t, s in r.assign:
            if not (s == 0 and isinstance(s, int)) and s != x:
                raise GameError(f'rule {i}: update {t} := {s} must be desugared first')
    states = list(model.nonterminals)
    owner = {s: 'min' for s in states}
    cost = {s: 1 for s in states}
    payoff = {s: PiecewiseBasic.false() for s in states}
    edges: List[GameEdge] = []
    for i, r in enumerate(model.rules):
        if r.guard.is_false():
            continue
        if r.is_vanishing:
            lo, lo_strict, hi, hi_strict = _guard_region(r.guard, x)
            payoff[r.lhs] = payoff[r.lhs] | PiecewiseBasic([BasicFormula(lo, hi, lo_strict, hi_strict, 0)])
        elif r.is_unary:
            edges.append(GameEdge(r.lhs, r.rhs[0], r.guard, bool(r.resets), i))
        else:
            b = bracket_name(r)
            if b not in owner:
                states.append(b)
                owner[b], cost[b] = 'max', 0
                payoff[b] = PiecewiseBasic.false()
                for y in dict.fromkeys(r.rhs):
                    edges.append(GameEdge(b, y, Guard(), bool(r.resets), i))
            edges.append(GameEdge(r.lhs, b, r.guard, False, i))
    return PGame(x, tuple(states), owner, cost, tuple(dict.fromkeys(edges)), payoff)


def round_cap(game: PGame) -> int:
    return 4 * len(game.states) ** 3 + config.settings.fixpoint_margin


def solve_ab_game(game: PGame, a, b, boundary: Optional[Dict[str, PiecewiseBasic]] = None) -> Dict[str, PiecewiseBasic]:
    '''
    Outcomes on the open interval ``(a, b)`` of a game without resets whose guards are constant there.

    :param boundary: outcome of each state at the point ``b``, collected by delaying up to ``b``.
    :return: outcome formulas restricted to ``(a, b)``.
    '''
    a = Fraction(a)
    b = None if b is None else Fraction(b)
    sample = _sample(a, b)
    edges = [e for e in game.edges if _enabled(e.guard, sample)]
    if any(e.reset for e in edges):
        raise GameError('resetting rules must be layered before solving an interval game')
    boundary = boundary or {}
    g = {}
    for s in game.states:
        if game.owner[s] == 'min':
            f = game.payoff.get(s, PiecewiseBasic.false()).restrict_open(a, b)
            if b is not None and s in boundary:
                f = f | boundary[s].restrict(b, False, b, False)
            g[s] = f
        else:
            g[s] = PiecewiseBasic.false()
    cap = round_cap(game)
    for rounds in range(1, cap + 1):
        new = {}
        for s in game.states:
            if game.owner[s] != 'min':
                continue
            parts = [g[s], g[s].shift(game.cost[s], b).restrict_open(a, b)]
            parts += [g[e.dst].restrict_open(a, b) for e in edges if e.src == s]
            new[s] = union(*parts)
        for s in game.states:
            if game.owner[s] == 'min':
                continue
            succ = [(new if game.owner[e.dst] == 'min' else g)[e.dst].restrict_open(a, b) for e in edges if e.src == s]
            new[s] = intersection(*succ)
        if new == g:
            logger.debug(f'Interval game ({a}, {b}) stable after {rounds} rounds.')
            return {s: f.restrict_open(a, b) for s, f in g.items()}
        g = new
    raise GameError(f'interval game ({a}, {b}) did not stabilize within {cap} rounds')


def _solve_point(game: PGame, p: Fraction, right: Dict[str, PiecewiseBasic], nxt) -> Dict[str, Key]:
    '''Untimed game at the point ``p``; Min may also delay into the open interval ``(p, nxt)``.'''
    edges = [e for e in game.edges if _enabled(e.guard, p)]
    if any(e.reset for e in edges):
        raise GameError('resetting rules must be layered before solving a point game')
    base: Dict[str, Key] = {}
    for s in game.states:
        if game.owner[s] != 'min':
            continue
        delay = right[s].restrict_open(p, nxt).shift(game.cost[s]).at(p)
        base[s] = better(game.payoff.get(s, PiecewiseBasic.false()).at(p), delay)
    values: Dict[str, Key] = {s: base.get(s) for s in game.states}
    cap = round_cap(game)
    for _ in range(cap):
        new = {}
        for s in game.states:
            succ = [values[e.dst] for e in edges if e.src == s]
            if game.owner[s] == 'min':
                v = base[s]
                for k in succ:
                    v = better(v, k)
            else:
                v = None
                if succ:
                    v = succ[0]
                    for k in succ[1:]:
                        v = worse(v, k)
            new[s] = v
        if new == values:
            return values
        values = new
    raise GameError(f'point game at {p} did not stabilize within {cap} rounds')


def solve_reset_free(game: PGame) -> Dict[str, PiecewiseBasic]:
    '''Outcomes of a game without resets, interval by interval from right to left.'''
    points = sorted(game.constants())
    outcome = {s: PiecewiseBasic.false() for s in game.states}
    for i in reversed(range(len(points))):
        a = points[i]
        b = points[i + 1] if i + 1 < len(points) else None
        boundary = {s: outcome[s] for s in game.states} if b is not None else None
        interval = solve_ab_game(game, a, b, boundary)
        values = _solve_point(game, a, interval, b)
        for s in game.states:
            here = interval[s] | PiecewiseBasic.constant(values[s], a, False, a, False)
            outcome[s] = outcome[s] | here
    return outcome


def _layered(game: PGame, previous: Dict[str, PiecewiseBasic]) -> PGame:
    '''Replace every resetting edge to ``Y`` by an edge to a cost-0 state ``^Y`` paying ``previous[Y]`` at 0.'''
    states, owner, cost, payoff = list(game.states), dict(game.owner), dict(game.cost), dict(game.payoff)
    edges = []
    for e in game.edges:
        if not e.reset:
            edges.append(e)
            continue
        hat = f'^{e.dst}'
        if hat not in owner:
            states.append(hat)
            owner[hat], cost[hat] = 'min', 0
            payoff[hat] = PiecewiseBasic.constant(previous[e.dst].at(0))
        edges.append(GameEdge(e.src, hat, e.guard, False, e.rule))
    return PGame(game.clock, tuple(states), owner, cost, tuple(edges), payoff)


def solve_pgame(game: PGame) -> Dict[str, PiecewiseBasic]:
    '''
    Outcome formulas of a game: ``outcome[X](x, y)`` holds iff Min can guarantee a payoff of at most
    ``y`` from ``(X, x)``.

    Resets are handled in layers: layer ``i + 1`` replaces resetting edges by states paying the
    outcome of layer ``i`` at clock 0, until the layers agree.
    '''
    plain = PGame(game.clock, game.states, game.owner, game.cost, tuple(e for e in game.edges if not e.reset), game.payoff)
    layer = {s: f for s, f in solve_reset_free(plain).items() if s in game.owner}
    if not any(e.reset for e in game.edges):
        return layer
    for i in range(1, len(game.states) + config.settings.fixpoint_margin + 2):
        solved = solve_reset_free(_layered(game, layer))
        nxt = {s: solved[s] for s in game.states}
        if nxt == layer:
            logger.debug(f'Reset layers stable after {i} layers.')
            return layer
        layer = nxt
    raise GameError('reset layering did not stabilize')


def equation_residuals(game: PGame, outcome: Dict[str, PiecewiseBasic], points: Iterable[Tuple[str, Fraction, Fraction]]):
    '''
    The sampled ``(state, x, y)`` points at which ``outcome`` violates the fixpoint equations:
    Max states are the conjunction of their successors, Min states the disjunction of payoff,
    successors and the time-shifted own outcome.
    '''
    rhs = {}
    for s in game.states:
        succ = []
        for e in game.successors(s):
            lo, lo_strict, hi, hi_strict = _guard_region(e.guard, game.clock)
            target = PiecewiseBasic.constant(outcome[e.dst].at(0)) if e.reset else outcome[e.dst]
            succ.append(target.restrict(lo, lo_strict, hi, hi_strict))
        if game.owner[s] == 'min':
            rhs[s] = union(game.payoff.get(s, PiecewiseBasic.false()), outcome[s].shift(game.cost[s]), *succ)
        else:
            rhs[s] = intersection(*succ) if succ else PiecewiseBasic.false()
    return [(s, x, y) for s, x, y in points if outcome[s].holds(x, y) != rhs[s].holds(x, y)]


@dataclass
class VanTable:
    '''``VAN_X(x, t)`` per nonterminal.'''
    table: Dict[str, PiecewiseBasic]

    def __getitem__(self, nt) -> PiecewiseBasic:
        return self.table[nt]

    def __iter__(self):
        return iter(self.table)

    def holds(self, nt, x, t) -> bool:
        return self.table[nt].holds(Fraction(x), Fraction(t))

    def endpoints(self) -> set:
        out = set()
        for f in self.table.values():
            out |= f.endpoints()
        return out

    def to_dict(self):
        return {nt: f.to_dict() for nt, f in self.table.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=4)

    @classmethod
    def from_dict(cls, d):
        return cls({nt: PiecewiseBasic.from_dict(v) for nt, v in d.items()})


def compute_van(model: TbppModel) -> VanTable:
    '''Vanishing predicates of every nonterminal of a 1-clock model.'''
    game = tbpp_to_pgame(model)
    logger.debug(f'Vanishing game with {len(game.states)} states and {len(game.edges)} edges.')
    outcome = solve_pgame(game)
    van = VanTable({x: outcome[x] for x in model.nonterminals})
    denominators = [e.denominator for e in van.endpoints()]
    pieces = max([len(f.pieces) for f in van.table.values()] + [0])
    logger.debug(f'Vanishing predicates computed ({pieces=}, max denominator {max(denominators + [1])}).')
    return van


def van_to_formula(van, nt: str, x='x', t='t') -> Formula:
    '''``VAN_nt(x, t)`` as a quantifier-free formula: a disjunction over intervals of ``x`` of ``c - b*x <= t``.'''
    f = van[nt] if isinstance(van, VanTable) else van
    x, t = term(x), term(t)
    if f.is_false:
        return lt(Const(0), Const(0))
    if f == PiecewiseBasic.true():
        return conj(ge(x, 0), ge(t, 0))
    parts = []
    for b in f.basics():
        dom = []
        if b.is_point:
            dom.append(eq(x, b.lo))
        else:
            if b.lo > 0 or b.lo_strict:
                dom.append(lt(b.lo, x) if b.lo_strict else le(b.lo, x))
            else:
                dom.append(ge(x, 0))
            if b.hi is not None:
                dom.append(lt(x, b.hi) if b.hi_strict else le(x, b.hi))
        line = Const(b.c) if b.d == 0 else Const(b.c) - x
        dom.append(lt(line, t) if b.y_strict else le(line, t))
        parts.append(conj(*dom))
    return disj(*parts)
