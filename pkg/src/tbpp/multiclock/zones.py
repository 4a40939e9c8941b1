'''
Zone graph exploration

A forward search over symbolic states ``(location, zone)`` with inclusion subsumption, and the
concretization of symbolic paths into exact delays.

'''
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Any, Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .. import config
from ..la import Var, eq, ge, gt, le, lt, solve_rat_conjunction, total
from ..logging import logger
from ..model import Atom, Guard, ModelError, Source, TbppModel, require_one_clock
from ..semantics import Elapse, Fire, Run
from ..ta1 import scale_model
from ..verdict import Verdict
from .dbm import Dbm


@dataclass(frozen=True)
class Step:
    '''
    Step

    A discrete step of a symbolic path, taken after a delay.

    :param label: what the caller needs to replay the step, e.g. a rule id.
    :param guard: guard over the zone's clocks.
    :param assign: updates over the zone's clocks.
    :param rename: ``(new clock, old clock)`` pairs giving the clocks after the step; ``None``
        keeps the clocks.
    '''
    label: Any
    guard: Guard = Guard()
    assign: Tuple[Tuple[str, Source], ...] = ()
    rename: Optional[Tuple[Tuple[str, str], ...]] = None

    def apply(self, zone: Dbm) -> Dbm:
        '''Successor zone before time elapse; may be empty.'''
        z = zone.intersect_guard(self.guard)
        if z.is_empty():
            return z
        z = z.apply_assignment(self.assign)
        if self.rename is not None:
            z = z.remap([n for n, _ in self.rename], [o for _, o in self.rename])
        return z


Successors = Callable[[Hashable, Dbm], Iterable[Tuple[Step, Hashable]]]


class ZoneLimit(RuntimeError):
    pass


RELATIONS = {'<': lt, '<=': le, '=': eq, '>=': ge, '>': gt}


def explore(
        location: Hashable,
        zone: Dbm,
        successors: Successors,
        goal: Callable[[Hashable, Dbm], bool],
        ceiling: int,
        limit: Optional[int] = None,
) -> Tuple[Optional[List[Step]], dict]:
    '''
    Breadth-first zone graph search.

    :param location: initial discrete state.
    :param zone: initial zone, before time elapse.
    :param successors: discrete steps enabled from a location; the zone is passed for pruning only.
    :param goal: test on ``(location, zone)`` after time elapse.
    :param ceiling: extrapolation constant.
    :param limit: number of stored symbolic states.

    :return: the steps of a path to a goal state, or ``None``, and search statistics.
    :raises ZoneLimit: when ``limit`` states were stored without reaching a goal.
    '''
    limit = limit or config.settings.game_state_limit
    start = zone.up().extrapolate(ceiling)
    states: List[Tuple[Hashable, Dbm, Optional[int], Optional[Step]]] = [(location, start, None, None)]
    passed: Dict[Hashable, List[Dbm]] = {location: [start]}
    queue = deque([0])
    subsumed = 0

    def path(i):
        steps = []
        while states[i][2] is not None:
            steps.append(states[i][3])
            i = states[i][2]
        return list(reversed(steps))

    while queue:
        i = queue.popleft()
        loc, z, _, _ = states[i]
        if goal(loc, z):
            statistics = {'states': len(states), 'subsumed': subsumed}
            return path(i), statistics
        for step, loc2 in successors(loc, z):
            z2 = step.apply(z)
            if z2.is_empty():
                continue
            z2 = z2.up().extrapolate(ceiling)
            known = passed.setdefault(loc2, [])
            if any(old.includes(z2) for old in known):
                subsumed += 1
                continue
            known[:] = [old for old in known if not z2.includes(old)]
            known.append(z2)
            states.append((loc2, z2, i, step))
            queue.append(len(states) - 1)
            if len(states) > limit:
                raise ZoneLimit(f'zone graph exceeds {limit} symbolic states')
    return None, {'states': len(states), 'subsumed': subsumed}


def concretize(initial: Mapping[str, Fraction], steps: Sequence[Step], final: Guard = Guard()) -> Optional[List[Fraction]]:
    '''
    Delays ``d_0, ..., d_n`` realizing a symbolic path: ``d_i`` elapses before step ``i`` and
    ``d_n`` after the last step, where ``final`` must hold.

    Clock values are tracked as a constant plus a suffix sum of delays; the delay constraints are
    solved exactly over the rationals.
    '''
    delays = [Var(f'd{i}') for i in range(len(steps) + 1)]
    values: Dict[str, Tuple[Fraction, int]] = {c: (Fraction(v), 0) for c, v in initial.items()}

    def clock(c, upto):
        const, start = values[c]
        return total([const, *delays[start:upto + 1]])

    def atoms(guard, upto):
        return [RELATIONS[a.rel](clock(a.clock, upto), a.bound) for a in guard.atoms]

    constraints = [ge(d, 0) for d in delays]
    for i, step in enumerate(steps):
        constraints.extend(atoms(step.guard, i))
        for target, source in step.assign:
            values[target] = (Fraction(source), i + 1) if isinstance(source, int) else values[source]
        if step.rename is not None:
            values = {new: values[old] for new, old in step.rename}
    constraints.extend(atoms(final, len(steps)))
    verdict = solve_rat_conjunction(constraints)
    if not verdict.is_sat:
        return None
    solution = {s.name: v for s, v in verdict.witness.items() if isinstance(s, Var)}
    return [solution.get(d.name, Fraction(0)) for d in delays]


def _check_ta(ta: TbppModel):
    if not ta.is_ta:
        raise ModelError('zone reachability applies to timed automata only')


def product_with_global_clock(ta: TbppModel) -> Tuple[TbppModel, str]:
    '''The automaton with an extra clock that is never reset, and that clock's name.'''
    g = '_g'
    while g in ta.clocks:
        g += '_'
    return TbppModel(ta.clocks + (g,), ta.nonterminals, ta.rules), g


def ta_reach(
        ta: TbppModel,
        initial: str,
        valuation: Mapping[str, Fraction],
        target: str,
        constraint: Guard = Guard(),
) -> Verdict:
    '''
    Can ``(initial, valuation)`` reach location ``target`` with a valuation satisfying ``constraint``?

    Rules with empty rhs are ignored. Rational initial values are handled by scaling the automaton.

    :return: ``Sat`` with a :class:`~tbpp.semantics.Run` (all ``Fire`` steps at index 0) or ``Unsat``;
        ``Unknown`` when the zone graph exceeds ``Settings.game_state_limit``.
    '''
    _check_ta(ta)
    for nt in (initial, target):
        if nt not in ta.nonterminals:
            raise ModelError(f'undeclared nonterminal {nt}')
    valuation = {c: Fraction(valuation.get(c, 0)) for c in ta.clocks}
    k = lcm(1, *(v.denominator for v in valuation.values()))
    scaled = scale_model(ta, k)
    constraint = Guard(tuple(Atom(a.clock, a.rel, a.bound * k) for a in constraint.atoms))
    start = {c: int(v * k) for c, v in valuation.items()}
    ceiling = max([scaled.max_constant, *constraint.constants, *start.values(), 0])
    logger.debug(f'Zone reachability ({initial=}, {target=}, scale={k}, {ceiling=}).')

    def successors(loc, zone):
        for r, rule in scaled.rules_of(loc):
            if rule.is_unary:
                yield Step(r, rule.guard, rule.assign), rule.rhs[0]

    def goal(loc, zone):
        return loc == target and not zone.intersect_guard(constraint).is_empty()

    try:
        steps, statistics = explore(initial, Dbm.point(start, scaled.clocks), successors, goal, ceiling)
    except ZoneLimit as e:
        logger.warning(f'{e}; answering unknown.')
        return Verdict.unknown(str(e))
    if steps is None:
        return Verdict.unsat(**statistics)
    delays = concretize(start, steps, constraint)
    if delays is None:
        logger.warning('Symbolic path could not be concretized.')
        return Verdict.unknown('symbolic path could not be concretized', **statistics)
    run = [Elapse(delays[0] / k)]
    for step, d in zip(steps, delays[1:]):
        run += [Fire(step.label, 0), Elapse(d / k)]
    return Verdict.sat({'run': Run(tuple(run)).compact(), 'rules': [s.label for s in steps]}, **statistics)


def decide_ternary_zones(ta: TbppModel, X: str, Y: str, u, v, delta) -> Verdict:
    '''
    Ternary reachability of a 1-clock automaton through the product with a global clock.

    ``(X, u)`` reaches ``(Y, v)`` in exactly ``delta`` iff the product reaches ``Y`` with the
    automaton's clock at ``v`` and the global clock at ``delta``.
    '''
    x = require_one_clock(ta)
    _check_ta(ta)
    u, v, delta = Fraction(u), Fraction(v), Fraction(delta)
    if min(u, v, delta) < 0:
        raise ValueError(f'negative ternary parameters ({u=}, {v=}, {delta=})')
    product, g = product_with_global_clock(ta)
    k = lcm(u.denominator, v.denominator, delta.denominator)
    product = scale_model(product, k)
    logger.info(f'Deciding ternary reachability with zones ({X=}, {Y=}, {u=}, {v=}, {delta=}).')
    target = Guard((Atom(x, '=', int(v * k)), Atom(g, '=', int(delta * k))))
    verdict = ta_reach(product, X, {x: u * k, g: Fraction(0)}, Y, target)
    verdict.statistics['scale'] = k
    if verdict.is_sat:
        steps = tuple(Elapse(s.amount / k) if isinstance(s, Elapse) else s for s in verdict.witness['run'].steps)
        verdict.witness['run'] = Run(steps)
    return verdict
