'''
Semantics

Exact-rational execution of TBPP models:

* :class:`Process` and configurations (canonically sorted tuples of processes).
* :func:`elapse`, :func:`fire`, :func:`replay` over :class:`Run` objects.
* :class:`TreeNode` derivation trees and :func:`check_derivation_tree`.
* :func:`explore_discretized`, a breadth-first search over time steps that are multiples of a
  granularity. It is sound (every witness replays) but not complete.

'''
import json
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Dict, List, Optional, Tuple, Union

from . import config
from .logging import logger
from .model import Mode, Query, Rule, TbppModel
from .verdict import Verdict


class SemanticsError(ValueError):
    '''An illegal time elapse or rule application.'''

    def __init__(self, message: str, step: Optional[int] = None):
        self.step = step
        if step is not None:
            message = f'step {step}: {message}'
        super().__init__(message)


@dataclass(frozen=True, order=True)
class Process:
    '''
    Process

    :param nt: the nonterminal.
    :param valuation: ``(clock, value)`` pairs sorted by clock name.
    '''
    nt: str
    valuation: Tuple[Tuple[str, Fraction], ...]

    @classmethod
    def zero(cls, nt: str, clocks) -> 'Process':
        return cls(nt, tuple(sorted((c, Fraction(0)) for c in clocks)))

    @classmethod
    def of(cls, nt: str, valuation: Dict[str, Fraction]) -> 'Process':
        return cls(nt, tuple(sorted((c, Fraction(v)) for c, v in valuation.items())))

    def as_dict(self) -> Dict[str, Fraction]:
        return dict(self.valuation)

    def shifted(self, t: Fraction) -> 'Process':
        return Process(self.nt, tuple((c, v + t) for c, v in self.valuation))

    @property
    def is_zero(self):
        return all(v == 0 for _, v in self.valuation)

    def __str__(self):
        return f'({self.nt}, ' + ', '.join(f'{c}={v}' for c, v in self.valuation) + ')'


Configuration = Tuple[Process, ...]


def configuration(*processes: Process) -> Configuration:
    return tuple(sorted(processes))


def initial_configuration(model: TbppModel, nt: str) -> Configuration:
    return (Process.zero(nt, model.clocks),)


def elapse(c: Configuration, t) -> Configuration:
    '''Advance every clock of every process by ``t``.'''
    t = Fraction(t)
    if t < 0:
        raise SemanticsError(f'negative time elapse {t}')
    if t == 0:
        return c
    return tuple(p.shifted(t) for p in c)


def fire(c: Configuration, process_index: int, rule: Rule) -> Configuration:
    '''
    Rewrite the process at ``process_index`` with ``rule``.

    :return: the new canonical configuration.
    '''
    if not 0 <= process_index < len(c):
        raise SemanticsError(f'process index {process_index} out of range for a configuration of size {len(c)}')
    p = c[process_index]
    if p.nt != rule.lhs:
        raise SemanticsError(f'rule for {rule.lhs} applied to process {p}')
    valuation = p.as_dict()
    if not rule.guard.holds(valuation):
        raise SemanticsError(f'guard {rule.guard} violated by {p}')
    nu = rule.apply(valuation)
    children = [Process.of(y, nu) for y in rule.rhs]
    return tuple(sorted(c[:process_index] + c[process_index + 1:] + tuple(children)))


@dataclass(frozen=True)
class Elapse:
    amount: Fraction

    def to_dict(self):
        return {'elapse': str(self.amount)}


@dataclass(frozen=True)
class Fire:
    rule: int
    at: int

    def to_dict(self):
        return {'fire': self.rule, 'at': self.at}


Step = Union[Elapse, Fire]


@dataclass(frozen=True)
class Run:
    '''
    Run

    A sequence of :class:`Elapse` and :class:`Fire` steps. ``Fire.at`` indexes the canonically
    sorted configuration at the time of the step.
    '''
    steps: Tuple[Step, ...] = ()

    @property
    def duration(self) -> Fraction:
        return sum((s.amount for s in self.steps if isinstance(s, Elapse)), Fraction(0))

    def to_dict(self):
        return [s.to_dict() for s in self.steps]

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, records: list) -> 'Run':
        steps = []
        for r in records:
            if 'elapse' in r:
                steps.append(Elapse(Fraction(r['elapse'])))
            else:
                steps.append(Fire(int(r['fire']), int(r['at'])))
        return cls(tuple(steps))

    @classmethod
    def from_json(cls, text: str) -> 'Run':
        return cls.from_dict(json.loads(text))

    def compact(self) -> 'Run':
        '''Merge consecutive elapses and drop zero elapses.'''
        steps: List[Step] = []
        for s in self.steps:
            if isinstance(s, Elapse):
                if s.amount == 0:
                    continue
                if steps and isinstance(steps[-1], Elapse):
                    steps[-1] = Elapse(steps[-1].amount + s.amount)
                    continue
            steps.append(s)
        return Run(tuple(steps))


def replay(model: TbppModel, start: Configuration, run: Run) -> Configuration:
    '''
    Execute ``run`` from ``start``.

    :raises SemanticsError: at the first illegal step, with the step index.
    '''
    c = start
    for i, s in enumerate(run.steps):
        try:
            if isinstance(s, Elapse):
                c = elapse(c, s.amount)
            else:
                if not 0 <= s.rule < len(model.rules):
                    raise SemanticsError(f'unknown rule id {s.rule}')
                c = fire(c, s.at, model.rules[s.rule])
        except SemanticsError as e:
            raise SemanticsError(str(e), i) from e
    return c


def satisfies(c: Configuration, query: Query, clocks=()) -> bool:
    '''Does configuration ``c`` meet the target of a (non-ternary) query?'''
    if query.mode is Mode.nonempty:
        return len(c) == 0
    wanted = Counter(query.targets)
    zero = Counter(p.nt for p in c if p.is_zero)
    if query.mode in (Mode.cover, Mode.simple_cover):
        return all(zero[x] >= k for x, k in wanted.items())
    if query.mode in (Mode.reach, Mode.simple_reach):
        return len(c) == len(query.targets) and zero == wanted
    raise ValueError(f'satisfies() does not handle {query.mode.value} queries')


@dataclass(frozen=True)
class TreeNode:
    '''
    TreeNode

    A node of a derivation tree.

    :param nt: the nonterminal of the process.
    :param valuation: clock values when the node's rule fires, or at the observation time for survivors.
    :param time: absolute time of that moment.
    :param rule: id of the rule applied, ``None`` for survivors.
    :param children: one child per rhs nonterminal of the rule.
    '''
    nt: str
    valuation: Tuple[Tuple[str, Fraction], ...]
    time: Fraction
    rule: Optional[int] = None
    children: Tuple['TreeNode', ...] = ()

    @property
    def is_survivor(self):
        return self.rule is None

    def leaves(self):
        if not self.children:
            yield self
        for c in self.children:
            yield from c.leaves()

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()

    def to_dict(self):
        return {
            'nt': self.nt,
            'valuation': {c: str(v) for c, v in self.valuation},
            'time': str(self.time),
            'rule': self.rule,
            'children': [c.to_dict() for c in self.children],
        }

    @classmethod
    def from_dict(cls, d: dict) -> 'TreeNode':
        return cls(
            d['nt'],
            tuple(sorted((c, Fraction(v)) for c, v in d['valuation'].items())),
            Fraction(d['time']),
            d.get('rule'),
            tuple(cls.from_dict(c) for c in d.get('children', [])),
        )


def tree_diagnostics(model: TbppModel, tree: TreeNode, query: Query) -> List[str]:
    '''All reasons why ``tree`` is not a derivation witnessing ``query``; empty if it is one.'''
    problems = []
    survivors = [n for n in tree.nodes() if n.is_survivor]
    times = {n.time for n in survivors}
    if len(times) > 1:
        problems.append(f'survivors observed at different times {sorted(times)}')
    tau = times.pop() if times else max(n.time for n in tree.nodes())

    def visit(node: TreeNode, created_at: Fraction, created: Dict[str, Fraction]):
        if node.time < created_at:
            problems.append(f'{node.nt} observed at {node.time} before its creation at {created_at}')
            return
        if node.time > tau:
            problems.append(f'{node.nt} at time {node.time} after the observation time {tau}')
        expected = {c: v + node.time - created_at for c, v in created.items()}
        if dict(node.valuation) != expected:
            problems.append(f'{node.nt} at time {node.time} has valuation {dict(node.valuation)}, expected {expected}')
            return
        if node.rule is None:
            if node.children:
                problems.append(f'survivor {node.nt} has children')
            return
        if not 0 <= node.rule < len(model.rules):
            problems.append(f'unknown rule id {node.rule}')
            return
        rule = model.rules[node.rule]
        if rule.lhs != node.nt:
            problems.append(f'rule {node.rule} has lhs {rule.lhs}, applied to {node.nt}')
            return
        if not rule.guard.holds(expected):
            problems.append(f'guard {rule.guard} of rule {node.rule} violated by {node.nt} at time {node.time}')
        if sorted(c.nt for c in node.children) != list(rule.rhs):
            problems.append(f'children of {node.nt} do not match rule {node.rule}')
            return
        nu = rule.apply(expected)
        for child in node.children:
            visit(child, node.time, nu)

    if tree.nt != query.initial:
        problems.append(f'root {tree.nt} is not the initial nonterminal {query.initial}')
    visit(tree, Fraction(0), {c: Fraction(0) for c in model.clocks})

    final = tuple(sorted(Process(n.nt, n.valuation) for n in survivors))
    if not problems and not satisfies(final, query):
        problems.append(f'survivors {", ".join(map(str, final))} do not satisfy the {query.mode.value} query')
    return problems


def check_derivation_tree(model: TbppModel, tree: TreeNode, query: Query) -> bool:
    '''
    Check that ``tree`` is a legal derivation whose survivors, all observed at one time, witness ``query``.
    '''
    problems = tree_diagnostics(model, tree, query)
    for p in problems:
        logger.debug(f'Derivation tree rejected: {p}')
    return not problems


def run_to_tree(model: TbppModel, initial: str, run: Run) -> TreeNode:
    '''Turn a replayable run from ``(initial, 0)`` into a derivation tree.'''
    now = Fraction(0)
    nodes: List[dict] = []

    def new(nt, valuation):
        nodes.append({'nt': nt, 'val': valuation, 'rule': None, 'time': None, 'children': []})
        return len(nodes) - 1

    alive = [(Process.zero(initial, model.clocks), new(initial, None))]
    for i, s in enumerate(run.steps):
        if isinstance(s, Elapse):
            if s.amount < 0:
                raise SemanticsError(f'negative time elapse {s.amount}', i)
            now += s.amount
            alive = [(p.shifted(s.amount), n) for p, n in alive]
            continue
        order = sorted(range(len(alive)), key=lambda j: alive[j][0])
        if not 0 <= s.at < len(order):
            raise SemanticsError(f'process index {s.at} out of range', i)
        j = order[s.at]
        p, n = alive.pop(j)
        rule = model.rules[s.rule]
        valuation = p.as_dict()
        if rule.lhs != p.nt or not rule.guard.holds(valuation):
            raise SemanticsError(f'rule {s.rule} not applicable to {p}', i)
        nodes[n].update(rule=s.rule, time=now, val=p.valuation)
        nu = rule.apply(valuation)
        for y in rule.rhs:
            child = new(y, None)
            nodes[n]['children'].append(child)
            alive.append((Process.of(y, nu), child))
    for p, n in alive:
        nodes[n].update(time=now, val=p.valuation)

    def build(n):
        d = nodes[n]
        return TreeNode(d['nt'], d['val'], d['time'], d['rule'], tuple(build(c) for c in d['children']))

    return build(0)


def default_granularity(model: TbppModel, query: Query) -> Fraction:
    denominator = 1
    for q in (query.delta, query.u, query.v):
        if q is not None:
            denominator = lcm(denominator, Fraction(q).denominator)
    return Fraction(1, 2 * (len(query.targets) + 2) * denominator)


def default_horizon(model: TbppModel, query: Query) -> Fraction:
    if query.mode is Mode.ternary:
        return Fraction(query.delta)
    if config.settings.explorer_horizon is not None:
        return Fraction(config.settings.explorer_horizon)
    return Fraction((model.max_constant + 1) * (len(model.nonterminals) + 1))


def explore_discretized(
        model: TbppModel,
        query: Query,
        granularity=None,
        max_steps: Optional[int] = None,
        max_size: Optional[int] = None,
        horizon=None,
        start: Optional[Configuration] = None,
) -> Verdict:
    '''
    Breadth-first search for a witness run over pairs of a configuration and the elapsed time.

    :param granularity: every time elapse is a multiple of it (default ``1/(2(m+2)d)`` for ``m`` targets
        and ``d`` the common denominator of the query's rationals).
    :param max_steps: number of expanded search states.
    :param max_size: largest configuration explored (default ``m+2``, at least 3).
    :param horizon: bound on the total elapsed time.
    :param start: initial configuration (default the query's initial nonterminal with zero clocks).

    :return: ``Sat`` with a replayable :class:`Run`, or ``Unknown``.
    '''
    g = Fraction(granularity) if granularity is not None else default_granularity(model, query)
    if g <= 0:
        raise ValueError(f'granularity must be positive, got {g}')
    max_steps = max_steps if max_steps is not None else config.settings.explorer_max_steps
    if max_size is None:
        max_size = config.settings.explorer_max_size or max(len(query.targets) + 2, 3)
    horizon = Fraction(horizon) if horizon is not None else default_horizon(model, query)
    ternary = query.mode is Mode.ternary

    if start is None:
        if ternary:
            start = (Process.of(query.initial, {model.clocks[0]: Fraction(query.u)}),)
        else:
            start = initial_configuration(model, query.initial)

    def goal(c, elapsed):
        if ternary:
            return elapsed == query.delta and c == (Process.of(query.targets[0], {model.clocks[0]: Fraction(query.v)}),)
        return satisfies(c, query)

    logger.debug(f'Exploring ({g=}, {max_steps=}, {max_size=}, {horizon=}).')
    root = (start, Fraction(0))
    parents = {root: None}
    frontier = deque([root])
    expanded = 0
    hit = None
    while frontier:
        c, elapsed = frontier.popleft()
        if goal(c, elapsed):
            hit = (c, elapsed)
            break
        if expanded >= max_steps:
            break
        expanded += 1
        successors = []
        seen_processes = set()
        for i, p in enumerate(c):
            if p in seen_processes:
                continue
            seen_processes.add(p)
            valuation = p.as_dict()
            for r, rule in model.rules_of(p.nt):
                if len(c) - 1 + len(rule.rhs) > max_size or not rule.guard.holds(valuation):
                    continue
                successors.append((fire(c, i, rule), elapsed, Fire(r, i)))
        if elapsed + g <= horizon:
            successors.append((elapse(c, g), elapsed + g, Elapse(g)))
        for c2, e2, step in successors:
            if (c2, e2) not in parents:
                parents[c2, e2] = ((c, elapsed), step)
                frontier.append((c2, e2))

    statistics = {'expanded': expanded, 'visited': len(parents)}
    if hit is None:
        reason = 'limit reached' if expanded >= max_steps else 'search space exhausted'
        return Verdict.unknown(f'no witness found ({reason})', **statistics)

    steps = []
    k = hit
    while parents[k] is not None:
        k, step = parents[k]
        steps.append(step)
    run = Run(tuple(reversed(steps))).compact()
    logger.debug(f'Explorer witness with {len(run.steps)} steps ({statistics=}).')
    return Verdict.sat(run, **statistics)
