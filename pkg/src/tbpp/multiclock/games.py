'''
Reachability through timed games

* :func:`reduce_reach_to_simple` turns a reachability query into one with a single target.
* :func:`build_simple_reach_game` builds the two player game in which Min develops the branch
  leading to the target while Max picks the sibling that has to vanish last.
* :func:`solve_game_discrete` solves that game on a time grid by backward induction.
* :func:`decide_reach_multi` ties the three together.

'''
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import floor, lcm
from typing import Dict, List, Optional, Sequence, Tuple

from .. import config
from ..logging import logger
from ..model import Atom, Guard, Mode, ModelError, Query, Rule, Source, TbppModel, reachable_nonterminals
from ..semantics import check_derivation_tree, default_granularity, explore_discretized, run_to_tree
from ..verdict import Verdict


class GameMode(str, Enum):
    discrete = 'discrete'
    dense = 'dense-attempt'


# reachability to simple reachability

@dataclass(frozen=True)
class SimpleReduction:
    '''
    SimpleReduction

    :param model: the model with a single target.
    :param initial: its initial nonterminal.
    :param target: its target nonterminal.
    :param kind: ``identity``, ``dummy`` (no targets) or ``bounded`` (bounded multiset system).
    :param multisets: for ``bounded``, the multiset each ``[beta]`` nonterminal stands for.
    '''
    model: TbppModel
    initial: str
    target: str
    kind: str
    multisets: Dict[str, Tuple[str, ...]] = field(default_factory=dict)


def _fresh(name: str, taken) -> str:
    while name in taken:
        name += '_'
    return name


def _block(clock: str, x: str, j: int) -> str:
    return f'{clock}.{x}.{j}'


def _dummy(model: TbppModel, initial: str) -> SimpleReduction:
    '''A dummy process created next to the initial one resets its clocks at will and is the only survivor.'''
    start = _fresh(f'{initial}.start', model.nonterminals)
    dummy = _fresh('Dummy', set(model.nonterminals) | {start})
    zero = Guard(tuple(Atom(c, '=', 0) for c in model.clocks))
    rules = model.rules + (
        Rule(start, zero, (), (dummy, initial)),
        Rule(dummy, Guard(), tuple((c, 0) for c in model.clocks), (dummy,)),
    )
    return SimpleReduction(TbppModel(model.clocks, model.nonterminals + (start, dummy), rules), start, dummy, 'dummy')


class _BoundedSystem:
    '''The single-process system over multisets of at most ``bound`` nonterminals.'''

    def __init__(self, model: TbppModel, initial: str, bound: int):
        self.model = model
        self.bound = bound
        self.names: Dict[Tuple[str, ...], str] = {}
        self.rules: List[Rule] = []
        self.extra: List[str] = []
        nts = sorted(reachable_nonterminals(model, initial))
        self.clocks = tuple(_block(c, x, j) for x in nts for j in range(1, bound + 1) for c in model.clocks)
        self.queue = deque()
        self.name((initial,))

    def name(self, beta: Tuple[str, ...]) -> str:
        beta = tuple(sorted(beta))
        if beta not in self.names:
            self.names[beta] = f'B{len(self.names)}'
            self.queue.append(beta)
        return self.names[beta]

    def retarget(self, guard: Guard, x: str, i: int) -> Guard:
        return Guard(tuple(Atom(_block(a.clock, x, i), a.rel, a.bound) for a in guard.atoms))

    def rewrite(self, beta: Tuple[str, ...], x: str, i: int, rule: Rule) -> Rule:
        '''Rewrite occurrence ``i`` of ``x`` with ``rule`` inside the multiset ``beta``.'''
        clocks = self.model.clocks
        count = Counter(beta)
        children = list(rule.rhs)
        in_place = x in children
        if in_place:
            children.remove(x)
        after = count.copy()
        if not in_place:
            after[x] -= 1
        source: Dict[str, Source] = {c: _block(c, x, i) for c in clocks}
        for t, s in rule.assign:
            source[t] = s if isinstance(s, int) else source[s]
        assign: List[Tuple[str, Source]] = []
        for y in children:
            after[y] += 1
            assign.extend((_block(c, y, after[y]), source[c]) for c in clocks)
        if in_place:
            assign.extend((_block(t, x, i), s if isinstance(s, int) else _block(s, x, i)) for t, s in rule.assign)
        else:
            for j in range(i, count[x]):
                assign.extend((_block(c, x, j), _block(c, x, j + 1)) for c in clocks)
        rest = list(beta)
        rest.remove(x)
        new = tuple(sorted(rest + list(rule.rhs)))
        rhs = (self.name(new),) if new else ()
        return Rule(self.names[beta], self.retarget(rule.guard, x, i), tuple(assign), rhs)

    def splits(self, beta: Tuple[str, ...]):
        occurrences = [(x, j) for x, k in sorted(Counter(beta).items()) for j in range(1, k + 1)]
        for size in range(1, len(occurrences)):
            for chosen in combinations(occurrences, size):
                rest = [o for o in occurrences if o not in chosen]
                yield chosen, rest

    def gather(self, part) -> Tuple[Tuple[str, ...], Tuple[Tuple[str, Source], ...]]:
        '''Move the chosen occurrences to the first blocks, keeping their order.'''
        assign, seen = [], Counter()
        for x, j in part:
            seen[x] += 1
            if seen[x] != j:
                assign.extend((_block(c, x, seen[x]), _block(c, x, j)) for c in self.model.clocks)
        return tuple(sorted(x for x, _ in part)), tuple(assign)

    def build(self):
        while self.queue:
            beta = self.queue.popleft()
            me = self.names[beta]
            seen = Counter()
            for x in beta:
                seen[x] += 1
                for _, rule in self.model.rules_of(x):
                    if len(beta) - 1 + len(rule.rhs) <= self.bound:
                        self.rules.append(self.rewrite(beta, x, seen[x], rule))
            for k, (left, right) in enumerate(self.splits(beta)):
                parts = []
                for side, part in ((1, left), (2, right)):
                    mid = f'{me}.s{k}.{side}'
                    self.extra.append(mid)
                    sub, assign = self.gather(part)
                    self.rules.append(Rule(mid, Guard(), assign, (self.name(sub),)))
                    parts.append(mid)
                self.rules.append(Rule(me, Guard(), (), tuple(parts)))


def reduce_reach_to_simple(model: TbppModel, initial: str, targets: Sequence[str]) -> SimpleReduction:
    '''
    A model and a single target nonterminal such that ``(initial, 0)`` reaches exactly the targets
    iff the new initial nonterminal reaches exactly the new target.

    * One target: the query is kept.
    * No targets: a dummy process is created next to the initial one (see :func:`_dummy`).
    * ``m >= 2`` targets: single processes ``[beta]`` carry a multiset of at most ``m + 2``
      nonterminals with one clock block per occurrence. They rewrite their occurrences, split into
      two processes over complementary sub-multisets, and finally turn into the target when they
      hold exactly the targets with clocks 0.
    '''
    for nt in (initial, *targets):
        if nt not in model.nonterminals:
            raise ModelError(f'undeclared nonterminal {nt}')
    if len(targets) == 1:
        return SimpleReduction(model, initial, targets[0], 'identity')
    if not targets:
        return _dummy(model, initial)

    bound = len(targets) + 2
    system = _BoundedSystem(model, initial, bound)
    system.build()
    goal = tuple(sorted(targets))
    done = 'Done'
    rules = list(system.rules)
    if goal in system.names:
        blocks = Counter()
        zero = []
        for x in goal:
            blocks[x] += 1
            zero.extend(Atom(_block(c, x, blocks[x]), '=', 0) for c in model.clocks)
        rules.append(Rule(system.names[goal], Guard(tuple(zero)), tuple((c, 0) for c in system.clocks), (done,)))
    nts = tuple(system.names.values()) + tuple(system.extra) + (done,)
    reduced = TbppModel(system.clocks, nts, tuple(rules))
    multisets = {name: beta for beta, name in system.names.items()}
    logger.debug(f'Bounded multiset system ({len(multisets)} multisets, {len(rules)} rules, {len(system.clocks)} clocks).')
    return SimpleReduction(reduced, system.names[(initial,)], done, 'bounded', multisets)


# the simple reachability game

@dataclass(frozen=True, order=True)
class GameState:
    '''
    GameState

    Min states track the main branch ``main`` on the L clocks and one sibling on the R clocks.
    Max states offer the sibling candidates in ``pending``.
    '''
    owner: str
    main: str
    sibling: Optional[str] = None
    pending: Tuple[str, ...] = ()

    def __str__(self):
        sibling = self.sibling or '-'
        if self.owner == 'min':
            return f'({self.main}, {sibling})'
        return f'<{self.main}, {sibling} | {" ".join(self.pending)}>'


@dataclass(frozen=True)
class GameMove:
    src: GameState
    dst: GameState
    guard: Guard = Guard()
    assign: Tuple[Tuple[str, Source], ...] = ()
    label: str = ''

    def to_dict(self):
        return {
            'src': str(self.src),
            'dst': str(self.dst),
            'guard': str(self.guard),
            'assign': [[t, s] for t, s in self.assign],
            'label': self.label,
        }


@dataclass
class ReachGame:
    '''
    ReachGame

    :param clocks: the L and R copies of the model clocks.
    :param initial: the initial Min state, all clocks 0.
    :param target: the Min state Min wants to reach.
    :param target_guard: required of the clocks in ``target``.
    :param states: all states reachable in the location graph.
    :param moves: the moves between them; Max states are urgent.
    '''
    clocks: Tuple[str, ...]
    initial: GameState
    target: GameState
    target_guard: Guard
    states: List[GameState]
    moves: List[GameMove]

    def moves_of(self) -> Dict[GameState, List[GameMove]]:
        out: Dict[GameState, List[GameMove]] = {s: [] for s in self.states}
        for m in self.moves:
            out[m.src].append(m)
        return out

    @property
    def max_constant(self) -> int:
        ks = [0, *self.target_guard.constants]
        for m in self.moves:
            ks.extend(m.guard.constants)
            ks.extend(s for _, s in m.assign if isinstance(s, int))
        return max(ks)

    def to_dict(self):
        return {
            'clocks': list(self.clocks),
            'initial': str(self.initial),
            'target': str(self.target),
            'targetGuard': str(self.target_guard),
            'states': [{'name': str(s), 'owner': s.owner} for s in self.states],
            'moves': [m.to_dict() for m in self.moves],
        }


def _side(clock: str, side: str) -> str:
    return f'{clock}.{side}'


def _on(rule: Rule, side: str) -> Tuple[Guard, Tuple[Tuple[str, Source], ...]]:
    guard = Guard(tuple(Atom(_side(a.clock, side), a.rel, a.bound) for a in rule.guard.atoms))
    assign = tuple((_side(t, side), s if isinstance(s, int) else _side(s, side)) for t, s in rule.assign)
    return guard, assign


def build_simple_reach_game(model: TbppModel, initial: str, target: str) -> ReachGame:
    '''
    The game won by Min iff ``(initial, 0)`` reaches exactly ``(target, 0)``.

    From ``(X, Y)`` Min rewrites ``X`` on the L clocks or ``Y`` on the R clocks. When the main
    process branches, Min names the child that continues the main branch and Max either keeps ``Y``
    or replaces it by the other child, copying the L clocks into the R clocks. When the sibling
    branches, Max picks the child to keep. The sibling vanishes with its guard on the R clocks.
    Min wins in ``(target, -)`` with all L clocks 0.
    '''
    for nt in (initial, target):
        if nt not in model.nonterminals:
            raise ModelError(f'undeclared nonterminal {nt}')
    clocks = tuple(_side(c, s) for s in ('L', 'R') for c in model.clocks)
    copy = tuple((_side(c, 'R'), _side(c, 'L')) for c in model.clocks)
    start = GameState('min', initial)
    states, moves, queue = {start: None}, [], deque([start])

    def add(move: GameMove):
        moves.append(move)
        if move.dst not in states:
            states[move.dst] = None
            queue.append(move.dst)

    while queue:
        s = queue.popleft()
        if s.owner == 'max':
            if len(s.pending) == 2:
                for z in dict.fromkeys(s.pending):
                    add(GameMove(s, GameState('min', s.main, z), label=f'keep {z}'))
            else:
                if s.sibling is not None:
                    add(GameMove(s, GameState('min', s.main, s.sibling), label=f'keep {s.sibling}'))
                z = s.pending[0]
                add(GameMove(s, GameState('min', s.main, z), Guard(), copy, label=f'take {z}'))
            continue
        for r, rule in model.rules_of(s.main):
            guard, assign = _on(rule, 'L')
            if rule.is_unary:
                add(GameMove(s, GameState('min', rule.rhs[0], s.sibling), guard, assign, f'main {r}'))
            elif rule.is_branching:
                a, b = rule.rhs
                for main, other in dict.fromkeys(((a, b), (b, a))):
                    add(GameMove(s, GameState('max', main, s.sibling, (other,)), guard, assign, f'main {r} -> {main}'))
        if s.sibling is None:
            continue
        for r, rule in model.rules_of(s.sibling):
            guard, assign = _on(rule, 'R')
            if rule.is_vanishing:
                add(GameMove(s, GameState('min', s.main), guard, assign, f'sibling {r} vanishes'))
            elif rule.is_unary:
                add(GameMove(s, GameState('min', s.main, rule.rhs[0]), guard, assign, f'sibling {r}'))
            else:
                add(GameMove(s, GameState('max', s.main, None, rule.rhs), guard, assign, f'sibling {r}'))

    goal = GameState('min', target)
    target_guard = Guard(tuple(Atom(_side(c, 'L'), '=', 0) for c in model.clocks))
    logger.debug(f'Simple reachability game ({len(states)} states, {len(moves)} moves).')
    return ReachGame(clocks, start, goal, target_guard, list(states), moves)


# discrete solving

def _truth(value: int, cap: int, g: Fraction, a: Atom) -> Optional[bool]:
    '''Truth of ``a`` for a clock at ``value`` grid units; ``cap`` units means above the horizon.'''
    if value == cap:
        if a.bound > (cap - 1) * g:
            return None
        return a.rel in ('>', '>=')
    return a.holds(value * g)


def solve_game_discrete(
        game: ReachGame,
        horizon,
        granularity=1,
        require_closed: bool = True,
) -> Verdict:
    '''
    Backward induction on the grid ``{0, g, 2g, ..., horizon}`` of clock values.

    Clock values above the horizon are merged into one value; guards that cannot be evaluated on it
    disable their move. Only Min delays, by one grid step at a time.

    :param require_closed: Min wins are reported as ``Sat`` only when every guard is closed and its
        constant is a multiple of the granularity; otherwise as ``Unknown`` carrying the strategy.

    :return: ``Sat`` with a strategy if Min wins, ``Unknown`` otherwise (also when the graph exceeds
        ``Settings.game_state_limit``). The statistics say whether no guard was disabled by the
        horizon (``exact``).
    '''
    g, horizon = Fraction(granularity), Fraction(horizon)
    if g <= 0 or horizon < 0:
        raise ValueError(f'bad grid ({granularity=}, {horizon=})')
    cap = floor(horizon / g) + 1
    index = {c: i for i, c in enumerate(game.clocks)}
    moves = game.moves_of()
    limit = config.settings.game_state_limit
    closed = True
    for m in game.moves:
        for t, s in m.assign:
            if isinstance(s, int) and (s / g).denominator != 1:
                raise ValueError(f'assigned constant {s} is not on the grid of {g}')
        for a in m.guard.atoms + game.target_guard.atoms:
            closed &= a.rel not in ('<', '>') and (a.bound / g).denominator == 1
    logger.info(f'Solving reachability game on a grid ({g=}, {horizon=}, {len(game.states)} locations).')

    exact = True

    def enabled(move: GameMove, valuation) -> Optional[tuple]:
        nonlocal exact
        for a in move.guard.atoms:
            truth = _truth(valuation[index[a.clock]], cap, g, a)
            if truth is None:
                exact = False
                return None
            if not truth:
                return None
        values = list(valuation)
        for t, s in move.assign:
            values[index[t]] = min(cap, int(s / g)) if isinstance(s, int) else values[index[s]]
        return tuple(values)

    def is_goal(state, valuation):
        if state != game.target:
            return False
        return all(_truth(valuation[index[a.clock]], cap, g, a) for a in game.target_guard.atoms)

    root = (game.initial, tuple(0 for _ in game.clocks))
    nodes = [root]
    ids = {root: 0}
    succ: List[List[Tuple[int, str]]] = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        state, valuation = nodes[i]
        out = []
        if not is_goal(state, valuation):
            options = []
            for m in moves[state]:
                v2 = enabled(m, valuation)
                if v2 is not None:
                    options.append(((m.dst, v2), m.label))
            if state.owner == 'min' and any(v < cap for v in valuation):
                options.append(((state, tuple(min(cap, v + 1) for v in valuation)), 'delay'))
            for node, label in options:
                if node not in ids:
                    if len(nodes) >= limit:
                        logger.warning(f'Game graph exceeds {limit} states; answering unknown.')
                        return Verdict.unknown(f'game graph exceeds {limit} states', states=len(nodes))
                    ids[node] = len(nodes)
                    nodes.append(node)
                    queue.append(ids[node])
                out.append((ids[node], label))
        succ.append(out)

    # attractor
    preds: List[List[int]] = [[] for _ in nodes]
    for i, out in enumerate(succ):
        for j, _ in out:
            preds[j].append(i)
    remaining = [len({j for j, _ in out}) for out in succ]
    rank: Dict[int, int] = {}
    strategy: Dict[int, str] = {}
    frontier = deque()
    for i, (state, valuation) in enumerate(nodes):
        if is_goal(state, valuation):
            rank[i] = 0
            frontier.append(i)
    while frontier:
        j = frontier.popleft()
        for i in dict.fromkeys(preds[j]):
            if i in rank:
                continue
            state = nodes[i][0]
            if state.owner == 'min':
                rank[i] = rank[j] + 1
                strategy[i] = next(label for k, label in succ[i] if k == j)
                frontier.append(i)
            else:
                remaining[i] -= 1
                if remaining[i] == 0:
                    rank[i] = rank[j] + 1
                    frontier.append(i)

    statistics = {'states': len(nodes), 'exact': exact, 'closed': closed}
    logger.debug(f'Game solved ({statistics=}).')
    if 0 not in rank:
        return Verdict.unknown('Min does not win the discretized game', **statistics)
    witness = {'rank': rank[0], 'strategy': _strategy_tree(nodes, succ, rank, strategy, g)}
    if require_closed and not closed:
        verdict = Verdict.unknown('Min wins the discretized game but some guards are open or off the grid', **statistics)
        verdict.witness = witness
        return verdict
    return Verdict.sat(witness, **statistics)


def _strategy_tree(nodes, succ, rank, strategy, g, limit: int = 1000) -> List[dict]:
    '''Min's choices in the winning states reachable from the root when she follows them.'''
    out, seen, queue = [], {0}, deque([0])
    while queue and len(out) < limit:
        i = queue.popleft()
        state, valuation = nodes[i]
        entry = {'state': str(state), 'valuation': [str(v * g) for v in valuation], 'rank': rank[i]}
        if state.owner == 'min':
            if i in strategy:
                entry['move'] = strategy[i]
                nxt = [k for k, label in succ[i] if label == strategy[i] and rank.get(k, -1) == rank[i] - 1][:1]
            else:
                nxt = []
        else:
            nxt = [k for k, _ in succ[i]]
        out.append(entry)
        for k in nxt:
            if k not in seen:
                seen.add(k)
                queue.append(k)
    return out


def decide_reach_multi(
        model: TbppModel,
        initial: str,
        targets: Sequence[str],
        mode: GameMode = GameMode.discrete,
        granularity=1,
) -> Verdict:
    '''
    Reachability for any number of clocks through the simple reachability game.

    In ``discrete`` mode every Min win of the grid game counts; in ``dense-attempt`` mode only wins
    with closed guards do. A lost game proves ``Unsat`` only when every guard is closed, no guard
    was cut off by the horizon and the grid is the integers. Otherwise the discretized explorer
    gets a chance to find a run, and the answer is ``Unknown`` if it does not.

    Sat verdicts carry a derivation tree of the original model (``validated``); a Min win that the
    explorer cannot turn into a tree is reported as ``Unknown``.
    '''
    mode = GameMode(mode)
    logger.info(f'Deciding reachability with games ({initial=}, {targets=}, mode={mode.value}).')
    reduction = reduce_reach_to_simple(model, initial, tuple(targets))
    game = build_simple_reach_game(reduction.model, reduction.initial, reduction.target)
    horizon = max(game.max_constant, Fraction(granularity))
    verdict = solve_game_discrete(game, horizon, granularity, require_closed=mode is GameMode.dense)
    complete = bool(verdict.statistics.get('closed') and verdict.statistics.get('exact')) and Fraction(granularity) == 1
    verdict.statistics.update(
        reduction=reduction.kind, locations=len(game.states), completeness='complete' if complete else 'sound-positive',
    )
    query = Query(Mode.reach if targets else Mode.nonempty, initial, tuple(targets))

    if verdict.is_sat:
        return _materialized(model, query, verdict, granularity)
    if complete:
        return Verdict.unsat(**verdict.statistics)
    found = explore_discretized(model, query)
    if found.is_sat:
        tree = run_to_tree(model, initial, found.witness)
        if check_derivation_tree(model, tree, query):
            return Verdict.sat({'run': found.witness, 'derivation': tree, 'validated': True}, **verdict.statistics)
    return Verdict.unknown(verdict.reason or 'no witness found', **verdict.statistics)


def _materialized(model: TbppModel, query: Query, verdict: Verdict, granularity) -> Verdict:
    '''The Sat verdict with a derivation tree of the original model, or ``Unknown`` without one.'''
    g = Fraction(granularity)
    fine = Fraction(1, lcm(g.denominator, default_granularity(model, query).denominator))
    wide = 2 * max(len(query.targets) + 2, 3)
    for step, size in dict.fromkeys([(g, None), (fine, None), (fine, wide)]):
        found = explore_discretized(model, query, granularity=step, max_size=size)
        if not found.is_sat:
            continue
        tree = run_to_tree(model, query.initial, found.witness)
        if check_derivation_tree(model, tree, query):
            verdict.witness.update(run=found.witness, derivation=tree, validated=True)
            return verdict
    logger.warning('Game witness could not be materialized into a derivation tree; answering unknown.')
    return Verdict.unknown('witness not materialized', **verdict.statistics)
