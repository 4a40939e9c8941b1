'''
Benchmark instances

Generators for the hardness reductions to TBPP, each paired with a combinatorial oracle that
computes the ground truth without touching the decision procedures:

* ``subsetsum-ta``: subset sum as ternary reachability of a 1-clock automaton,
* ``subsetsum-tbpp``: subset sum as coverability of two targets in a 1-clock TBPP,
* ``ssg``: subset-sum games as reachability with a target of multiplicity ``2^n + 1``,
* ``countdown``: countdown games as nonemptiness of a 2-clock TBPP,
* ``cfg-nfa``: intersection of a context-free grammar with finite automata as nonemptiness.

'''
import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from pandas import DataFrame

from .executor import Executor, Methods
from .file_reader import write_file
from .logging import logger
from .model import Atom, Guard, Mode, Query, Rule, TbppModel, check, parse_document

GroundTruth = Union[bool, str]


@dataclass(frozen=True)
class Instance:
    '''
    Instance

    A generated model and query with the answer computed by an oracle.

    :param family: the reduction that produced the instance.
    :param params: the reduction's parameters, JSON friendly.
    :param model: the model.
    :param query: the query.
    :param ground_truth: ``True``/``False``, or ``'solver'`` when no oracle applies.
    :param tags: e.g. ``reach-equivalent`` or ``succinct``.
    '''
    family: str
    params: dict
    model: TbppModel
    query: Query
    ground_truth: GroundTruth
    tags: Tuple[str, ...] = ()

    @property
    def params_text(self) -> str:
        return json.dumps(self.params, sort_keys=True)

    def sidecar(self) -> dict:
        return {'family': self.family, 'params': self.params, 'groundTruth': self.ground_truth, 'tags': list(self.tags)}

    def save(self, url: Path) -> Path:
        '''
        Save the model and query as text and the sidecar next to it (``<name>.json``).

        :return: the sidecar path.
        '''
        url = Path(url)
        url.write_text(self.model.to_text(self.query), encoding='utf8')
        sidecar = url.with_suffix('.json')
        with open(sidecar, 'w') as f:
            json.dump(self.sidecar(), f, indent=4)
        return sidecar

    @classmethod
    def load(cls, url: Path) -> 'Instance':
        url = Path(url)
        model, query = parse_document(url.read_text(encoding='utf8'))
        with open(url.with_suffix('.json'), 'r') as f:
            d = json.load(f)
        return cls(d['family'], d['params'], model, query, d['groundTruth'], tuple(d.get('tags', ())))


GeneratedInstance = Instance


def _rule(lhs, guard=(), assign=(), rhs=()) -> Rule:
    return Rule(lhs, Guard(tuple(Atom(c, rel, k) for c, rel, k in guard)), tuple(assign), tuple(rhs))


def _model(clocks, nonterminals, rules) -> TbppModel:
    return check(TbppModel(tuple(clocks), tuple(dict.fromkeys(nonterminals)), tuple(rules)))


def has_subset_sum(S: Sequence[int], target: int) -> bool:
    return any(sum(c) == target for r in range(len(S) + 1) for c in combinations(S, r))


def _check_subset_sum(S, target):
    if any(int(a) != a or a <= 0 for a in S):
        raise ValueError(f'subset-sum items must be positive integers, got {list(S)}')
    if target < 0:
        raise ValueError(f'negative subset-sum target {target}')


def gen_subsetsum_ta(S: Sequence[int], a: int) -> Instance:
    '''
    Subset Sum as Ternary Reachability

    Locations ``X0 ... Xk``; stage ``i`` either moves on immediately or dwells exactly ``S[i]`` and
    resets the clock. ``(X0, 0)`` reaches ``(Xk, 0)`` in exactly ``a`` iff some subset sums to ``a``.

    :param S: positive integers.
    :param a: the target sum.
    '''
    S = [int(s) for s in S]
    _check_subset_sum(S, a)
    k = len(S)
    rules = []
    for i, s in enumerate(S, start=1):
        rules.append(_rule(f'X{i - 1}', [('x', '=', 0)], (), [f'X{i}']))
        rules.append(_rule(f'X{i - 1}', [('x', '=', s)], [('x', 0)], [f'X{i}']))
    model = _model(['x'], [f'X{i}' for i in range(k + 1)], rules)
    query = Query(Mode.ternary, 'X0', (f'X{k}',), delta=a)
    return Instance('subsetsum-ta', {'S': S, 'a': a}, model, query, has_subset_sum(S, a))


def gen_subsetsum_tbpp(S: Sequence[int], t: int) -> Instance:
    '''
    Subset Sum as Coverability

    ``Init`` spawns the chain ``X0 ... Xk`` and a watcher ``W`` that turns into ``Y`` exactly at
    time ``t``. Both ``Xk`` and ``Y`` carry clock 0 together iff the chain spent a subset sum equal
    to ``t``. Coverability and reachability coincide on this family.

    :param S: positive integers.
    :param t: the target sum.
    '''
    S = [int(s) for s in S]
    _check_subset_sum(S, t)
    k = len(S)
    rules = [
        _rule('Init', [('x', '=', 0)], (), ['X0', 'W']),
        _rule('W', [('x', '=', t)], [('x', 0)], ['Y']),
    ]
    for i, s in enumerate(S, start=1):
        rules.append(_rule(f'X{i - 1}', [('x', '=', 0)], (), [f'X{i}']))
        rules.append(_rule(f'X{i - 1}', [('x', '=', s)], [('x', 0)], [f'X{i}']))
    model = _model(['x'], ['Init', 'W', 'Y'] + [f'X{i}' for i in range(k + 1)], rules)
    query = Query(Mode.cover, 'Init', (f'X{k}', 'Y'))
    return Instance('subsetsum-tbpp', {'S': S, 't': t}, model, query, has_subset_sum(S, t), ('reach-equivalent',))


def ssg_winner(rounds: Sequence[Tuple[Sequence[int], Sequence[int]]], s: int) -> bool:
    '''Does the second player reach the sum ``s`` whatever the first player picks?'''
    def wins(i, total):
        if i == len(rounds):
            return total == s
        first, second = rounds[i]
        return all(any(wins(i + 1, total + x + y) for y in second) for x in first)

    return wins(0, 0)


def gen_ssg(rounds: Sequence[Tuple[Sequence[int], Sequence[int]]], s: int) -> Instance:
    '''
    Subset-Sum Game as Reachability

    In round ``i`` the universal player picks ``u_i`` or ``v_i`` (a branching into ``U_i`` and
    ``V_i``, so both are played), then the existential player picks ``w_i`` or ``z_i`` (a
    nondeterministic choice). ``T`` checks that the total time is ``s``. The target is ``2^n + 1``
    copies of ``F``, one per play plus the one from ``T``.

    :param rounds: ``[((u_1, v_1), (w_1, z_1)), ...]`` with at most 4 rounds.
    :param s: the target sum.
    '''
    rounds = [(tuple(int(a) for a in first), tuple(int(b) for b in second)) for first, second in rounds]
    if len(rounds) > 4:
        raise ValueError(f'subset-sum games are generated for at most 4 rounds, got {len(rounds)}')
    if any(len(first) != 2 or len(second) != 2 for first, second in rounds):
        raise ValueError('every round offers two numbers to each player')
    if any(a < 0 for first, second in rounds for a in first + second) or s < 0:
        raise ValueError('subset-sum game numbers must be nonnegative')
    n = len(rounds)
    rules = [
        _rule('Init', [('x', '=', 0)], (), ['A1', 'T']),
        _rule('T', [('x', '=', s)], [('x', 0)], ['F']),
        _rule(f'A{n + 1}', [('x', '=', 0)], (), ['F']),
    ]
    nonterminals = ['Init', 'T', 'F', f'A{n + 1}']
    for i, ((u, v), (w, z)) in enumerate(rounds, start=1):
        nonterminals += [f'A{i}', f'U{i}', f'V{i}', f'E{i}']
        rules.append(_rule(f'A{i}', (), (), [f'U{i}', f'V{i}']))
        rules.append(_rule(f'U{i}', [('x', '=', u)], [('x', 0)], [f'E{i}']))
        rules.append(_rule(f'V{i}', [('x', '=', v)], [('x', 0)], [f'E{i}']))
        for y in dict.fromkeys((w, z)):
            rules.append(_rule(f'E{i}', [('x', '=', y)], [('x', 0)], [f'A{i + 1}']))
    model = _model(['x'], nonterminals, rules)
    query = Query(Mode.reach, 'Init', ('F',) * (2 ** n + 1))
    params = {'rounds': [[list(first), list(second)] for first, second in rounds], 's': s}
    return Instance('ssg', params, model, query, ssg_winner(rounds, s), ('succinct',))


def countdown_winner(transitions: Sequence[Tuple[str, int, str]], k: int, initial: str) -> bool:
    '''Backward induction: can player 0 reach ``k`` exactly from ``(initial, 0)``?'''
    moves = defaultdict(set)
    for p, l, q in transitions:
        moves[(p, l)].add(q)
    labels = defaultdict(set)
    for p, l in moves:
        labels[p].add(l)

    @lru_cache(maxsize=None)
    def wins(p, n):
        if n == k:
            return True
        return any(all(wins(q, n + l) for q in moves[(p, l)]) for l in labels[p] if n + l <= k)

    return wins(initial, 0)


def gen_countdown(states: Sequence[str], transitions: Sequence[Tuple[str, int, str]], k: int, initial: Optional[str] = None) -> Instance:
    '''
    Countdown Game as Nonemptiness

    One nonterminal per state and two clocks: ``x1`` measures the current step and ``x2`` the total
    time. For every state ``p`` and label ``l`` with successors ``p_1 ... p_m``,
    ``p -[x1=l; x1:=0]-> p_1 ... p_m`` spawns all successors (player 1's choice), binarized into a
    cascade ``p.l.j`` of immediate splits guarded by ``x1=0``. ``p -[x1=0, x2=k]-> 0`` lets a
    process vanish when it arrives exactly at ``k``; ``x1=0`` forbids waiting in a state.

    :param states: the control states.
    :param transitions: ``(p, l, q)`` with ``l > 0``.
    :param k: the target number.
    :param initial: the start state, the first state by default.
    '''
    states = list(dict.fromkeys(states))
    initial = initial if initial is not None else states[0]
    transitions = sorted({(str(p), int(l), str(q)) for p, l, q in transitions})
    if k < 0:
        raise ValueError(f'negative countdown target {k}')
    for p, l, q in transitions:
        if l <= 0:
            raise ValueError(f'countdown labels must be positive, got {l}')
        if p not in states or q not in states:
            raise ValueError(f'transition ({p}, {l}, {q}) mentions an unknown state')
    if initial not in states:
        raise ValueError(f'unknown initial state {initial}')

    successors = defaultdict(list)
    for p, l, q in transitions:
        successors[(p, l)].append(q)
    nonterminals, rules = list(states), []
    for (p, l), qs in sorted(successors.items()):
        lhs, guard, assign = p, [('x1', '=', l)], [('x1', 0)]
        while len(qs) > 2:
            mid = f'{p}.{l}.{len(nonterminals)}'
            if mid in states:
                raise ValueError(f'state name {mid} clashes with a generated name')
            nonterminals.append(mid)
            rules.append(_rule(lhs, guard, assign, [qs[0], mid]))
            lhs, guard, assign, qs = mid, [('x1', '=', 0)], (), qs[1:]
        rules.append(_rule(lhs, guard, assign, qs))
    for p in states:
        rules.append(_rule(p, [('x1', '=', 0), ('x2', '=', k)]))
    model = _model(['x1', 'x2'], nonterminals, rules)
    params = {'states': states, 'transitions': [list(t) for t in transitions], 'k': k, 'initial': initial}
    return Instance('countdown', params, model, Query(Mode.nonempty, initial), countdown_winner(transitions, k, initial))


@dataclass(frozen=True)
class Production:
    '''
    Production

    ``lhs -> terminal rhs`` with at most two nonterminals in ``rhs``; ``terminal`` is ``None`` for
    ``lhs -> epsilon``.
    '''
    lhs: str
    terminal: Optional[str] = None
    rhs: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Grammar:
    start: str
    productions: Tuple[Production, ...] = ()

    @classmethod
    def of(cls, g) -> 'Grammar':
        '''Accept a grammar or its JSON form ``{"start": "S", "productions": [["S", "a", ["S"]], ["S", null, []]]}``.'''
        if isinstance(g, Grammar):
            return g
        return cls(g['start'], tuple(Production(lhs, a, tuple(rhs)) for lhs, a, rhs in g.get('productions', ())))

    @property
    def nonterminals(self) -> List[str]:
        names = [self.start]
        for p in self.productions:
            names += [p.lhs, *p.rhs]
        return list(dict.fromkeys(names))


@dataclass(frozen=True)
class Automaton:
    '''
    Automaton

    :param size: states are ``0 ... size - 1``.
    :param initial: the initial state.
    :param finals: accepting states.
    :param transitions: ``(p, letter, q)``.
    '''
    size: int
    initial: int = 0
    finals: Tuple[int, ...] = ()
    transitions: Tuple[Tuple[int, str, int], ...] = field(default=())

    @classmethod
    def of(cls, a) -> 'Automaton':
        if isinstance(a, Automaton):
            return a
        return cls(a['size'], a.get('initial', 0), tuple(a.get('finals', ())), tuple(tuple(t) for t in a.get('transitions', ())))

    def step(self, letter: str) -> set:
        return {(p, q) for p, a, q in self.transitions if a == letter}


def cfg_nfa_nonempty(grammar: Grammar, automata: Sequence[Automaton]) -> bool:
    '''
    Saturate, per grammar nonterminal, the pairs of state tuples ``(p, q)`` such that the
    nonterminal derives a word leading every automaton from ``p_i`` to ``q_i``.
    '''
    tuples = list(product(*(range(a.size) for a in automata)))

    def step(letter):
        moves = [a.step(letter) for a in automata]
        return {(p, q) for p in tuples for q in tuples if all((p[i], q[i]) in m for i, m in enumerate(moves))}

    def compose(left, right):
        by_start = defaultdict(set)
        for r, q in right:
            by_start[r].add(q)
        return {(p, q) for p, r in left for q in by_start[r]}

    steps = {p.terminal: step(p.terminal) for p in grammar.productions if p.terminal is not None}
    derives: Dict[str, set] = {x: set() for x in grammar.nonterminals}
    changed = True
    while changed:
        changed = False
        for prod in grammar.productions:
            if prod.terminal is None:
                pairs = {(p, p) for p in tuples}
            else:
                pairs = steps[prod.terminal]
                for y in prod.rhs:
                    pairs = compose(pairs, derives[y])
            if not pairs <= derives[prod.lhs]:
                derives[prod.lhs] |= pairs
                changed = True
    start = tuple(a.initial for a in automata)
    accepting = set(product(*(a.finals for a in automata)))
    return any(p == start and q in accepting for p, q in derives[grammar.start])


def gen_cfg_nfa(grammar: Grammar, automata: Sequence[Automaton]) -> Instance:
    '''
    Grammar and Automata Intersection as Nonemptiness

    Clock ``t`` is never reset and every rule requires ``t=0``, so the whole derivation happens
    at time 0 and clocks hold integers. For automaton ``i``, clock ``x_i`` is its current state and
    ``y_i`` the state it must be in when the process has derived its word; ``g_i`` stores a guessed
    intermediate state.

    * ``X -> a Y Z``: step every automaton on ``a`` (``x_i = p, x_i := q``), guess ``g`` one
      component at a time, split into two copies; the first becomes ``Y`` with ``y := g``, the
      second becomes ``Z`` with ``x := g``.
    * ``X -> a Y`` and ``X -> a``: step on ``a``, then become ``Y``, respectively check ``x = y``.
    * ``X -> epsilon``: check ``x = y``.

    The check ``x = y`` is the chain ``_eq.i -[x_i = v, y_i = v]-> _eq.i+1`` over the states ``v``,
    ending in a vanishing rule. ``_start`` sets ``x`` to the initial states, guesses ``y`` among
    the accepting states and becomes the grammar's start symbol.

    :param grammar: productions ``X -> a`` followed by at most two nonterminals, or ``X -> epsilon``.
    :param automata: automata over the grammar's terminals.
    '''
    grammar, automata = Grammar.of(grammar), [Automaton.of(a) for a in automata]
    for x in grammar.nonterminals:
        if not x.isidentifier() or x.startswith('_'):
            raise ValueError(f'grammar nonterminal {x!r} must be an identifier not starting with _')
    for prod in grammar.productions:
        if len(prod.rhs) > 2 or (prod.terminal is None and prod.rhs):
            raise ValueError(f'production {prod} is not in normal form')
    n = len(automata)
    xs, ys, gs = [f'x{i}' for i in range(1, n + 1)], [f'y{i}' for i in range(1, n + 1)], [f'g{i}' for i in range(1, n + 1)]
    now = ('t', '=', 0)
    nonterminals = list(grammar.nonterminals)
    rules = []

    def chain(name, links):
        ''' ``name.1 -> ... -> name.(len(links)+1)``, each link a list of (guard, assign) choices. '''
        for i, choices in enumerate(links, start=1):
            nonterminals.append(f'{name}.{i}')
            for guard, assign in choices:
                rules.append(_rule(f'{name}.{i}', [now, *guard], assign, [f'{name}.{i + 1}']))
        nonterminals.append(f'{name}.{len(links) + 1}')
        return f'{name}.1', f'{name}.{len(links) + 1}'

    eq_first, eq_last = chain('_eq', [
        [([(x, '=', v), (y, '=', v)], ()) for v in range(a.size)] for x, y, a in zip(xs, ys, automata)
    ])
    rules.append(_rule(eq_last, [now]))

    start_first, start_last = chain('_start', [
        [((), [(y, q)]) for q in sorted(set(a.finals))] for y, a in zip(ys, automata)
    ])
    nonterminals.append('_start')
    rules.append(_rule('_start', [now], [(x, a.initial) for x, a in zip(xs, automata)], [start_first]))
    rules.append(_rule(start_last, [now], (), [grammar.start]))

    for j, prod in enumerate(grammar.productions):
        x = prod.lhs
        if prod.terminal is None:
            rules.append(_rule(x, [now], (), [eq_first]))
            continue
        read_first, read_last = chain(f'{x}.p{j}', [
            [([(c, '=', p)], [(c, q)]) for p, a, q in sorted(m.transitions) if a == prod.terminal]
            for c, m in zip(xs, automata)
        ])
        rules.append(_rule(x, [now], (), [read_first]))
        if not prod.rhs:
            rules.append(_rule(read_last, [now], (), [eq_first]))
        elif len(prod.rhs) == 1:
            rules.append(_rule(read_last, [now], (), [prod.rhs[0]]))
        else:
            guess_first, guess_last = chain(f'{x}.p{j}.g', [
                [((), [(g, v)]) for v in range(a.size)] for g, a in zip(gs, automata)
            ])
            left, right = f'{x}.p{j}.L', f'{x}.p{j}.R'
            nonterminals += [left, right]
            rules.append(_rule(read_last, [now], (), [guess_first]))
            rules.append(_rule(guess_last, [now], (), [left, right]))
            rules.append(_rule(left, [now], list(zip(ys, gs)), [prod.rhs[0]]))
            rules.append(_rule(right, [now], list(zip(xs, gs)), [prod.rhs[1]]))

    model = _model(['t', *xs, *ys, *gs], nonterminals, rules)
    params = {
        'grammar': {'start': grammar.start, 'productions': [[p.lhs, p.terminal, list(p.rhs)] for p in grammar.productions]},
        'automata': [
            {'size': a.size, 'initial': a.initial, 'finals': list(a.finals), 'transitions': [list(t) for t in a.transitions]}
            for a in automata
        ],
    }
    return Instance('cfg-nfa', params, model, Query(Mode.nonempty, '_start'), cfg_nfa_nonempty(grammar, automata))


def random_subsetsum(rng: random.Random, size: int = 8, largest: int = 20) -> Tuple[List[int], int]:
    S = rng.sample(range(1, largest + 1), rng.randint(0, size))
    if S and rng.random() < 0.5:
        target = sum(rng.sample(S, rng.randint(0, len(S))))
    else:
        target = rng.randint(0, sum(S) + 1)
    return S, target


def random_countdown(rng: random.Random, states: int = 4, label: int = 8, k: int = 32):
    names = [f'q{i}' for i in range(rng.randint(1, states))]
    transitions = {(rng.choice(names), rng.randint(1, label), rng.choice(names)) for _ in range(rng.randint(1, 2 * len(names) + 1))}
    return names, sorted(transitions), rng.randint(0, k)


def random_ssg(rng: random.Random, rounds: int = 3, largest: int = 4):
    game = [((rng.randint(0, largest), rng.randint(0, largest)), (rng.randint(0, largest), rng.randint(0, largest)))
            for _ in range(rng.randint(0, rounds))]
    return game, rng.randint(0, 2 * largest * len(game))


def random_cfg_nfa(rng: random.Random, automata: int = 2, states: int = 3, letters: str = 'ab'):
    names = ['S', 'A']
    productions = [Production(rng.choice(names))]
    for _ in range(rng.randint(1, 4)):
        rhs = tuple(rng.choice(names) for _ in range(rng.randint(0, 2)))
        productions.append(Production(rng.choice(names), rng.choice(letters), rhs))
    machines = []
    for _ in range(rng.randint(1, automata)):
        size = rng.randint(1, states)
        transitions = {(rng.randrange(size), rng.choice(letters), rng.randrange(size)) for _ in range(rng.randint(1, 2 * size))}
        finals = tuple(sorted({rng.randrange(size) for _ in range(rng.randint(1, size))}))
        machines.append(Automaton(size, 0, finals, tuple(sorted(transitions))))
    return Grammar('S', tuple(productions)), machines


FAMILIES: Dict[str, Tuple[Callable, Callable]] = {
    'subsetsum-ta': (gen_subsetsum_ta, random_subsetsum),
    'subsetsum-tbpp': (gen_subsetsum_tbpp, random_subsetsum),
    'ssg': (gen_ssg, random_ssg),
    'countdown': (gen_countdown, random_countdown),
    'cfg-nfa': (gen_cfg_nfa, random_cfg_nfa),
}


def corpus(family: str, count: int, seed: int = 0) -> List[Instance]:
    '''
    Random instances of one family.

    :param family: one of :data:`FAMILIES`, which maps names to a generator and a sampler of its
        parameters.
    :param count: number of instances.
    :param seed: seed of the ``random.Random`` generator, so corpora are reproducible.
    '''
    if family not in FAMILIES:
        raise ValueError(f'unknown family {family!r}, expected one of {", ".join(FAMILIES)}')
    rng = random.Random(seed)
    generate, sample = FAMILIES[family]
    return [generate(*sample(rng)) for _ in range(count)]


def run_corpus(instances: Sequence[Instance], method: Methods = Methods.Map, outfile: Optional[Path] = None, **kwargs) -> DataFrame:
    '''
    Decide a corpus and compare with the ground truths.

    :param instances: generated instances.
    :param method: see :class:`tbpp.executor.Methods`.
    :param outfile: where to write the result table; the writer follows the extension.
    :param kwargs: passed to :class:`tbpp.executor.Executor`.

    :return: the result table.
    '''
    logger.info(f'Running corpus ({len(instances)} instances, method={Methods(method).value}).')
    results = Executor(method, **kwargs).execute(list(instances))
    if len(results):
        disagreements = int((results['agrees'] == False).sum())  # noqa: E712
        if disagreements:
            logger.warning(f'{disagreements} verdicts disagree with the ground truth.')
    if outfile is not None:
        logger.info(f'Saving results ({outfile=}).')
        write_file(results, Path(outfile))
    return results
