'''
Coverability for any number of clocks

The search runs over bounded configurations: multisets of at most ``m + 2`` nonterminals (``m``
targets) whose processes carry one block of clocks per occurrence. Processes can be rewritten by
unary and branching rules or dropped; vanishing rules are subsumed by dropping.

'''
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from math import factorial, prod
from typing import Dict, List, Optional, Sequence, Tuple

from ..logging import logger
from ..model import Atom, Guard, Mode, ModelError, Query, TbppModel
from ..semantics import Elapse, Fire, Process, Run, SemanticsError, initial_configuration, replay, satisfies
from ..verdict import Verdict
from .dbm import Dbm
from .zones import Step, ZoneLimit, concretize, explore

Occurrence = Tuple[str, int]

# symmetric orderings tried when canonicalizing a zone
PERMUTATION_LIMIT = 120


def clock_name(clock: str, occurrence: Occurrence) -> str:
    return f'{clock}#{occurrence[0]}#{occurrence[1]}'


@dataclass(frozen=True)
class BoundedConfig:
    '''
    BoundedConfig

    :param multiset: sorted nonterminals; occurrence ``(X, j)`` is the ``j``-th copy of ``X``.
    '''
    multiset: Tuple[str, ...]

    @classmethod
    def of(cls, items) -> 'BoundedConfig':
        return cls(tuple(sorted(items)))

    @property
    def occurrences(self) -> List[Occurrence]:
        out, seen = [], Counter()
        for x in self.multiset:
            seen[x] += 1
            out.append((x, seen[x]))
        return out

    def clocks(self, clocks: Sequence[str]) -> List[str]:
        return [clock_name(c, o) for o in self.occurrences for c in clocks]

    def __len__(self):
        return len(self.multiset)

    def __str__(self):
        return '[' + ' '.join(self.multiset) + ']'


@dataclass(frozen=True)
class Move:
    '''
    Move

    :param rule: rule id, ``None`` when the process is dropped.
    :param occurrence: the rewritten or dropped occurrence.
    :param origins: per occurrence of the successor, ``('old', occurrence)`` or ``('child', j)`` for
        the ``j``-th rhs nonterminal of the rule.
    '''
    rule: Optional[int]
    occurrence: Occurrence
    origins: Tuple[Tuple[Occurrence, Tuple[str, object]], ...]


def _retarget(guard: Guard, occurrence: Occurrence) -> Guard:
    return Guard(tuple(Atom(clock_name(a.clock, occurrence), a.rel, a.bound) for a in guard.atoms))


def _rename(clocks, target: BoundedConfig, origins: Dict[Occurrence, tuple], fired: Occurrence):
    pairs = []
    for o in target.occurrences:
        kind, what = origins[o]
        source = what if kind == 'old' else fired
        pairs.extend((clock_name(c, o), clock_name(c, source)) for c in clocks)
    return tuple(pairs)


def _canonical(clocks, target: BoundedConfig, origins: Dict[Occurrence, tuple], fired: Occurrence, zone: Dbm):
    '''Among the orderings of equal nonterminals, the one giving the smallest zone matrix.'''
    counts = Counter(target.multiset)
    if prod(factorial(k) for k in counts.values()) > PERMUTATION_LIMIT or all(k == 1 for k in counts.values()):
        return origins
    groups = sorted(counts.items())
    best, best_key = origins, None
    for choice in product(*(permutations(range(1, k + 1)) for _, k in groups)):
        candidate = {}
        for (x, _), perm in zip(groups, choice):
            for j, p in enumerate(perm, start=1):
                candidate[(x, j)] = origins[(x, p)]
        pairs = _rename(clocks, target, candidate, fired)
        z = zone.remap([n for n, _ in pairs], [o for _, o in pairs])
        key = z.matrix.tobytes()
        if best_key is None or key < best_key:
            best, best_key = candidate, key
    return best


def successors(model: TbppModel, bound: int):
    '''The discrete steps of the bounded configuration system with at most ``bound`` processes.'''
    clocks = model.clocks

    def steps(config: BoundedConfig, zone: Dbm):
        occurrences = config.occurrences
        for fired in occurrences:
            x = fired[0]
            rest = [o for o in occurrences if o != fired]
            for r, rule in model.rules_of(x):
                if rule.is_vanishing or len(config) - 1 + len(rule.rhs) > bound:
                    continue
                target = BoundedConfig.of([o[0] for o in rest] + list(rule.rhs))
                guard = _retarget(rule.guard, fired)
                assign = tuple(
                    (clock_name(t, fired), s if isinstance(s, int) else clock_name(s, fired)) for t, s in rule.assign
                )
                yield _step(Move(r, fired, ()), target, rest, rule.rhs, guard, assign, zone)
            target = BoundedConfig.of([o[0] for o in rest])
            yield _step(Move(None, fired, ()), target, rest, (), Guard(), (), zone)

    def _step(move, target, rest, children, guard, assign, zone):
        origins: Dict[Occurrence, tuple] = {}
        pending = Counter()
        for o in rest:
            pending[o[0]] += 1
            origins[(o[0], pending[o[0]])] = ('old', o)
        for j, y in enumerate(children):
            pending[y] += 1
            origins[(y, pending[y])] = ('child', j)
        z = zone.intersect_guard(guard)
        if not z.is_empty():
            origins = _canonical(clocks, target, origins, move.occurrence, z.apply_assignment(assign))
        move = Move(move.rule, move.occurrence, tuple(sorted(origins.items())))
        return Step(move, guard, assign, _rename(clocks, target, origins, move.occurrence)), target

    return steps


def _replay_witness(model: TbppModel, initial: str, steps: List[Step], delays: List[Fraction]) -> Run:
    '''
    A run of the model following a symbolic path of the bounded system. Dropped processes stay in
    the configuration.
    '''
    alive: List[Tuple[Process, int]] = [(initial_configuration(model, initial)[0], 0)]
    owner: Dict[Occurrence, int] = {(initial, 1): 0}
    fresh = 1
    alive = [(a.shifted(delays[0]), q) for a, q in alive]
    run = [Elapse(delays[0])]
    for step, d in zip(steps, delays[1:]):
        move: Move = step.label
        pid = owner[move.occurrence]
        children = []
        if move.rule is not None:
            rule = model.rules[move.rule]
            j = next(k for k, (_, q) in enumerate(alive) if q == pid)
            p, _ = alive.pop(j)
            at = sorted(a for a, _ in alive + [(p, pid)]).index(p)
            run.append(Fire(move.rule, at))
            nu = rule.apply(p.as_dict())
            for y in rule.rhs:
                alive.append((Process.of(y, nu), fresh))
                children.append(fresh)
                fresh += 1
        owner = {o: owner[what] if kind == 'old' else children[what] for o, (kind, what) in move.origins}
        alive = [(a.shifted(d), q) for a, q in alive]
        run.append(Elapse(d))
    return Run(tuple(run)).compact()


def decide_cover_multi(model: TbppModel, initial: str, targets: Sequence[str]) -> Verdict:
    '''
    Can ``(initial, 0)`` reach a configuration containing the targets with all clocks 0?

    :return: ``Sat`` with a replayable :class:`~tbpp.semantics.Run`, ``Unsat``, or ``Unknown`` when
        the zone graph exceeds ``Settings.game_state_limit``.
    '''
    for nt in (initial, *targets):
        if nt not in model.nonterminals:
            raise ModelError(f'undeclared nonterminal {nt}')
    bound = len(targets) + 2
    logger.info(f'Deciding coverability with zones ({initial=}, {targets=}, {bound=}).')
    if not targets:
        return Verdict.sat({'run': Run()}, largest=1)
    goal_config = BoundedConfig.of(targets)
    final = Guard(tuple(Atom(c, '=', 0) for c in goal_config.clocks(model.clocks)))
    largest = 1
    step_fn = successors(model, bound)

    def steps(config, zone):
        nonlocal largest
        for step, target in step_fn(config, zone):
            largest = max(largest, len(target))
            yield step, target

    def goal(config, zone):
        return config == goal_config and not zone.intersect_guard(final).is_empty()

    start = BoundedConfig((initial,))
    try:
        path, statistics = explore(start, Dbm.zero(start.clocks(model.clocks)), steps, goal, model.max_constant)
    except ZoneLimit as e:
        logger.warning(f'{e}; answering unknown.')
        return Verdict.unknown(str(e), largest=largest)
    statistics['largest'] = largest
    logger.debug(f'Bounded configuration search ({statistics=}).')
    if path is None:
        return Verdict.unsat(**statistics)

    delays = concretize({c: Fraction(0) for c in start.clocks(model.clocks)}, path, final)
    query = Query(Mode.cover, initial, tuple(targets))
    if delays is not None:
        run = _replay_witness(model, initial, path, delays)
        try:
            if satisfies(replay(model, initial_configuration(model, initial), run), query):
                moves = [{'rule': s.label.rule, 'process': '#'.join(map(str, s.label.occurrence))} for s in path]
                return Verdict.sat({'run': run, 'moves': moves}, **statistics)
        except SemanticsError as e:
            logger.warning(f'Coverability witness does not replay: {e}')
    logger.warning('Symbolic coverability path could not be turned into a run.')
    return Verdict.unknown('symbolic path could not be concretized', **statistics)
