'''
Coverability and reachability of 1-clock TBPP

All three procedures reduce to existential linear arithmetic over the tick automaton of
:mod:`tbpp.ta1`:

* simple coverability asks for a path of the projected timed automaton,
* coverability guesses the tree of least common ancestors of the target leaves
  (:class:`AncestorTree`) and connects its nodes by projected paths,
* reachability additionally guesses checkpoints along the branches (:class:`Skeleton`): between
  checkpoints the branch runs in the automaton restricted to side effects in a region set ``S``,
  and at each red checkpoint a side child is shown to vanish in time with :mod:`tbpp.games1`.

'''
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import islice, product
from math import lcm
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from . import config
from .games1 import VanTable, compute_van, van_to_formula
from .la import (
    Const, Formula, Term, Var, conj, decide, disj, eq, ge, gt, le, lt, total,
)
from .logging import logger
from .model import (
    Atom, Guard, Mode, ModelError, Query, Rule, TbppModel, desugar_constant_updates, normalize_branching_resets,
    reachable_nonterminals, require_one_clock,
)
from .semantics import TreeNode, check_derivation_tree, default_granularity, explore_discretized, run_to_tree
from .ta1 import IntervalSet, TickNfa, build_intervals, build_tick_nfa, decide_ternary, path_formula, phi_xy, scale_model
from .verdict import Answer, Verdict


class SkeletonError(ValueError):
    '''Raised for ancestor trees and skeletons that do not fit the model or the targets.'''


@dataclass(frozen=True, order=True)
class Region:
    nt: str
    interval: int

    def __str__(self):
        return f'({self.nt},{self.interval})'


@dataclass(frozen=True)
class RegionSet:
    '''A set of regions ``(nonterminal, interval index)``.'''
    regions: FrozenSet[Region] = frozenset()

    def __contains__(self, region: Region):
        return region in self.regions

    def __iter__(self):
        return iter(sorted(self.regions))

    def __len__(self):
        return len(self.regions)

    @classmethod
    def of(cls, *pairs) -> 'RegionSet':
        return cls(frozenset(Region(nt, i) for nt, i in pairs))

    @classmethod
    def everything(cls, model: TbppModel, intervals: IntervalSet) -> 'RegionSet':
        return cls(frozenset(Region(x, i) for x in model.nonterminals for i in range(len(intervals))))

    def bits(self, order: Sequence[Region]) -> int:
        return sum(1 << k for k, r in enumerate(order) if r in self.regions)


@dataclass(frozen=True)
class AncestorTree:
    '''
    AncestorTree

    Leaves are target nonterminals; an internal node carries the branching rule applied there and
    one child per rhs nonterminal of the rule (in rule order). Consecutive nodes are connected by
    paths of the projected timed automaton.
    '''
    nt: str
    rule: Optional[int] = None
    children: Tuple['AncestorTree', ...] = ()

    @property
    def is_leaf(self):
        return self.rule is None

    def nodes(self):
        '''Preorder.'''
        yield self
        for c in self.children:
            yield from c.nodes()

    def leaves(self) -> List[str]:
        return [n.nt for n in self.nodes() if n.is_leaf]

    def edges(self, initial: str, model: TbppModel) -> List[Tuple[str, str]]:
        '''``(start, node)`` nonterminals of the path into each node, in preorder.'''
        out = []

        def visit(node, start):
            out.append((start, node.nt))
            if not node.is_leaf:
                for y, child in zip(model.rules[node.rule].rhs, node.children):
                    visit(child, y)

        visit(self, initial)
        return out

    def to_dict(self):
        if self.is_leaf:
            return {'nt': self.nt}
        return {'nt': self.nt, 'rule': self.rule, 'children': [c.to_dict() for c in self.children]}

    @classmethod
    def from_dict(cls, d) -> 'AncestorTree':
        return cls(d['nt'], d.get('rule'), tuple(cls.from_dict(c) for c in d.get('children', [])))


def check_tree(model: TbppModel, tree: AncestorTree, targets: Optional[Sequence[str]] = None) -> AncestorTree:
    for node in tree.nodes():
        if node.nt not in model.nonterminals:
            raise SkeletonError(f'unknown nonterminal {node.nt}')
        if node.is_leaf:
            if node.children:
                raise SkeletonError(f'leaf {node.nt} has children')
            continue
        if not 0 <= node.rule < len(model.rules):
            raise SkeletonError(f'unknown rule id {node.rule}')
        rule = model.rules[node.rule]
        if not rule.is_branching or rule.lhs != node.nt or len(node.children) != 2:
            raise SkeletonError(f'node {node.nt} is not labelled by a branching rule of {node.nt}')
    if targets is not None and Counter(tree.leaves()) != Counter(targets):
        raise SkeletonError(f'leaves {sorted(tree.leaves())} do not match targets {sorted(targets)}')
    return tree


@dataclass(frozen=True)
class RedCheckpoint:
    '''A branching rule whose child ``rhs[side]`` continues the branch while the other one vanishes.'''
    rule: int
    side: int

    def to_dict(self):
        return {'rule': self.rule, 'side': self.side}


@dataclass(frozen=True)
class Skeleton:
    '''
    Skeleton

    :param tree: the ancestor tree; its internal nodes are the blue checkpoints.
    :param reds: per tree node (preorder) the red checkpoints on the path into it.
    '''
    tree: AncestorTree
    reds: Tuple[Tuple[RedCheckpoint, ...], ...]

    @property
    def red_count(self):
        return sum(len(r) for r in self.reds)

    def to_dict(self):
        return {'tree': self.tree.to_dict(), 'reds': [[r.to_dict() for r in rs] for rs in self.reds]}


def normalize_for_one_clock(model: TbppModel) -> TbppModel:
    '''Drop ``x := x``, desugar ``x := k`` and move resets off branching rules.'''
    x = require_one_clock(model)
    rules = [Rule(r.lhs, r.guard, tuple((t, s) for t, s in r.assign if s != x), r.rhs) for r in model.rules]
    return normalize_branching_resets(desugar_constant_updates(model.replace_rules(rules)))


def guard_formula(guard: Guard, x) -> Formula:
    builders = {'<': lt, '<=': le, '=': eq, '>=': ge, '>': gt}
    return conj(*(builders[a.rel](x, a.bound) for a in guard.atoms))


def interval_guard(x: str, intervals: IntervalSet, i: int) -> Tuple[Atom, ...]:
    iv = intervals[i]
    if iv.point:
        return (Atom(x, '=', int(iv.lo)),)
    atoms = (Atom(x, '>', int(iv.lo)),)
    if iv.hi is not None:
        atoms += (Atom(x, '<', int(iv.hi)),)
    return atoms


def projection(model: TbppModel) -> Tuple[TbppModel, List[Optional[Tuple[int, str]]]]:
    '''
    The projected timed automaton: unary rules, and ``X -> Y``, ``X -> Z`` for each branching rule
    ``X -> Y Z``. Vanishing rules are dropped.

    :return: the automaton and, per projected rule, the branching rule id and the side child
        (``None`` for unary rules).
    '''
    rules, origin = [], []
    for i, r in enumerate(model.rules):
        if r.is_unary:
            rules.append(r)
            origin.append(None)
        elif r.is_branching:
            for side, y in enumerate(r.rhs):
                rules.append(Rule(r.lhs, r.guard, r.assign, (y,)))
                origin.append((i, r.rhs[1 - side]))
    return model.replace_rules(rules), origin


def build_restricted_ta(model: TbppModel, regions: RegionSet, intervals: IntervalSet) -> TbppModel:
    '''
    The timed automaton whose branching projections may only produce side children in ``regions``.

    ``X -[g]-> Y Z`` yields ``X -[g & x in I]-> Y`` for every ``(Z, I)`` in ``regions`` (and
    symmetrically); without such regions the projection gets an unsatisfiable guard.
    '''
    x = require_one_clock(model)
    rules = []
    for i, r in enumerate(model.rules):
        if r.is_unary:
            rules.append(r)
        elif r.is_branching:
            if r.assign:
                raise ModelError(f'rule {i}: branching rule with updates; normalize the model first')
            for side, y in enumerate(r.rhs):
                sibling = r.rhs[1 - side]
                allowed = [k for k in range(len(intervals)) if Region(sibling, k) in regions]
                if not allowed:
                    rules.append(Rule(r.lhs, r.guard & Guard((Atom(x, '<', 0),)), (), (y,)))
                for k in allowed:
                    rules.append(Rule(r.lhs, r.guard & Guard(interval_guard(x, intervals, k)), (), (y,)))
    return model.replace_rules(rules)


def _splits(leaves: Tuple[str, ...]):
    '''Ordered splits of a multiset into two nonempty parts.'''
    counts = sorted(Counter(leaves).items())
    for picks in product(*(range(k + 1) for _, k in counts)):
        left = tuple(x for (x, _), p in zip(counts, picks) for _ in range(p))
        right = tuple(x for (x, k), p in zip(counts, picks) for _ in range(k - p))
        if left and right:
            yield left, right


def ancestor_trees(model: TbppModel, initial: str, targets: Sequence[str]) -> Iterator[AncestorTree]:
    '''
    Ancestor trees for ``targets`` below ``initial``, lazily.

    Candidates are pruned by untimed reachability in the projected automaton.
    '''
    proj, _ = projection(model)
    reach = {x: reachable_nonterminals(proj, x) for x in model.nonterminals}
    branching = [(i, r) for i, r in enumerate(model.rules) if r.is_branching and not r.guard.is_false()]

    def below(start, leaves):
        if len(leaves) == 1:
            if leaves[0] in reach[start]:
                yield AncestorTree(leaves[0])
            return
        for i, r in branching:
            if r.lhs not in reach[start]:
                continue
            a, b = r.rhs
            for left, right in _splits(leaves):
                if a == b and left > right:
                    continue
                for ta in below(a, left):
                    for tb in below(b, right):
                        yield AncestorTree(r.lhs, i, (ta, tb))

    if initial in model.nonterminals and targets:
        yield from below(initial, tuple(sorted(targets)))


def _ta_nfa(model: TbppModel, extra_points=()) -> Tuple[TickNfa, List[Optional[Tuple[int, str]]]]:
    proj, origin = projection(model)
    nfa = build_tick_nfa(proj, build_intervals(set(proj.constants()) | set(extra_points)))
    return nfa.deduplicated(), origin


def cover_formula(model: TbppModel, initial: str, tree: AncestorTree, nfa: Optional[TickNfa] = None) -> Formula:
    '''
    Coverability along an ancestor tree.

    Node ``n`` has clock value ``c{n}`` when its rule fires and is entered after ``d{n}`` time units
    on a projected path from its parent (or from ``(initial, 0)``). Leaves have clock 0 and all
    leaves are reached at the time ``tau``.
    '''
    check_tree(model, tree)
    if nfa is None:
        nfa, _ = _ta_nfa(model)
    tau = Var('tau')
    parts: List[Formula] = [ge(tau, 0)]
    counter = iter(range(1 << 30))

    def visit(node: AncestorTree, start: str, clock: Term, elapsed: List[Term]):
        n = next(counter)
        d = Var(f'd{n}')
        c = Const(0) if node.is_leaf else Var(f'c{n}')
        parts.append(phi_xy(nfa, start, node.nt, clock, d, c, prefix=f'p{n}.'))
        path = elapsed + [d]
        if node.is_leaf:
            parts.append(eq(total(path), tau))
            return
        rule = model.rules[node.rule]
        parts.append(guard_formula(rule.guard, c))
        child_clock = Const(0) if rule.resets else c
        for y, child in zip(rule.rhs, node.children):
            visit(child, y, child_clock, path)

    visit(tree, initial, Const(0), [])
    return conj(*parts)


def _valuation_witness(valuation: Dict[str, Fraction], scale: int = 1) -> dict:
    durations = {k: v / scale for k, v in sorted(valuation.items()) if k.startswith('d')}
    clocks = {k: v / scale for k, v in sorted(valuation.items()) if k.startswith(('c', 'b'))}
    return {'durations': durations, 'clocks': clocks, 'tau': valuation.get('tau', Fraction(0)) / scale}


def decide_simple_cover(model: TbppModel, initial: str, target: str) -> Verdict:
    '''Can ``(initial, 0)`` reach a configuration containing ``(target, 0)``?'''
    if isinstance(target, (tuple, list)):
        if len(target) != 1:
            raise ModelError(f'simple coverability needs exactly one target, got {len(target)}')
        target = target[0]
    logger.info(f'Deciding simple coverability ({initial=}, {target=}).')
    normalized = normalize_for_one_clock(model)
    if target not in normalized.nonterminals or initial not in normalized.nonterminals:
        raise ModelError(f'undeclared nonterminal in {initial} -> {target}')
    nfa, _ = _ta_nfa(normalized)
    verdict = decide(phi_xy(nfa, initial, target, 0, 'tau', 0))
    if verdict.is_sat:
        verdict.witness = {'tau': verdict.witness.get('tau', Fraction(0))}
    return verdict


def decide_cover(model: TbppModel, initial: str, targets: Sequence[str]) -> Verdict:
    '''
    Can ``(initial, 0)`` reach a configuration containing the targets with clock 0?

    Ancestor trees are tried one by one; the first satisfiable cover formula answers ``Sat``.
    '''
    logger.info(f'Deciding coverability ({initial=}, {targets=}).')
    if not targets:
        return Verdict.sat({'tree': None, 'tau': Fraction(0)})
    normalized = normalize_for_one_clock(model)
    nfa, _ = _ta_nfa(normalized)
    unknown, tried = None, 0
    for tree in ancestor_trees(normalized, initial, targets):
        if tried >= config.settings.skeleton_limit:
            logger.warning(f'Skeleton limit {config.settings.skeleton_limit} reached; answering unknown.')
            return Verdict.unknown('skeleton limit reached', trees=tried)
        tried += 1
        verdict = decide(cover_formula(normalized, initial, tree, nfa))
        if verdict.is_sat:
            witness = {'tree': tree.to_dict(), **_valuation_witness(verdict.witness)}
            return Verdict.sat(witness, trees=tried, **verdict.statistics)
        if verdict.answer is Answer.Unknown:
            unknown = verdict.reason
    logger.debug(f'Coverability exhausted {tried} ancestor trees.')
    if unknown:
        return Verdict.unknown(unknown, trees=tried)
    return Verdict.unsat(trees=tried)


def refined_intervals(model: TbppModel, van: VanTable) -> IntervalSet:
    '''Intervals between the guard constants and the breakpoints of the vanishing predicates.'''
    return build_intervals(set(model.constants()) | van.endpoints())


def vanishes_instantly(van: VanTable, region: Region, intervals: IntervalSet) -> bool:
    '''``VAN_U(z, 0)`` for every ``z`` of the region's interval.'''
    iv = intervals[region.interval]
    f = van[region.nt]
    if iv.point:
        return f.holds(iv.lo, 0)
    piece = f.line_on(iv.lo, iv.hi)
    if piece is None:
        return False
    if piece.d == 0:
        return piece.c == 0 and not piece.y_strict
    return piece.c - iv.lo <= 0


class ReachEncoder:
    '''
    Reachability witnesses of one normalized model.

    The model is scaled so that the breakpoints of its vanishing predicates are integers; times in
    formulas are in scaled units.
    '''

    def __init__(self, model: TbppModel):
        van = compute_van(model)
        self.scale = lcm(1, *(p.denominator for p in van.endpoints()))
        self.model = scale_model(model, self.scale)
        self.van = compute_van(self.model) if self.scale != 1 else van
        self.intervals = refined_intervals(self.model, self.van)
        proj, self.origin = projection(self.model)
        self.nfa = build_tick_nfa(proj, self.intervals).deduplicated(key=self._sibling)
        self.regions = sorted(RegionSet.everything(self.model, self.intervals))
        self.instant = RegionSet(frozenset(r for r in self.regions if vanishes_instantly(self.van, r, self.intervals)))
        self.reach = {x: reachable_nonterminals(proj, x) for x in self.model.nonterminals}
        self.branching = [(i, r) for i, r in enumerate(self.model.rules) if r.is_branching and not r.guard.is_false()]
        logger.debug(f'Reachability encoder ({self.scale=}, intervals={len(self.intervals)}, '
                     f'regions={len(self.regions)}, edges={len(self.nfa.edges)}).')

    def _sibling(self, e) -> Optional[str]:
        '''The side child an edge spawns; its region decides whether the edge may be used.'''
        if e.rule is None or self.origin[e.rule] is None:
            return None
        return self.origin[e.rule][1]

    @property
    def red_bound(self) -> int:
        bound = config.settings.red_checkpoint_bound
        return bound if bound is not None else len(self.regions)

    def red_chains(self, start: str, end: str, length: int) -> Iterator[Tuple[RedCheckpoint, ...]]:
        if length == 0:
            if end in self.reach[start]:
                yield ()
            return
        for i, r in self.branching:
            if r.lhs not in self.reach[start]:
                continue
            for side in (0, 1):
                if side == 1 and r.rhs[0] == r.rhs[1]:
                    continue
                if self.van[r.rhs[1 - side]].is_false:
                    continue
                for rest in self.red_chains(r.rhs[side], end, length - 1):
                    yield (RedCheckpoint(i, side),) + rest

    def skeletons(self, initial: str, targets: Sequence[str]) -> Iterator[Skeleton]:
        '''Skeletons by increasing number of red checkpoints.'''
        trees = list(ancestor_trees(self.model, initial, targets))
        if not trees:
            return
        edges = {tree: tree.edges(initial, self.model) for tree in trees}
        bound = self.red_bound
        for count in range(bound * max(len(e) for e in edges.values()) + 1):
            for tree in trees:
                for split in _compositions(count, len(edges[tree]), bound):
                    chains = [list(self.red_chains(s, e, k)) for (s, e), k in zip(edges[tree], split)]
                    for reds in product(*chains):
                        yield Skeleton(tree, tuple(reds))

    def region_var(self, seg: str, region: Region) -> Var:
        return Var(f's{seg}.{region.nt}.{region.interval}', True)

    def formula(self, initial: str, targets: Sequence[str], skeleton: Skeleton) -> Formula:
        '''
        The witness formula of a skeleton.

        Segment ``n.j`` is the ``j``-th piece of the path into tree node ``n``: it starts with clock
        ``a{n}.{j}``, lasts ``d{n}.{j}`` and ends with clock ``b{n}.{j}``. Its region set is given by
        the 0/1 variables ``s{n}.{j}.{nt}.{i}``; side effects of the path must lie in it.
        '''
        tree = check_tree(self.model, skeleton.tree, targets)
        nodes = list(tree.nodes())
        if len(skeleton.reds) != len(nodes):
            raise SkeletonError(f'{len(skeleton.reds)} red chains for {len(nodes)} tree nodes')
        tau = Var('tau')
        parts: List[Formula] = [ge(tau, 0)]
        n_iv = len(self.intervals)

        def region_bits(seg):
            return [self.region_var(seg, r) for r in self.regions]

        def enable_for(seg):
            def enable(e):
                sibling = self._sibling(e)
                if sibling is None:
                    return None
                return eq(self.region_var(seg, Region(sibling, e.src[1])), 1)
            return enable

        counter = iter(range(len(nodes)))

        def visit(node: AncestorTree, start: str, clock: Term, elapsed: Term) -> str:
            n = next(counter)
            reds = skeleton.reds[n]
            nt = start
            for j in range(len(reds) + 1):
                seg = f'{n}.{j}'
                a = clock
                d = Var(f'd{seg}')
                last = j == len(reds)
                end_nt = node.nt if last else self.model.rules[reds[j].rule].lhs
                b = Const(0) if last and node.is_leaf else Var(f'b{seg}')
                parts.extend(conj(ge(s, 0), le(s, 1)) for s in region_bits(seg))
                parts.append(path_formula(
                    self.nfa, [(nt, i) for i in range(n_iv)], [(end_nt, i) for i in range(n_iv)],
                    a, d, b, prefix=f'p{seg}.', enable=enable_for(seg), tally=Var(f'p{seg}.spawns', True),
                ))
                elapsed = elapsed + d
                if last:
                    break
                red = reds[j]
                rule = self.model.rules[red.rule]
                sibling = rule.rhs[1 - red.side]
                parts.append(guard_formula(rule.guard, b))
                parts.append(van_to_formula(self.van, sibling, b, tau - elapsed))
                marks = [Var(f'm{seg}.{i}', True) for i in range(n_iv)]
                parts.append(eq(total(marks), 1))
                for i, m in enumerate(marks):
                    parts.append(conj(ge(m, 0), le(m, 1)))
                    parts.append(disj(eq(m, 0), self.intervals.membership(b, i)))
                nxt = f'{n}.{j + 1}'
                for r in self.regions:
                    change = self.region_var(seg, r) - self.region_var(nxt, r)
                    parts.append(eq(change, marks[r.interval] if r.nt == sibling else 0))
                nt = rule.rhs[red.side]
                clock = b
            seg = f'{n}.{len(reds)}'
            if node.is_leaf:
                parts.append(eq(elapsed, tau))
                for r in self.regions:
                    if r not in self.instant:
                        parts.append(eq(self.region_var(seg, r), 0))
                return f'{n}.0'
            rule = self.model.rules[node.rule]
            b = Var(f'b{seg}')
            parts.append(guard_formula(rule.guard, b))
            child_clock = Const(0) if rule.resets else b
            firsts = [visit(child, y, child_clock, elapsed) for y, child in zip(rule.rhs, node.children)]
            for r in self.regions:
                mine = self.region_var(seg, r)
                kids = [self.region_var(f, r) for f in firsts]
                parts.extend(ge(mine, k) for k in kids)
                parts.append(le(mine, total(kids)))
            return f'{n}.0'

        visit(tree, initial, Const(0), Const(0))
        return conj(*parts)

    def witness(self, skeleton: Skeleton, valuation: Dict[str, Fraction]) -> dict:
        chains: Dict[str, List[str]] = {}
        for n, reds in enumerate(skeleton.reds):
            for j in range(len(reds) + 1):
                seg = f'{n}.{j}'
                chains[seg] = [str(r) for r in self.regions if valuation.get(self.region_var(seg, r).name) == 1]
        spawns = sum(int(valuation.get(f'p{seg}.spawns', 0)) for seg in chains)
        blue = sum(1 for node in skeleton.tree.nodes() if not node.is_leaf)
        return {
            **skeleton.to_dict(), **_valuation_witness(valuation, self.scale),
            'regionChains': chains, 'branchings': spawns + skeleton.red_count + blue,
        }


def _compositions(total_: int, parts: int, bound: int):
    '''Tuples of ``parts`` numbers in ``[0, bound]`` summing to ``total_``.'''
    if parts == 0:
        if total_ == 0:
            yield ()
        return
    for k in range(min(total_, bound) + 1):
        for rest in _compositions(total_ - k, parts - 1, bound):
            yield (k,) + rest


def reach_witness_formula(model: TbppModel, initial: str, targets: Sequence[str], skeleton: Skeleton) -> Formula:
    '''The witness formula of ``skeleton`` for a normalized 1-clock model.'''
    return ReachEncoder(model).formula(initial, targets, skeleton)


def materialize(model: TbppModel, query: Query, witness: dict) -> Optional[TreeNode]:
    '''
    A derivation tree for a reachability witness, checked with
    :func:`~tbpp.semantics.check_derivation_tree`; ``None`` if none was found.

    The explorer searches up to the witness's time ``tau``, first on the grid of the witness's times
    and then on that grid refined by the explorer's default granularity. It may keep as many
    processes alive as the witness has branchings.
    '''
    values = [Fraction(witness.get('tau', 0))]
    values += [Fraction(v) for key in ('durations', 'clocks') for v in witness.get(key, {}).values()]
    denominator = lcm(1, *(v.denominator for v in values))
    fine = lcm(denominator, default_granularity(model, query).denominator)
    base = max(len(query.targets) + 2, 3)
    wide = max(base, witness.get('branchings', len(query.targets) + 2) + 3)
    attempts = dict.fromkeys([(denominator, base), (denominator, wide), (fine, wide)])
    for d, size in attempts:
        horizon = max(values[0], Fraction(1, d))
        found = explore_discretized(model, query, granularity=Fraction(1, d), horizon=horizon, max_size=size)
        if not found.is_sat:
            continue
        tree = run_to_tree(model, query.initial, found.witness)
        if check_derivation_tree(model, tree, query):
            return tree
    return None


def _validated(model: TbppModel, query: Query, verdict: Verdict) -> Verdict:
    '''The Sat verdict with its derivation tree, or ``Unknown`` if no tree could be built.'''
    tree = materialize(model, query, verdict.witness)
    if tree is None:
        logger.warning('Reachability witness could not be materialized into a derivation tree; answering unknown.')
        return Verdict.unknown('witness not materialized', **verdict.statistics)
    verdict.witness['validated'] = True
    verdict.witness['derivation'] = tree
    return verdict


def decide_reach(model: TbppModel, initial: str, targets: Sequence[str]) -> Verdict:
    '''
    Can ``(initial, 0)`` reach exactly the targets, all with clock 0?

    With no targets this is nonemptiness: ``(initial, 0)`` must vanish. Skeletons are tried by
    increasing number of red checkpoints; Sat witnesses are materialized into derivation trees.
    '''
    logger.info(f'Deciding reachability ({initial=}, {targets=}).')
    query = Query(Mode.reach if targets else Mode.nonempty, initial, tuple(targets))
    normalized = normalize_for_one_clock(model)
    if initial not in normalized.nonterminals:
        raise ModelError(f'undeclared nonterminal {initial}')
    if not targets:
        van = compute_van(normalized)
        at_zero = van[initial].at(0)
        if at_zero is None:
            return Verdict.unsat()
        tau = at_zero[0] + (1 if at_zero[1] else 0)
        return _validated(model, query, Verdict.sat({'tree': None, 'tau': tau}))

    encoder = ReachEncoder(normalized)
    unknown, tried = None, 0
    for skeleton in encoder.skeletons(initial, targets):
        if tried >= config.settings.skeleton_limit:
            logger.warning(f'Skeleton limit {config.settings.skeleton_limit} reached; answering unknown.')
            return Verdict.unknown('skeleton limit reached', skeletons=tried)
        tried += 1
        verdict = decide(encoder.formula(initial, targets, skeleton))
        if verdict.is_sat:
            logger.debug(f'Reachability skeleton {tried} satisfiable ({skeleton.red_count} red checkpoints).')
            result = Verdict.sat(encoder.witness(skeleton, verdict.witness), skeletons=tried, **verdict.statistics)
            return _validated(model, query, result)
        if verdict.answer is Answer.Unknown:
            unknown = verdict.reason
    logger.debug(f'Reachability exhausted {tried} skeletons.')
    if unknown:
        return Verdict.unknown(unknown, skeletons=tried)
    return Verdict.unsat(skeletons=tried)


def decide_query(model: TbppModel, query: Query) -> Verdict:
    '''Dispatch a query on a 1-clock model to its decision procedure.'''
    if query.mode is Mode.ternary:
        return decide_ternary(model, query.initial, query.targets[0], query.u, query.v, query.delta)
    if query.mode is Mode.simple_cover:
        return decide_simple_cover(model, query.initial, query.targets)
    if query.mode is Mode.cover:
        return decide_cover(model, query.initial, query.targets)
    return decide_reach(model, query.initial, query.targets)


def query_formula(model: TbppModel, query: Query) -> Formula:
    '''
    The linear arithmetic formula behind a 1-clock query.

    Coverability and reachability formulas are the disjunction over the ancestor trees, respectively
    skeletons, that :func:`decide_cover` and :func:`decide_reach` would try, up to
    ``Settings.skeleton_limit``. Nonemptiness has no formula; it is read off the vanishing predicates.
    '''
    limit = config.settings.skeleton_limit
    if query.mode is Mode.ternary:
        u, v, delta = Fraction(query.u), Fraction(query.v), Fraction(query.delta)
        k = lcm(u.denominator, v.denominator, delta.denominator)
        scaled = scale_model(model, k)
        nfa = build_tick_nfa(scaled, build_intervals(scaled.constants())).deduplicated()
        return phi_xy(nfa, query.initial, query.targets[0], u * k, delta * k, v * k)
    normalized = normalize_for_one_clock(model)
    if query.mode is Mode.simple_cover:
        nfa, _ = _ta_nfa(normalized)
        return phi_xy(nfa, query.initial, query.targets[0], 0, 'tau', 0)
    if query.mode is Mode.cover:
        if not query.targets:
            return conj()
        nfa, _ = _ta_nfa(normalized)
        trees = islice(ancestor_trees(normalized, query.initial, query.targets), limit)
        return disj(*(cover_formula(normalized, query.initial, tree, nfa) for tree in trees))
    if not query.targets:
        raise ModelError('nonemptiness is decided on the vanishing predicates and has no formula')
    encoder = ReachEncoder(normalized)
    skeletons = islice(encoder.skeletons(query.initial, query.targets), limit)
    return disj(*(encoder.formula(query.initial, query.targets, s) for s in skeletons))
