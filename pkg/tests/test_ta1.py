from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from tbpp.bench import gen_subsetsum_ta
from tbpp.la import Var, conj, decide, eq
from tbpp.model import parse_model
from tbpp.multiclock import decide_ternary_zones
from tbpp.ta1 import (
    IntervalSet, Nfa, NfaError, build_intervals, build_tick_nfa, decide_ternary, parikh_formula, phi_xy,
)


def test_interval_set():
    iv = build_intervals({0, 2})
    assert len(iv) == 4
    assert [str(i) for i in iv] == ['{0}', '(0,2)', '{2}', '(2,inf)']
    assert len(IntervalSet({0})) == 2
    assert len(IntervalSet({0, 1, 3})) == 6
    assert iv.index_of(0) == 0
    assert iv.index_of(Fraction(1, 2)) == 1
    assert iv.index_of(2) == 2
    assert iv.index_of(7) == 3
    with pytest.raises(ValueError):
        iv.index_of(-1)


def test_tick_edge_for_reset():
    ta = parse_model('clocks x; nonterminals X Y; rule X [x = 1] {x := 0} -> Y;')
    nfa = build_tick_nfa(ta, build_intervals(ta.constants()))
    ticks = [e for e in nfa.edges if e.kind == 'tick']
    assert len(ticks) == 1
    assert ticks[0].src == ('X', 2)
    assert ticks[0].dst == ('Y', 0)
    assert ticks[0].interval == 2


def test_eps_edge_per_interval():
    ta = parse_model('clocks x; nonterminals X Y; rule X -> Y;')
    nfa = build_tick_nfa(ta, build_intervals({0, 2}))
    assert len([e for e in nfa.edges if e.kind == 'eps']) == 4
    assert all(e.src[1] == e.dst[1] for e in nfa.edges if e.kind == 'eps')


def test_rule_free_automaton_has_only_tau_edges():
    ta = parse_model('clocks x; nonterminals X;')
    nfa = build_tick_nfa(ta, build_intervals({0, 1}))
    assert {e.kind for e in nfa.edges} == {'tau'}
    assert len(nfa.edges) == 3


def test_branching_rules_are_rejected(example):
    with pytest.raises(NfaError):
        build_tick_nfa(example, build_intervals({0}))


def test_parikh_path():
    nfa = Nfa.of([('c', 'a', 'm'), ('m', 'b', 'd')])
    f = parikh_formula(nfa, 'c', 'd')
    z0, z1 = Var('z0', True), Var('z1', True)
    assert decide(conj(f, eq(z0, 1), eq(z1, 1))).is_sat
    assert decide(conj(f, eq(z0, 2))).is_unsat
    assert decide(conj(f, eq(z0, 0))).is_unsat


def test_parikh_loops():
    nfa = Nfa.of([('c', 'a', 'c'), ('c', 'b', 'c')])
    f = parikh_formula(nfa, 'c', 'c')
    z0, z1 = Var('z0', True), Var('z1', True)
    for a, b in [(0, 0), (3, 0), (2, 5)]:
        assert decide(conj(f, eq(z0, a), eq(z1, b))).is_sat


def test_parikh_disconnected():
    nfa = Nfa.of([('c', 'a', 'c'), ('d', 'b', 'd')])
    assert decide(parikh_formula(nfa, 'c', 'd')).is_unsat


def test_phi_time_only():
    ta = parse_model('clocks x; nonterminals X;')
    nfa = build_tick_nfa(ta, build_intervals(ta.constants()))
    f = phi_xy(nfa, 'X', 'X')
    at = conj(eq(Var('x'), Fraction(1, 2)), eq(Var('t'), 1))
    assert decide(conj(f, at, eq(Var("x'"), Fraction(3, 2)))).is_sat
    assert decide(conj(f, at, eq(Var("x'"), 2))).is_unsat


def test_phi_projected_example():
    ta = parse_model('clocks x; nonterminals X Y Z; rule X [x = 0] -> Y; rule X [x = 0] -> Z;')
    nfa = build_tick_nfa(ta, build_intervals(ta.constants()))
    f = phi_xy(nfa, 'X', 'Y', 0, 't', "x'")
    assert decide(conj(f, eq(Var('t'), 2), eq(Var("x'"), 2))).is_sat
    assert decide(conj(f, eq(Var('t'), 2), eq(Var("x'"), 1))).is_unsat
    assert decide(phi_xy(nfa, 'Y', 'X', 0, 't', "x'")).is_unsat


@pytest.mark.parametrize('delta, expected', [(3, True), (2, True), (1, True), (0, True), (4, False)])
def test_decide_ternary(subset_sum, delta, expected):
    verdict = decide_ternary(subset_sum, 'X0', 'X2', 0, 0, delta)
    assert verdict.is_sat == expected
    assert verdict.is_unsat != expected


def test_decide_ternary_unmerged(subset_sum):
    assert decide_ternary(subset_sum, 'X0', 'X2', 0, 0, 3, merged=False).is_sat
    assert decide_ternary(subset_sum, 'X0', 'X2', 0, 0, 4, merged=False).is_unsat


def test_decide_ternary_empty_run(subset_sum):
    assert decide_ternary(subset_sum, 'X1', 'X1', Fraction(1, 2), Fraction(1, 2), 0).is_sat
    assert decide_ternary(subset_sum, 'X1', 'X1', Fraction(1, 2), Fraction(3, 4), Fraction(1, 4)).is_sat
    assert decide_ternary(subset_sum, 'X1', 'X1', Fraction(1, 2), Fraction(1, 4), 0).is_unsat


def test_decide_ternary_rational_delta(subset_sum):
    # X2 is entered at time 3, then half a time unit passes
    assert decide_ternary(subset_sum, 'X0', 'X2', 0, Fraction(1, 2), Fraction(7, 2)).is_sat
    assert decide_ternary(subset_sum, 'X0', 'X2', 0, 0, Fraction(7, 2)).is_unsat


def test_deduplicated_drops_repeated_edges():
    ta = parse_model('clocks x; nonterminals X Y; rule X -> Y; rule X -> Y; rule Y -> Y;')
    nfa = build_tick_nfa(ta, build_intervals({0, 2}))
    dedup = nfa.deduplicated()
    eps = [e for e in dedup.edges if e.kind == 'eps']
    assert len(eps) == 4
    assert all(e.src[0] == 'X' for e in eps)
    assert len([e for e in dedup.edges if e.kind == 'tau']) == len([e for e in nfa.edges if e.kind == 'tau'])
    assert len(nfa.deduplicated(key=lambda e: e.rule).edges) == len(dedup.edges) + 4


SELF_LOOPS = '''
    clocks x;
    nonterminals L0;
    rule L0 -> L0;
    rule L0 -> L0;
    rule L0 -> L0;
    rule L0 [x >= 3] {x := 0} -> L0;
'''


def test_ternary_with_self_loops():
    ta = parse_model(SELF_LOOPS)
    args = ('L0', 'L0', 5, Fraction(4, 3), 0)
    assert decide_ternary(ta, *args).is_unsat
    assert decide_ternary_zones(ta, *args).is_unsat
    assert decide_ternary(ta, 'L0', 'L0', 5, Fraction(4, 3), Fraction(4, 3)).is_sat


def test_ternary_subset_sum_four_items():
    instance = gen_subsetsum_ta([1, 2, 3, 4], 11)
    assert not instance.ground_truth
    q = instance.query
    assert decide_ternary(instance.model, q.initial, q.targets[0], 0, 0, q.delta).is_unsat
    instance = gen_subsetsum_ta([1, 2, 3, 4], 9)
    assert decide_ternary(instance.model, q.initial, q.targets[0], 0, 0, instance.query.delta).is_sat


HALVES = st.sampled_from([Fraction(k, 2) for k in range(5)])


@st.composite
def one_clock_automata(draw):
    names = ['L0', 'L1', 'L2']
    rules = []
    for _ in range(draw(st.integers(0, 4))):
        lhs, rhs = draw(st.sampled_from(names)), draw(st.sampled_from(names))
        guard = ''
        if draw(st.booleans()):
            guard = f'[x {draw(st.sampled_from(["=", "<=", ">=", "<", ">"]))} {draw(st.integers(0, 2))}] '
        reset = '{x := 0} ' if draw(st.booleans()) else ''
        rules.append(f'rule {lhs} {guard}{reset}-> {rhs};')
    return parse_model(f'clocks x; nonterminals {" ".join(names)}; {" ".join(rules)}')


@pytest.mark.slow
@settings(max_examples=25, deadline=None)
@given(ta=one_clock_automata(), target=st.sampled_from(['L0', 'L1', 'L2']), u=HALVES, v=HALVES, delta=HALVES)
def test_ternary_agrees_with_zones(ta, target, u, v, delta):
    expected = decide_ternary_zones(ta, 'L0', target, u, v, delta)
    verdict = decide_ternary(ta, 'L0', target, u, v, delta)
    assert verdict.answer is expected.answer


def _parikh_vectors(triples, c, d, length):
    '''Parikh vectors of the paths from c to d with at most ``length`` edges.'''
    out, layer = set(), {(c, (0,) * len(triples))}
    for _ in range(length + 1):
        out |= {p for q, p in layer if q == d}
        layer = {
            (b, p[:i] + (p[i] + 1,) + p[i + 1:])
            for q, p in layer for i, (a, _, b) in enumerate(triples) if a == q
        }
    return out


@pytest.mark.slow
@settings(max_examples=20, deadline=None)
@given(
    triples=st.lists(st.tuples(st.integers(0, 2), st.sampled_from('ab'), st.integers(0, 2)), min_size=1, max_size=4),
    data=st.data(),
)
def test_parikh_agrees_with_enumeration(triples, data):
    nfa = Nfa.of(triples)
    c, d = data.draw(st.sampled_from(nfa.states)), data.draw(st.sampled_from(nfa.states))
    f = parikh_formula(nfa, c, d)
    realized = _parikh_vectors(triples, c, d, 2)
    z = [Var(f'z{i}', True) for i in range(len(triples))]
    for vector in product(range(3), repeat=len(triples)):
        if sum(vector) > 2:
            continue
        verdict = decide(conj(f, *(eq(v, k) for v, k in zip(z, vector))))
        assert verdict.is_sat == (vector in realized), vector
