from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tbpp.bench import gen_countdown
from tbpp.executor import dispatch
from tbpp.model import Atom, Guard, Mode, ModelError, Query, parse_model
from tbpp.multiclock import (
    Dbm, GameMode, build_simple_reach_game, decide_cover_multi, decide_reach_multi, decide_ternary_zones,
    reduce_reach_to_simple, ta_reach,
)
from tbpp.multiclock.zones import product_with_global_clock
from tbpp.semantics import check_derivation_tree, explore_discretized, initial_configuration, replay, satisfies
from tbpp.ta1 import decide_ternary
from tbpp.tbpp1 import decide_cover, decide_simple_cover
from tbpp.verdict import Answer

clocks = ('x', 'y')


def test_dbm_zero_and_up():
    zero = Dbm.zero(clocks)
    assert zero.contains({'x': 0, 'y': 0})
    assert not zero.contains({'x': 1, 'y': 0})
    up = zero.up()
    assert up.contains({'x': Fraction(5, 2), 'y': Fraction(5, 2)})
    assert not up.contains({'x': 2, 'y': 1})
    assert up.includes(zero)
    assert not zero.includes(up)


def test_dbm_guard_and_reset():
    zone = Dbm.zero(clocks).up().intersect_guard(Guard((Atom('x', '<=', 3),)))
    assert zone.contains({'x': 3, 'y': 3})
    assert not zone.contains({'x': 4, 'y': 4})
    reset = zone.apply_assignment([('x', 0)])
    assert reset.contains({'x': 0, 'y': 2})
    assert not reset.contains({'x': 1, 'y': 2})
    assert Dbm.zero(clocks).intersect_guard(Guard((Atom('x', '>=', 1),))).is_empty()


def test_dbm_copy_assignment():
    zone = Dbm.point({'x': 1, 'y': 2}).apply_assignment([('x', 'y')])
    assert zone.contains({'x': 2, 'y': 2})
    assert not zone.contains({'x': 1, 'y': 2})


def test_dbm_extrapolate():
    zone = Dbm.universe(clocks).intersect_guard(Guard((Atom('x', '=', 10),)))
    assert not zone.contains({'x': 4, 'y': 0})
    wide = zone.extrapolate(3)
    assert wide.contains({'x': 4, 'y': 0})
    assert wide.contains({'x': 100, 'y': 0})
    assert not wide.contains({'x': 3, 'y': 0})
    assert wide.includes(zone)


def test_dbm_to_dict():
    zone = Dbm.zero(('x',)).up().intersect_guard(Guard((Atom('x', '<', 2),)))
    assert ['x', '0', '<', 2] in zone.to_dict()['bounds']
    assert str(Dbm.zero(('x',)).intersect_guard(Guard((Atom('x', '>', 0),)))) == 'false'


atoms = st.builds(
    Atom,
    st.sampled_from(clocks),
    st.sampled_from(['<', '<=', '=', '>=', '>']),
    st.integers(min_value=0, max_value=4),
)
values = st.fractions(min_value=0, max_value=5, max_denominator=2)


@settings(max_examples=200, deadline=None)
@given(st.lists(atoms, max_size=4), values, values)
def test_dbm_matches_guard(guard_atoms, a, b):
    guard = Guard(tuple(guard_atoms))
    zone = Dbm.universe(clocks).intersect_guard(guard)
    point = {'x': a, 'y': b}
    assert zone.contains(point) == guard.holds(point)
    if not zone.is_empty():
        assert zone.normalize() == zone


def test_ta_reach_global_clock(subset_sum):
    product, g = product_with_global_clock(subset_sum)
    verdict = ta_reach(product, 'X0', {}, 'X2', Guard((Atom('x', '=', 0), Atom(g, '=', 3))))
    assert verdict.is_sat
    assert verdict.witness['rules'] == [1, 3]
    assert ta_reach(product, 'X0', {}, 'X2', Guard((Atom('x', '=', 0), Atom(g, '=', 4)))).is_unsat


def test_ta_reach_rejects_branching(example):
    with pytest.raises(ModelError):
        ta_reach(example, 'X', {}, 'Y')


@pytest.mark.parametrize('delta', [0, 1, 2, 3, 4, Fraction(7, 2)])
def test_ternary_zones_agree(subset_sum, delta):
    zones = decide_ternary_zones(subset_sum, 'X0', 'X2', 0, 0, delta)
    assert zones.answer == decide_ternary(subset_sum, 'X0', 'X2', 0, 0, delta).answer


def test_ternary_zones_run(subset_sum):
    verdict = decide_ternary_zones(subset_sum, 'X0', 'X2', 0, Fraction(1, 2), Fraction(7, 2))
    assert verdict.is_sat
    assert verdict.witness['run'].duration == Fraction(7, 2)


def test_cover_multi_example(example):
    verdict = decide_cover_multi(example, 'X', ['Y'])
    assert verdict.is_sat
    end = replay(example, initial_configuration(example, 'X'), verdict.witness['run'])
    assert satisfies(end, Query(Mode.cover, 'X', ('Y',)))
    assert decide_cover_multi(example, 'X', ['Y', 'Z']).is_sat
    assert decide_cover_multi(example, 'X', ['Y', 'Y']).is_unsat
    assert decide_cover_multi(example, 'X', []).is_sat


def test_cover_multi_two_clocks():
    model = parse_model('clocks x y; nonterminals X T; rule X [x = 1, y = 1] {x := 0, y := 0} -> T;')
    verdict = decide_cover_multi(model, 'X', ['T'])
    assert verdict.is_sat
    assert verdict.witness['run'].duration == 1
    model = parse_model('clocks x y; nonterminals X T; rule X [x = 1] {x := 0} -> T;')
    assert decide_cover_multi(model, 'X', ['T']).is_unsat


def test_cover_multi_bounded_configurations():
    model = parse_model('''
        clocks x y;
        nonterminals X A B;
        rule X [x = 0] -> X A;
        rule X [y = 1] {x := 0, y := 0} -> B;
        rule A [x >= 1] {x := 0, y := 0} -> A A;
    ''')
    targets = ['A', 'B']
    verdict = decide_cover_multi(model, 'X', targets)
    assert verdict.is_sat
    assert verdict.statistics['largest'] <= len(targets) + 2


def test_reduce_reach_to_simple(example):
    assert reduce_reach_to_simple(example, 'X', ['Y']).kind == 'identity'
    dummy = reduce_reach_to_simple(example, 'X', [])
    assert dummy.kind == 'dummy'
    assert dummy.target in dummy.model.nonterminals
    bounded = reduce_reach_to_simple(example, 'X', ['Y', 'Z'])
    assert bounded.kind == 'bounded'
    assert all(len(beta) <= 4 for beta in bounded.multisets.values())
    assert ('X',) in bounded.multisets.values()


def test_reach_game_states(example):
    game = build_simple_reach_game(example, 'X', 'Y')
    assert game.initial.owner == 'min'
    assert game.initial in game.states
    assert game.to_dict()['states']


def test_reach_multi_example(example):
    # Z [x > 0] is open, so losing the integer game proves nothing for dense time
    verdict = decide_reach_multi(example, 'X', ['Y'])
    assert verdict.answer is Answer.Unknown
    assert verdict.statistics['completeness'] == 'sound-positive'


def test_reach_multi_closed_guards_unsat():
    model = parse_model('clocks x; nonterminals X Y Z; rule X [x = 0] -> Y Z; rule Z [x >= 1] -> ;')
    verdict = decide_reach_multi(model, 'X', ['Y'])
    assert verdict.is_unsat
    assert verdict.statistics['completeness'] == 'complete'


def test_reach_multi_open_guard_off_the_grid():
    # Z can only vanish strictly between 0 and 1, which the integer grid never visits
    model = parse_model('''
        clocks x y;
        nonterminals X Y Z;
        rule X [x = 0] -> Y Z;
        rule Z [x > 0, x < 1] -> ;
        rule Y [x = 1] {x := 0, y := 0} -> Y;
    ''')
    query = Query(Mode.reach, 'X', ('Y',))
    assert explore_discretized(model, query).is_sat
    verdict = decide_reach_multi(model, 'X', ['Y'])
    assert verdict.is_sat
    assert verdict.witness['validated']
    assert check_derivation_tree(model, verdict.witness['derivation'], query)
    assert dispatch(model, query).is_sat


def test_reach_multi_sat_is_validated():
    model = parse_model('''
        clocks x y;
        nonterminals X X2 X3 Y Z;
        rule X [x = 0] -> X2 Z;
        rule X2 [x = 0] -> X3 Z;
        rule X3 [x = 0] -> Y Z;
        rule Z [x >= 1] -> ;
        rule Y [x = 1] {x := 0, y := 0} -> Y;
    ''')
    verdict = decide_reach_multi(model, 'X', ['Y'])
    assert verdict.answer is not Answer.Unsat
    if verdict.is_sat:
        assert verdict.witness['validated']
        assert check_derivation_tree(model, verdict.witness['derivation'], Query(Mode.reach, 'X', ('Y',)))

def test_reach_multi_with_delay():
    model = parse_model('''
        clocks x;
        nonterminals X Y Z;
        rule X [x = 0] -> Y Z;
        rule Z [x > 0] -> ;
        rule Y [x = 1] {x := 0} -> Y;
    ''')
    verdict = decide_reach_multi(model, 'X', ['Y'])
    assert verdict.is_sat
    assert verdict.witness['validated']


def test_reach_multi_dense_attempt():
    model = parse_model('clocks x; nonterminals X Y Z; rule X [x = 0] -> Y Z; rule Z [x = 0] -> ;')
    verdict = decide_reach_multi(model, 'X', ['Y'], mode=GameMode.dense)
    assert verdict.is_sat


@pytest.mark.slow
@pytest.mark.parametrize('k, expected', [(4, True), (3, False)])
def test_reach_multi_countdown(k, expected):
    instance = gen_countdown(['p'], [('p', 2, 'p')], k)
    assert instance.ground_truth == expected
    verdict = decide_reach_multi(instance.model, instance.query.initial, instance.query.targets)
    assert verdict.answer is (Answer.Sat if expected else Answer.Unsat)


@st.composite
def one_clock_models(draw):
    names = ['X', 'Y', 'Z']
    rules = []
    for _ in range(draw(st.integers(1, 4))):
        lhs = draw(st.sampled_from(names))
        rhs = draw(st.lists(st.sampled_from(names), max_size=2))
        guard = ''
        if draw(st.booleans()):
            guard = f'[x {draw(st.sampled_from(["=", "<=", ">=", "<", ">"]))} {draw(st.integers(0, 2))}] '
        reset = '{x := 0} ' if rhs and draw(st.booleans()) else ''
        rules.append(f'rule {lhs} {guard}{reset}-> {" ".join(rhs)};')
    return parse_model(f'clocks x; nonterminals {" ".join(names)}; {" ".join(rules)}')


@pytest.mark.slow
@settings(max_examples=25, deadline=None)
@given(model=one_clock_models(), targets=st.lists(st.sampled_from(['X', 'Y', 'Z']), min_size=1, max_size=2))
def test_cover_agrees_with_zones(model, targets):
    zones = decide_cover_multi(model, 'X', targets)
    formula = decide_cover(model, 'X', targets)
    if Answer.Unknown not in (zones.answer, formula.answer):
        assert zones.answer is formula.answer
    if len(targets) == 1:
        simple = decide_simple_cover(model, 'X', targets[0])
        if Answer.Unknown not in (simple.answer, formula.answer):
            assert simple.answer is formula.answer
