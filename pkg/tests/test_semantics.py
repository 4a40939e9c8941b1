import pytest
from fractions import Fraction

from tbpp.model import Mode, Query, parse_model
from tbpp.semantics import (
    Elapse, Fire, Process, Run, SemanticsError, TreeNode, check_derivation_tree, configuration, elapse,
    explore_discretized, fire, initial_configuration, replay, run_to_tree, satisfies,
)

HALF = Fraction(1, 2)


def test_fire_and_elapse(example):
    c = initial_configuration(example, 'X')
    c = fire(c, 0, example.rules[0])
    assert c == configuration(Process.zero('Y', ['x']), Process.zero('Z', ['x']))
    c = elapse(c, HALF)
    assert c[1] == Process.of('Z', {'x': HALF})
    c = fire(c, 1, example.rules[1])
    assert c == (Process.of('Y', {'x': HALF}),)


def test_illegal_steps(example):
    c = initial_configuration(example, 'X')
    with pytest.raises(SemanticsError):
        elapse(c, -1)
    with pytest.raises(SemanticsError):
        fire(c, 1, example.rules[0])
    with pytest.raises(SemanticsError):
        fire(elapse(c, 1), 0, example.rules[0])
    with pytest.raises(SemanticsError):
        fire(c, 0, example.rules[1])


def test_replay_reports_failing_step(example):
    run = Run((Fire(0, 0), Fire(1, 1)))
    with pytest.raises(SemanticsError) as e:
        replay(example, initial_configuration(example, 'X'), run)
    assert e.value.step == 1


def test_satisfies(example):
    c = replay(example, initial_configuration(example, 'X'), Run((Fire(0, 0),)))
    assert satisfies(c, Query(Mode.cover, 'X', ('Y',)))
    assert not satisfies(c, Query(Mode.reach, 'X', ('Y',)))
    assert satisfies(c, Query(Mode.reach, 'X', ('Y', 'Z')))
    assert satisfies((), Query(Mode.nonempty, 'X'))


def test_run_json_and_compact():
    run = Run((Elapse(Fraction(0)), Fire(0, 0), Elapse(HALF), Elapse(HALF)))
    assert run.compact() == Run((Fire(0, 0), Elapse(Fraction(1))))
    assert Run.from_json(run.to_json()) == run
    assert run.duration == 1


def test_run_to_tree(example):
    cover = Query(Mode.cover, 'X', ('Y',))
    tree = run_to_tree(example, 'X', Run((Fire(0, 0),)))
    assert tree.rule == 0
    assert [c.nt for c in tree.children] == ['Y', 'Z']
    assert check_derivation_tree(example, tree, cover)
    assert TreeNode.from_dict(tree.to_dict()) == tree

    late = run_to_tree(example, 'X', Run((Fire(0, 0), Elapse(HALF), Fire(1, 1))))
    assert [n.nt for n in late.nodes() if n.is_survivor] == ['Y']
    assert not check_derivation_tree(example, late, Query(Mode.reach, 'X', ('Y',)))


def test_tree_with_wrong_valuation_is_rejected(example):
    tree = TreeNode('X', (('x', Fraction(0)),), Fraction(0), 0, (
        TreeNode('Y', (('x', Fraction(0)),), Fraction(0)),
        TreeNode('Z', (('x', Fraction(1)),), Fraction(0)),
    ))
    assert not check_derivation_tree(example, tree, Query(Mode.cover, 'X', ('Y',)))


def test_explorer_finds_cover_witness(example):
    query = Query(Mode.cover, 'X', ('Y',))
    verdict = explore_discretized(example, query)
    assert verdict.is_sat
    assert satisfies(replay(example, initial_configuration(example, 'X'), verdict.witness), query)


def test_explorer_is_inconclusive_on_unreachable_target(example):
    verdict = explore_discretized(example, Query(Mode.reach, 'X', ('Y',)), granularity=HALF, max_steps=200, horizon=2)
    assert not verdict.is_sat
    assert not verdict.is_unsat


def test_explorer_ternary(subset_sum):
    query = Query(Mode.ternary, 'X0', ('X2',), delta=Fraction(3))
    verdict = explore_discretized(subset_sum, query, granularity=1)
    assert verdict.is_sat
    assert verdict.witness.duration == 3


def test_explorer_keeps_earlier_visits():
    # (Y, 0) is met after one time unit before it is met at time 0; only the latter reaches T
    model = parse_model('''
        clocks x;
        nonterminals X A B Y T;
        rule X [x = 1] {x := 0} -> Y;
        rule X [x = 0] -> A;
        rule A [x = 0] -> B;
        rule B [x = 0] -> Y;
        rule Y [x = 1] {x := 0} -> T;
    ''')
    query = Query(Mode.reach, 'X', ('T',))
    verdict = explore_discretized(model, query, granularity=1, horizon=1)
    assert verdict.is_sat
    assert verdict.witness.duration == 1
    assert satisfies(replay(model, initial_configuration(model, 'X'), verdict.witness), query)
