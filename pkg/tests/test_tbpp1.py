from fractions import Fraction

import pytest

from tbpp import tbpp1
from tbpp.bench import gen_subsetsum_tbpp
from tbpp.la import decide
from tbpp.model import Mode, ModelError, Query, parse_model
from tbpp.semantics import check_derivation_tree
from tbpp.tbpp1 import (
    AncestorTree, ancestor_trees, decide_cover, decide_query, decide_reach, decide_simple_cover,
    normalize_for_one_clock, projection, query_formula,
)
from tbpp.verdict import Answer


def test_projection(example):
    proj, origin = projection(example)
    assert [r.rhs for r in proj.rules] == [('Y',), ('Z',)]
    assert origin == [(0, 'Z'), (0, 'Y')]


def test_ancestor_trees(example):
    trees = list(ancestor_trees(example, 'X', ['Z', 'Y']))
    assert AncestorTree('X', 0, (AncestorTree('Y'), AncestorTree('Z'))) in trees
    assert list(ancestor_trees(example, 'X', ['Y', 'Y'])) == []
    tree = trees[0]
    assert AncestorTree.from_dict(tree.to_dict()) == tree
    assert sorted(tree.leaves()) == ['Y', 'Z']


def test_cover_example(example):
    verdict = decide_cover(example, 'X', ['Y'])
    assert verdict.is_sat
    assert verdict.witness['tree'] == {'nt': 'Y'}
    assert decide_cover(example, 'X', ['Y', 'Z']).is_sat
    assert decide_cover(example, 'X', ['Y', 'Y']).is_unsat
    assert decide_cover(example, 'X', []).is_sat


def test_simple_cover(example):
    assert decide_simple_cover(example, 'X', 'Y').is_sat
    assert decide_simple_cover(example, 'Y', 'X').is_unsat
    with pytest.raises(ModelError):
        decide_simple_cover(example, 'X', ('Y', 'Z'))


def test_simple_cover_needs_clock_zero():
    model = parse_model('clocks x; nonterminals X Y; rule X [x = 1] -> Y;')
    assert decide_simple_cover(model, 'X', 'Y').is_unsat
    model = parse_model('clocks x; nonterminals X Y; rule X [x = 1] {x := 0} -> Y;')
    verdict = decide_simple_cover(model, 'X', 'Y')
    assert verdict.is_sat
    assert verdict.witness['tau'] == 1


def test_reach_example(example):
    assert decide_reach(example, 'X', ['Y']).is_unsat


def test_reach_with_instant_vanishing():
    model = parse_model('clocks x; nonterminals X Y Z; rule X [x = 0] -> Y Z; rule Z [x = 0] -> ;')
    verdict = decide_reach(model, 'X', ['Y'])
    assert verdict.is_sat
    assert verdict.witness['validated']


def test_nonempty():
    model = parse_model('clocks x; nonterminals X Z; rule X [x = 0] -> Z Z; rule Z [x > 0] -> ;')
    verdict = decide_reach(model, 'X', [])
    assert verdict.is_sat
    assert verdict.witness['tau'] == 1
    assert verdict.witness['validated']


def test_nonempty_example(example):
    assert decide_reach(example, 'X', []).is_unsat
    assert decide_reach(example, 'Z', []).is_sat


def test_normalize_for_one_clock():
    model = parse_model('clocks x; nonterminals X Y Z; rule X [x = 0] {x := 0} -> Y Z; rule Y {x := x} -> Z;')
    normalized = normalize_for_one_clock(model)
    assert all(not r.assign for r in normalized.rules if r.is_branching)
    assert any(r.lhs == 'Y' and r.assign == () for r in normalized.rules)


@pytest.mark.parametrize('t, expected', [(8, True), (3, True), (0, True), (4, False)])
def test_subset_sum_cover(t, expected):
    instance = gen_subsetsum_tbpp([3, 5], t)
    assert instance.ground_truth == expected
    verdict = decide_cover(instance.model, instance.query.initial, instance.query.targets)
    assert verdict.is_sat == expected


@pytest.mark.parametrize('t, expected', [(8, True), (4, False)])
def test_subset_sum_reach(t, expected):
    instance = gen_subsetsum_tbpp([3, 5], t)
    verdict = decide_reach(instance.model, instance.query.initial, instance.query.targets)
    assert verdict.is_sat == expected


def test_decide_query(example, subset_sum):
    assert decide_query(example, Query(Mode.cover, 'X', ('Y',))).is_sat
    assert decide_query(example, Query(Mode.reach, 'X', ('Y',))).is_unsat
    assert decide_query(example, Query(Mode.simple_cover, 'X', ('Y',))).is_sat
    assert decide_query(subset_sum, Query(Mode.ternary, 'X0', ('X2',), delta=Fraction(3))).is_sat


def test_query_formula(example, subset_sum):
    assert decide(query_formula(example, Query(Mode.cover, 'X', ('Y',)))).is_sat
    assert decide(query_formula(example, Query(Mode.cover, 'X', ('Y', 'Y')))).is_unsat
    assert decide(query_formula(example, Query(Mode.simple_cover, 'X', ('Y',)))).is_sat
    assert decide(query_formula(subset_sum, Query(Mode.ternary, 'X0', ('X2',), delta=Fraction(3)))).is_sat
    assert decide(query_formula(subset_sum, Query(Mode.ternary, 'X0', ('X2',), delta=Fraction(4)))).is_unsat
    with pytest.raises(ModelError):
        query_formula(example, Query(Mode.nonempty, 'X'))


SPAWNING = '''
    clocks x;
    nonterminals X X2 X3 Y Z;
    rule X [x = 0] -> X2 Z;
    rule X2 [x = 0] -> X3 Z;
    rule X3 [x = 0] -> Y Z;
    rule Z [x >= 1] -> ;
    rule Y [x = 1] {x := 0} -> Y;
'''


def test_reach_witness_with_many_live_processes():
    model = parse_model(SPAWNING)
    verdict = decide_reach(model, 'X', ['Y'])
    assert verdict.is_sat
    assert verdict.witness['validated']
    assert check_derivation_tree(model, verdict.witness['derivation'], Query(Mode.reach, 'X', ('Y',)))


def test_reach_unmaterialized_witness_is_unknown(monkeypatch):
    monkeypatch.setattr(tbpp1, 'materialize', lambda *args: None)
    verdict = decide_reach(parse_model(SPAWNING), 'X', ['Y'])
    assert verdict.answer is Answer.Unknown
    assert verdict.reason == 'witness not materialized'
