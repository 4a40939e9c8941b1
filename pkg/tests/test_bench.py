import json
import random

import pytest

from tbpp.bench import (
    FAMILIES, Automaton, Grammar, Instance, Production, cfg_nfa_nonempty, corpus, countdown_winner, gen_cfg_nfa,
    gen_countdown, gen_ssg, gen_subsetsum_ta, gen_subsetsum_tbpp, has_subset_sum, random_cfg_nfa, random_countdown,
    random_ssg, run_corpus, ssg_winner,
)
from tbpp.executor import Executor, Methods, agreement, dispatch
from tbpp.file_reader import read_file, write_file
from tbpp.model import Mode
from tbpp.verdict import Answer

a_star = Automaton(1, 0, (0,), ((0, 'a', 0),))
a_b_plus = Automaton(2, 0, (1,), ((0, 'b', 1), (1, 'b', 1)))
a_loop = Grammar('S', (Production('S', 'a', ('S',)), Production('S')))


def test_has_subset_sum():
    assert has_subset_sum([3, 5], 8)
    assert has_subset_sum([3, 5], 0)
    assert not has_subset_sum([3, 5], 4)
    assert has_subset_sum([], 0)


def test_ssg_winner():
    assert ssg_winner([((1, 2), (0, 1))], 2)
    assert not ssg_winner([((1, 2), (0, 1))], 10)
    assert ssg_winner([], 0)
    assert not ssg_winner([], 1)


@pytest.mark.parametrize('k, expected', [(0, True), (4, True), (3, False), (6, True)])
def test_countdown_winner(k, expected):
    assert countdown_winner([('p', 2, 'p')], k, 'p') == expected


def test_countdown_winner_universal_choice():
    transitions = [('p', 1, 'q'), ('p', 1, 'r'), ('q', 1, 'q'), ('r', 2, 'r')]
    assert countdown_winner(transitions, 3, 'p')
    assert not countdown_winner(transitions, 2, 'p')


def test_cfg_nfa_nonempty():
    assert cfg_nfa_nonempty(a_loop, [a_star])
    assert not cfg_nfa_nonempty(a_loop, [a_b_plus])
    assert not cfg_nfa_nonempty(Grammar('S'), [a_star])


def test_gen_subsetsum_ta():
    instance = gen_subsetsum_ta([1, 2], 3)
    assert instance.ground_truth is True
    assert instance.model.clocks == ('x',)
    assert instance.model.nonterminals == ('X0', 'X1', 'X2')
    assert instance.query.mode is Mode.ternary
    assert instance.query.delta == 3
    assert len(instance.model.rules) == 4
    with pytest.raises(ValueError):
        gen_subsetsum_ta([0, 2], 1)


def test_gen_subsetsum_tbpp():
    instance = gen_subsetsum_tbpp([3, 5], 4)
    assert instance.ground_truth is False
    assert instance.query.mode is Mode.cover
    assert sorted(instance.query.targets) == ['X2', 'Y']
    assert 'reach-equivalent' in instance.tags


def test_gen_ssg():
    instance = gen_ssg([((1, 2), (0, 1))], 2)
    assert instance.ground_truth is True
    assert instance.query.mode is Mode.reach
    assert instance.query.targets == ('F',) * 3
    assert 'succinct' in instance.tags
    assert any(len(r.rhs) == 2 for r in instance.model.rules if r.lhs == 'A1')
    with pytest.raises(ValueError):
        gen_ssg([((1, 2), (0, 1))] * 5, 0)


def test_gen_countdown():
    instance = gen_countdown(['p', 'q', 'r', 's'], [('p', 1, 'q'), ('p', 1, 'r'), ('p', 1, 's')], 1)
    assert instance.model.clocks == ('x1', 'x2')
    assert instance.query.mode is Mode.nonempty
    assert all(len(r.rhs) <= 2 for r in instance.model.rules)
    assert len(instance.model.nonterminals) == 5
    assert instance.ground_truth is True
    with pytest.raises(ValueError):
        gen_countdown(['p'], [('p', 0, 'p')], 1)


def test_gen_cfg_nfa():
    instance = gen_cfg_nfa(a_loop, [a_star])
    assert instance.ground_truth is True
    assert len(instance.model.clocks) == 4
    assert instance.query.initial == '_start'
    assert gen_cfg_nfa(a_loop, [a_b_plus]).ground_truth is False
    same = gen_cfg_nfa(instance.params['grammar'], instance.params['automata'])
    assert same.model == instance.model
    with pytest.raises(ValueError):
        gen_cfg_nfa(Grammar('S', (Production('S', None, ('S',)),)), [a_star])


def test_instance_save_and_load(tmp_path):
    instance = gen_subsetsum_tbpp([3, 5], 8)
    sidecar = instance.save(tmp_path / 'i.tbpp')
    assert sidecar == tmp_path / 'i.json'
    with open(sidecar, 'r') as f:
        data = json.load(f)
    assert data == {'family': 'subsetsum-tbpp', 'params': {'S': [3, 5], 't': 8}, 'groundTruth': True,
                    'tags': ['reach-equivalent']}
    loaded = Instance.load(tmp_path / 'i.tbpp')
    assert loaded.model.to_text() == instance.model.to_text()
    assert loaded.query == instance.query
    assert loaded.ground_truth is True
    assert loaded.tags == instance.tags


def test_corpus_is_reproducible():
    first = corpus('subsetsum-ta', 5, seed=3)
    second = corpus('subsetsum-ta', 5, seed=3)
    assert [i.params_text for i in first] == [i.params_text for i in second]
    assert len(corpus('countdown', 2, seed=0)) == 2
    with pytest.raises(ValueError):
        corpus('nope', 1)


@pytest.mark.parametrize('family', sorted(FAMILIES))
def test_samplers_produce_instances(family):
    for instance in corpus(family, 3, seed=1):
        assert instance.family == family
        assert isinstance(instance.ground_truth, bool)


@pytest.mark.parametrize('instance', [
    gen_subsetsum_ta([1, 2], 3),
    gen_subsetsum_ta([1, 2], 4),
    gen_subsetsum_tbpp([3, 5], 8),
    gen_subsetsum_tbpp([3, 5], 4),
])
def test_dispatch_agrees_with_oracle(instance):
    verdict = dispatch(instance.model, instance.query)
    assert agreement(instance.ground_truth, verdict.answer)


@pytest.mark.slow
@pytest.mark.parametrize('instance', [
    gen_countdown(['p'], [('p', 2, 'p')], 2),
    gen_countdown(['p'], [('p', 2, 'p')], 3),
])
def test_dispatch_agrees_on_countdown(instance):
    verdict = dispatch(instance.model, instance.query)
    assert agreement(instance.ground_truth, verdict.answer)


def _small_instances(seed):
    rng = random.Random(seed)
    return [
        gen_countdown(*random_countdown(rng, states=2, label=3, k=6)),
        gen_ssg(*random_ssg(rng, rounds=2, largest=2)),
        gen_cfg_nfa(*random_cfg_nfa(rng, automata=1, states=2)),
    ]


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(4))
def test_dispatch_never_contradicts_oracle(seed):
    for instance in _small_instances(seed):
        verdict = dispatch(instance.model, instance.query)
        assert agreement(instance.ground_truth, verdict.answer) is not False, instance.params


def test_agreement():
    assert agreement(True, Answer.Sat) is True
    assert agreement(True, Answer.Unsat) is False
    assert agreement(False, Answer.Unsat) is True
    assert agreement(True, Answer.Unknown) is None
    assert agreement('solver', Answer.Sat) is None


def test_run_corpus(tmp_path):
    instances = [gen_subsetsum_ta([1, 2], 3), gen_subsetsum_ta([1, 2], 4), gen_subsetsum_tbpp([3, 5], 3)]
    results = run_corpus(instances, outfile=tmp_path / 'results.csv')
    assert list(results['index']) == [0, 1, 2]
    assert results['agrees'].all()
    table = read_file(tmp_path / 'results.csv')
    assert list(table.columns) == [
        'index', 'family', 'params', 'mode', 'clocks', 'ground_truth', 'answer', 'agrees', 'reason', 'seconds',
    ]
    assert list(table['answer']) == ['sat', 'unsat', 'sat']


def test_executor_thread_map():
    instances = [gen_subsetsum_ta([2], 2), gen_subsetsum_ta([2], 1)]
    results = Executor(Methods.ThreadMap).execute(instances)
    assert list(results['answer']) == ['sat', 'unsat']


def test_executor_records_failures():
    instance = gen_subsetsum_ta([2], 2)
    broken = Instance('subsetsum-ta', {}, gen_countdown(['p'], [('p', 1, 'p')], 1).model, instance.query, True)
    results = Executor().execute([broken])
    assert results['answer'][0] == 'unknown'
    assert results['agrees'][0] is None
    assert 'ternary' in results['reason'][0]


@pytest.mark.parametrize('suffix', ['.csv', '.json'])
def test_file_reader_round_trip(tmp_path, suffix):
    results = run_corpus([gen_subsetsum_ta([2], 2)])
    url = tmp_path / f'results{suffix}'
    write_file(results, url)
    table = read_file(url)
    assert len(table) == 1
    assert table['family'][0] == 'subsetsum-ta'
