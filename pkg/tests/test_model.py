import pytest
from fractions import Fraction

from tbpp import config
from tbpp.model import (
    Atom, Guard, Mode, ModelError, Query, Rule, TbppModel, desugar_constant_updates, normalize_branching_resets,
    parse_document, parse_model, project_to_ta, reachable_nonterminals, require_one_clock, validate_query,
)


def test_parse_example(example_text):
    model, query = parse_document(example_text)
    assert model.clocks == ('x',)
    assert model.nonterminals == ('X', 'Y', 'Z')
    assert model.rules[0] == Rule('X', Guard((Atom('x', '=', 0),)), (), ('Y', 'Z'))
    assert model.rules[1].is_vanishing
    assert model.rules[1].guard.atoms == (Atom('x', '>', 0),)
    assert query == Query(Mode.cover, 'X', ('Y',))
    assert model.max_constant == 0


def test_pretty_printer_round_trip(example_text):
    model, query = parse_document(example_text)
    assert parse_document(model.to_text(query)) == (model, query)


def test_json_round_trip(example, tmp_path):
    url = tmp_path / 'model.json'
    example.save(url)
    assert TbppModel.load(url) == example


def test_ternary_query():
    _, query = parse_document('clocks x; nonterminals A B; init A; targets B; query ternary 3/2 1/2 0;')
    assert query.mode is Mode.ternary
    assert (query.delta, query.u, query.v) == (Fraction(3, 2), Fraction(1, 2), Fraction(0))


def test_syntax_error_has_position():
    with pytest.raises(ModelError) as e:
        parse_model('clocks x;\nnonterminals X;\nrule X -> -> X;')
    assert e.value.line == 3


@pytest.mark.parametrize('text', [
    'clocks x; nonterminals X; rule X -> Y;',
    'clocks x; nonterminals X; rule X [y < 1] -> X;',
    'clocks x; nonterminals X; rule X [x < 1/2] -> X;',
    'clocks x; nonterminals X; rule X -> X X X;',
    'clocks x x; nonterminals X;',
    'clocks x; nonterminals X; rule X {x := 1, x := 0} -> X;',
])
def test_ill_formed_models(text):
    with pytest.raises(ModelError):
        parse_model(text)


def test_query_validation():
    with pytest.raises(ModelError):
        parse_document('clocks x; nonterminals X Y; init X; targets Y; query nonempty;')
    with pytest.raises(ModelError):
        parse_document('clocks x; nonterminals X Y; init X; targets X Y; query simple-cover;')
    model = parse_model('clocks x; nonterminals X Y;')
    too_many = Query(Mode.reach, 'X', ('Y',) * (config.settings.max_multiplicity + 1))
    assert [d.kind for d in validate_query(model, too_many)] == ['multiplicity']


def test_guard_normalize():
    g = Guard((Atom('x', '>=', 1), Atom('x', '<=', 1), Atom('y', '>', 0), Atom('y', '>', 2)))
    assert g.normalize() == Guard((Atom('x', '=', 1), Atom('y', '>', 2)))
    assert Guard((Atom('x', '>', 2), Atom('x', '<', 1))).is_false()
    assert not Guard((Atom('x', '>=', 1), Atom('x', '<=', 1))).is_false()
    assert Guard().holds({})


def test_normalize_branching_resets():
    model = parse_model('clocks x; nonterminals X Y Z; rule X [x = 1] {x := 0} -> Y Z;')
    normalized = normalize_branching_resets(model)
    assert normalized.nonterminals == ('X', 'Y', 'Z', 'X.r0')
    assert normalized.rules == (
        Rule('X', Guard((Atom('x', '=', 1),)), (('x', 0),), ('X.r0',)),
        Rule('X.r0', Guard((Atom('x', '=', 0),)), (), ('Y', 'Z')),
    )


def test_desugar_constant_updates():
    model = parse_model('clocks x; nonterminals X Y; rule X {x := 2} -> Y; rule Y [x = 3] -> ;')
    desugared = desugar_constant_updates(model)
    assert set(desugared.nonterminals) == {'X', 'Y', 'Y@2'}
    assert Rule('X', Guard(), (('x', 0),), ('Y@2',)) in desugared.rules
    assert Rule('Y@2', Guard((Atom('x', '=', 1),)), (), ()) in desugared.rules
    assert Rule('Y', Guard((Atom('x', '=', 3),)), (), ()) in desugared.rules


def test_project_to_ta(example):
    ta = project_to_ta(example)
    assert ta.is_ta
    assert [r.rhs for r in ta.rules] == [('Y',), ('Z',)]
    assert len(project_to_ta(example, keep_vanishing=True).rules) == 3


def test_require_one_clock():
    assert require_one_clock(parse_model('clocks x; nonterminals X; rule X {x := x} -> X;')) == 'x'
    with pytest.raises(ModelError):
        require_one_clock(parse_model('clocks x y; nonterminals X;'))


def test_reachable_nonterminals(example):
    assert reachable_nonterminals(example, 'X') == {'X', 'Y', 'Z'}
    assert reachable_nonterminals(example, 'Z') == {'Z'}
