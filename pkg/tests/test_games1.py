from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tbpp.games1 import (
    BasicFormula, GameError, PiecewiseBasic, VanTable, compute_van, equation_residuals, point, shift_diag,
    shift_flat, simplify_family, solve_pgame, tbpp_to_pgame, van_to_formula,
)
from tbpp.la import conj, decide, eq, Var
from tbpp.model import Mode, Query, parse_model
from tbpp.semantics import Process, explore_discretized

half = Fraction(1, 2)


def test_shift_diag_point():
    f = shift_diag(point(2, 3, False))
    assert f.holds(2, 3)
    assert f.holds(1, 4)
    assert f.holds(0, 5)
    assert not f.holds(1, Fraction(39, 10))
    assert not f.holds(3, 10)


def test_shift_flat_point():
    f = shift_flat(point(2, 3, False))
    assert f.holds(0, 3)
    assert f.holds(Fraction(3, 2), 7)
    assert not f.holds(1, 2)
    assert not f.holds(3, 5)


def test_shift_constants():
    assert shift_flat(True) == PiecewiseBasic.true()
    assert shift_diag(False).is_false
    assert shift_flat(BasicFormula(2, 1, False, False, 0)).is_false


def test_union_takes_weaker_threshold():
    f = PiecewiseBasic([BasicFormula(0, None, False, False, 3)]) | PiecewiseBasic([BasicFormula(0, 2, False, False, 1)])
    assert f.holds(1, 1)
    assert not f.holds(3, 2)
    assert f.holds(3, 3)


def test_simplify_family():
    flat = BasicFormula(0, 4, False, False, 3)
    slope = BasicFormula(0, 4, False, False, 4, -1)
    pieces = simplify_family([flat, slope])
    assert len(pieces) == 4
    assert {(p.lo, p.hi) for p in pieces} == {(0, 1), (1, 4)}
    assert simplify_family([flat]) == [flat]


def test_van_example(example):
    van = compute_van(example)
    assert not van.holds('X', 0, 10)
    assert not van.holds('Y', 0, 10)
    assert van.holds('Z', 1, 0)
    assert van.holds('Z', 0, half)
    assert not van.holds('Z', 0, 0)


def test_van_branching():
    model = parse_model('clocks x; nonterminals X Z; rule X [x = 0] -> Z Z; rule Z [x > 0] -> ;')
    van = compute_van(model)
    assert van.holds('X', 0, half)
    assert not van.holds('X', 0, 0)
    assert not van.holds('X', 1, 5)


def test_van_deadline():
    model = parse_model('clocks x; nonterminals Z; rule Z [x >= 2] -> ;')
    van = compute_van(model)
    assert van.holds('Z', half, Fraction(3, 2))
    assert not van.holds('Z', half, 1)
    assert van.holds('Z', 3, 0)


def test_van_with_reset():
    model = parse_model('clocks x; nonterminals X Z; rule X [x = 3] {x := 0} -> Z; rule Z [x = 1] -> ;')
    van = compute_van(model)
    assert van.holds('X', 0, 4)
    assert not van.holds('X', 0, Fraction(7, 2))
    assert van.holds('X', 2, 2)
    assert not van.holds('X', 4, 100)


def test_van_table_json(example):
    van = compute_van(example)
    assert VanTable.from_dict(van.to_dict()) == van
    assert set(van) == {'X', 'Y', 'Z'}


def test_van_formula(example):
    van = compute_van(example)
    f = van_to_formula(van, 'Z')
    assert decide(conj(f, eq(Var('x'), 0), eq(Var('t'), half))).is_sat
    assert decide(conj(f, eq(Var('x'), 0), eq(Var('t'), 0))).is_unsat
    assert decide(van_to_formula(van, 'Y')).is_unsat


def test_equation_residuals():
    model = parse_model('''
        clocks x;
        nonterminals X Y Z;
        rule X [x <= 1] -> Y Z;
        rule Y [x >= 1] {x := 0} -> Z;
        rule Z [x > 2] -> ;
    ''')
    game = tbpp_to_pgame(model)
    outcome = solve_pgame(game)
    grid = [Fraction(k, 4) for k in range(17)]
    points = [(s, a, b) for s in game.states for a in grid for b in grid]
    assert equation_residuals(game, outcome, points) == []


def test_pgame_rejects_constant_updates():
    model = parse_model('clocks x; nonterminals X Y; rule X {x := 2} -> Y;')
    with pytest.raises(GameError):
        tbpp_to_pgame(model)


@st.composite
def vanishing_models(draw):
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


halves = st.sampled_from([Fraction(k, 2) for k in range(6)])


@pytest.mark.slow
@settings(max_examples=25, deadline=None)
@given(model=vanishing_models(), nt=st.sampled_from(['X', 'Y', 'Z']), x=halves, t=halves)
def test_van_agrees_with_explorer(model, nt, x, t):
    van = compute_van(model)
    if van.holds(nt, x, t):
        assert van.holds(nt, x, t + half)
        assert van.holds(nt, x, t + 3)
    found = explore_discretized(
        model, Query(Mode.nonempty, nt), granularity=Fraction(1, 4), horizon=t, max_steps=2000,
        start=(Process.of(nt, {'x': x}),),
    )
    if found.is_sat:
        assert van.holds(nt, x, t)
    game = tbpp_to_pgame(model)
    outcome = solve_pgame(game)
    points = [(s, a, b) for s in game.states for a in (0, half, 1, 2, 3) for b in (0, half, 1, 2, 4)]
    assert equation_residuals(game, outcome, points) == []
