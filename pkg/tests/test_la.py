from fractions import Fraction
from functools import partial

import pytest
from hypothesis import given, settings, strategies as st

from tbpp import config
from tbpp.la import (
    Const, Exists, FALSE, Floor, Frac, LaError, Scale, TRUE, Var, between, conj, decide, disj, eliminate_scaling, eq,
    evaluate, export_smt, free_vars, from_json, ge, gt, is_separated, is_shallow, le, lt, make_shallow, nnf,
    normalize, normalize_term, separate, solve_int_conjunction, solve_rat_conjunction, substitute, to_json,
    backend_of, has_z3, solve_smt, value,
)
from tbpp.la.terms import Add

x, y, z = Var('x'), Var('y'), Var('z')
n, m = Var('n', True), Var('m', True)


def test_evaluate():
    v = {'x': Fraction(3, 2), 'y': Fraction(1, 2)}
    assert evaluate(conj(eq(Floor(x), 1), eq(Frac(x), Fraction(1, 2))), v)
    assert not evaluate(le(x + y, 2), {'x': 1, 'y': Fraction(3, 2)})
    assert evaluate(ge(Frac(x) + Frac(y), 1), {'x': Fraction(3, 4), 'y': Fraction(1, 2)})
    assert value(Frac(Const(Fraction(-1, 3))), {}) == Fraction(2, 3)
    with pytest.raises(LaError):
        value(x, {})


def test_builders():
    assert conj() is TRUE
    assert disj() is FALSE
    assert conj(TRUE, le(x, 1)) == le(x, 1)
    assert conj(le(x, 1), FALSE) is FALSE
    assert free_vars(Exists((x,), le(x, y))) == {y}


@pytest.fixture(params=['builtin', 'z3'])
def solve(request):
    if request.param == 'z3':
        pytest.importorskip('z3')
    return partial(decide, backend=request.param)


def test_decide_floor_and_frac(solve):
    f = conj(eq(Floor(x), 2), gt(Frac(x), Fraction(1, 2)))
    verdict = solve(f)
    assert verdict.is_sat
    assert evaluate(f, verdict.witness)
    assert Fraction(5, 2) < verdict.witness['x'] < 3


def test_decide_unsat(solve):
    assert solve(ge(Frac(x), 1)).is_unsat
    assert solve(conj(lt(x, 0), ge(x, 0))).is_unsat
    assert solve(conj(lt(x, y), lt(y, x))).is_unsat


def test_decide_carry(solve):
    # the fractional parts of x and y add up to more than one
    f = conj(eq(Floor(x + y), Floor(x) + Floor(y) + 1), eq(Floor(x), 0), eq(Floor(y), 0))
    verdict = solve(f)
    assert verdict.is_sat
    assert verdict.witness['x'] + verdict.witness['y'] >= 1
    assert solve(conj(f, le(x + y, Fraction(1, 2)))).is_unsat


def test_decide_integers(solve):
    assert solve(conj(eq(2 * n, 2 * m + 1))).is_unsat
    verdict = solve(conj(eq(n + m, 3), ge(n, 1), ge(m, 1)))
    assert verdict.is_sat
    assert verdict.witness['n'] + verdict.witness['m'] == 3


def test_decide_existential(solve):
    f = Exists((y,), conj(eq(x, 2 * y), eq(Frac(y), Fraction(1, 2)), between(0, x, 2)))
    verdict = solve(f)
    assert verdict.is_sat
    assert verdict.witness['x'] == 1


def test_solve_int_conjunction():
    assert solve_int_conjunction([ge(n, 0), le(n, -1)]).is_unsat
    verdict = solve_int_conjunction([eq(n + m, 3), ge(n, 1), ge(m, 1)])
    assert verdict.is_sat
    assert verdict.witness[n] + verdict.witness[m] == 3
    assert min(verdict.witness[n], verdict.witness[m]) >= 1
    assert solve_int_conjunction([eq(2 * n, 2 * m + 1)]).is_unsat


def test_solve_rat_conjunction():
    verdict = solve_rat_conjunction([lt(0, x), lt(x, 1)])
    assert verdict.is_sat
    assert 0 < verdict.witness[x] < 1
    assert solve_rat_conjunction([lt(x, y), lt(y, x)]).is_unsat
    verdict = solve_rat_conjunction([ge(x, Fraction(1, 3)), le(x, Fraction(1, 3))])
    assert verdict.witness[x] == Fraction(1, 3)


def test_make_shallow():
    f = le(Floor(x + y), z)
    g = make_shallow(f)
    assert is_shallow(g)
    assert isinstance(g, Exists)
    assert make_shallow(g) == g
    assert decide(conj(f, eq(x, Fraction(1, 2)), eq(y, Fraction(3, 4)), eq(z, 0))).is_unsat
    assert decide(conj(g, eq(x, Fraction(1, 2)), eq(y, Fraction(3, 4)), eq(z, 1))).is_sat


def test_eliminate_scaling():
    f = le(5 * x, y)
    g = eliminate_scaling(f)
    assert not any(isinstance(t, Scale) for t in _terms(g))
    assert decide(conj(g, ge(x, 1), eq(y, 4))).is_unsat
    assert decide(conj(g, ge(x, 1), eq(y, 5))).is_sat
    assert eliminate_scaling(le(1 * x, y)) == le(x, y)


def _terms(f):
    if hasattr(f, 'lhs'):
        stack = [f.lhs, f.rhs]
        while stack:
            t = stack.pop()
            yield t
            if hasattr(t, 'arg'):
                stack.append(t.arg)
            stack.extend(getattr(t, 'args', ()))
    for g in getattr(f, 'args', ()):
        yield from _terms(g)
    if hasattr(f, 'body'):
        yield from _terms(f.body)


def test_separate():
    f = eq(Floor(x + y), z)
    g = separate(f)
    assert is_separated(g)
    assert normalize(le(Frac(Frac(x)), y)) == le(Frac(x), y)
    sample = conj(eq(x, Fraction(2, 3)), eq(y, Fraction(2, 3)))
    assert decide(conj(g, sample, eq(z, 1))).is_sat
    assert decide(conj(g, sample, eq(z, 0))).is_unsat


def test_nnf():
    f = nnf(~conj(le(x, 1), lt(y, 2)))
    assert evaluate(f, {'x': 2, 'y': 0})
    assert not evaluate(f, {'x': 0, 'y': 0})


def test_json_round_trip():
    f = Exists((y,), conj(eq(Floor(x + y), 2), lt(Frac(y), Fraction(1, 3)), le(n, 3)))
    assert from_json(to_json(f)) == f


def test_substitute():
    f = substitute(le(x + y, 2), {'y': Const(1)})
    assert evaluate(f, {'x': 1})
    assert not evaluate(f, {'x': 2})


def test_export_smt():
    assert export_smt(TRUE).strip().endswith('(assert true)\n(check-sat)')
    script = export_smt(eq(Floor(x), 2))
    assert '(declare-fun x () Real)' in script
    assert 'Int' in script
    assert script.count('(') == script.count(')')


def test_export_smt_z3():
    z3 = pytest.importorskip('z3')
    f = conj(eq(Floor(x), 2), gt(Frac(x), Fraction(1, 2)), le(n + x, 3))
    solver = z3.Solver()
    solver.from_string(export_smt(f))
    assert str(solver.check()) == 'sat'
    solver = z3.Solver()
    solver.from_string(export_smt(ge(Frac(x), 1)))
    assert str(solver.check()) == 'unsat'


def test_backend_of(monkeypatch):
    assert backend_of('builtin') == 'builtin'
    assert backend_of('auto') == ('z3' if has_z3() else 'builtin')
    with pytest.raises(LaError):
        backend_of('nope')
    monkeypatch.setattr(config, 'settings', config.Settings(la_backend='builtin'))
    assert backend_of() == 'builtin'


def test_solve_smt():
    pytest.importorskip('z3')
    f = Exists((y,), conj(eq(x, 2 * y), eq(Frac(y), Fraction(1, 2)), between(0, x, 2), le(n, x)))
    verdict = solve_smt(f)
    assert verdict.is_sat
    assert verdict.statistics['backend'] == 'z3'
    assert evaluate(f.body, verdict.witness)
    assert solve_smt(conj(eq(2 * n, 2 * m + 1))).is_unsat


leaves = st.sampled_from([x, y, n, Const(Fraction(1, 2)), Const(2), Const(-1)])
terms = st.recursive(
    leaves,
    lambda inner: st.one_of(
        st.builds(Floor, inner),
        st.builds(Frac, inner),
        st.builds(lambda a, b: Add((a, b)), inner, inner),
    ),
    max_leaves=6,
)
rationals = st.fractions(min_value=-4, max_value=4, max_denominator=6)


@settings(max_examples=200, deadline=None)
@given(terms, rationals, rationals, st.integers(-3, 3))
def test_normalize_preserves_value(t, a, b, k):
    v = {'x': a, 'y': b, 'n': k}
    assert value(normalize_term(t, 'innermost'), v) == value(t, v)
    assert value(normalize_term(t, 'outermost'), v) == value(t, v)


points = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@settings(max_examples=50, deadline=None)
@given(points, points)
def test_decide_agrees_with_point(a, b):
    f = conj(eq(Floor(x + y), Floor(Const(a + b))), eq(Frac(x), Frac(Const(a))), eq(Floor(x), Floor(Const(a))))
    verdict = decide(conj(f, eq(y, b)))
    assert verdict.is_sat
    assert verdict.witness['x'] == a
