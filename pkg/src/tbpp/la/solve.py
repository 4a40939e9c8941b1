'''
Decision procedures: integer and rational conjunctions, and :func:`decide` for existential formulas.

:func:`decide` separates the formula, then searches lazily over its disjunctions: it solves the
rational relaxation of the atoms asserted so far, evaluates the pending disjunctions on that model
and branches on the first violated one, in formula order. Integer models are only computed once the
relaxation satisfies every pending disjunction.
'''
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .. import config
from ..logging import logger
from ..verdict import Verdict
from .linear import (
    Constraint, SolverLimit, Symbol, as_constraints, bounds_of, eliminate_equalities, fourier_motzkin, from_atom,
    small_model_bound, symbol_key, tighten,
)
from .rewrite import FRAC, INT, MIXED, atom_sort, prenex, separate
from .simplex import Simplex, branch_and_bound
from .smt import has_z3, solve_smt
from .terms import (
    And, Atom, Bool, Floor, Formula, Frac, LaError, Or, Var, Valuation, all_vars, evaluate, exists,
)


def _int_model(
        constraints: List[Constraint],
        node_limit: int,
        relaxed: bool = False,
) -> Tuple[Optional[Dict[Symbol, Fraction]], dict]:
    '''An integer model, or with ``relaxed`` a rational model of the tightened system.'''
    counter = iter(range(1 << 62))

    def fresh():
        return Var(f'_sigma{next(counter)}', True)

    remaining, subs = eliminate_equalities(constraints, fresh)
    statistics = {'substitutions': len(subs)}
    if remaining is None:
        return None, statistics
    tight = []
    for c in remaining:
        c = tighten(c)
        if c.trivial is False:
            return None, statistics
        if c.coeffs:
            tight.append(c)

    symbols = sorted({s for c in tight for s in c.symbols}, key=symbol_key)
    bound = small_model_bound(tight)
    logger.debug(f'Small model bound 2^{bound.bit_length()} ({len(symbols)} symbols, {len(tight)} constraints).')
    simplex = Simplex()
    index = {s: simplex.add_variable() for s in symbols}
    for j in index.values():
        simplex.set_lower(j, Fraction(-bound))
        simplex.set_upper(j, Fraction(bound))
    for c in tight:
        if len(c.coeffs) == 1:
            lo, hi = bounds_of(c)
            j = index[c.coeffs[0][0]]
            if lo is not None:
                simplex.set_lower(j, lo)
            if hi is not None:
                simplex.set_upper(j, hi)
            continue
        row = simplex.add_row({index[s]: a for s, a in c.coeffs})
        simplex.set_upper(row, -c.const)

    if relaxed:
        nodes = 1 if simplex.check() else None
    else:
        nodes = branch_and_bound(simplex, list(index.values()), node_limit)
    statistics.update(nodes=nodes or 0, pivots=simplex.pivots)
    if nodes is None:
        return None, statistics
    model = {s: simplex.value[j] for s, j in index.items()}
    for sub in reversed(subs):
        sub.apply(model)
    return model, statistics


def solve_int_conjunction(atoms: Iterable, node_limit: Optional[int] = None) -> Verdict:
    '''
    Decide a conjunction of linear constraints over integer variables.

    :param atoms: :class:`Atom` or :class:`Constraint` items.
    :return: ``Sat`` with a model keyed by the symbols, ``Unsat``, or ``Unknown`` on the node limit.
    '''
    cs = as_constraints(atoms)
    node_limit = node_limit or config.settings.bnb_node_limit
    try:
        model, statistics = _int_model(cs, node_limit)
    except SolverLimit as e:
        logger.warning(str(e))
        return Verdict.unknown(str(e))
    if model is None:
        return Verdict.unsat(**statistics)
    symbols = {s for c in cs for s in c.symbols}
    return Verdict.sat({s: model.get(s, Fraction(0)) for s in sorted(symbols, key=symbol_key)}, **statistics)


def solve_rat_conjunction(atoms: Iterable) -> Verdict:
    '''Decide a conjunction of strict and non-strict linear constraints over the rationals.'''
    cs = as_constraints(atoms)
    model, statistics = fourier_motzkin(cs)
    if model is None:
        return Verdict.unsat(**statistics)
    symbols = {s for c in cs for s in c.symbols}
    return Verdict.sat({s: model.get(s, Fraction(0)) for s in sorted(symbols, key=symbol_key)}, **statistics)


def _holds(f: Formula, model, constraints) -> bool:
    if isinstance(f, Atom):
        c = constraints.get(f)
        if c is None:
            c = constraints[f] = from_atom(f)
        return c.holds(model)
    if isinstance(f, And):
        return all(_holds(g, model, constraints) for g in f.args)
    if isinstance(f, Or):
        return any(_holds(g, model, constraints) for g in f.args)
    if isinstance(f, Bool):
        return f.value
    raise LaError(f'unexpected formula in separated matrix: {f!r}')


class _Search:

    def __init__(self, node_limit: int, bnb_node_limit: int):
        self.node_limit = node_limit
        self.bnb_node_limit = bnb_node_limit
        self.nodes = 0
        self.cache: Dict[tuple, Optional[dict]] = {}
        self.constraints: Dict[Atom, Constraint] = {}

    def constraint(self, a: Atom) -> Constraint:
        c = self.constraints.get(a)
        if c is None:
            c = self.constraints[a] = from_atom(a)
        return c

    def solve(self, asserted: Tuple[Atom, ...], relaxed: bool = False) -> Optional[dict]:
        '''
        A model of the asserted atoms. With ``relaxed`` the integer part is only solved over the
        rationals, which is enough to prune and to pick the next disjunction.
        '''
        key = (frozenset(asserted), relaxed)
        if key in self.cache:
            return self.cache[key]
        ints, fracs = [], []
        for a in key[0]:
            sort = atom_sort(a)
            if sort == MIXED:
                raise LaError(f'atom {a} is not separated')
            c = self.constraint(a)
            if sort is None:
                if not c.holds({}):
                    self.cache[key] = None
                    return None
                continue
            (ints if sort == INT else fracs).append(c)
        model, _ = _int_model(ints, self.bnb_node_limit, relaxed) if ints else ({}, {})
        if model is not None and fracs:
            symbols = sorted({s for c in fracs for s in c.symbols}, key=symbol_key)
            ranges = []
            for s in symbols:
                ranges.append(Constraint.of({s: -1}, 0, '<='))
                ranges.append(Constraint.of({s: 1}, -1, '<'))
            frac_model, _ = fourier_motzkin(fracs + ranges)
            model = None if frac_model is None else {**model, **frac_model}
        self.cache[key] = model
        return model

    def _assert(self, f: Formula, asserted, pending):
        if isinstance(f, Atom):
            return asserted + (f,), pending
        if isinstance(f, Bool):
            return (asserted, pending) if f.value else None
        if isinstance(f, Or):
            return asserted, pending + (f,)
        if isinstance(f, And):
            state = (asserted, pending)
            for g in f.args:
                state = self._assert(g, *state)
                if state is None:
                    return None
            return state
        raise LaError(f'unexpected formula in separated matrix: {f!r}')

    def _violated(self, pending, model) -> Optional[Or]:
        return next((p for p in pending if not _holds(p, model, self.constraints)), None)

    def run(self, matrix: Formula) -> Optional[dict]:
        start = self._assert(matrix, (), ())
        stack = [start] if start is not None else []
        while stack:
            asserted, pending = stack.pop()
            self.nodes += 1
            if self.nodes > self.node_limit:
                raise SolverLimit(f'disjunction search exceeded {self.node_limit} nodes')
            model = self.solve(asserted, relaxed=True)
            if model is None:
                continue
            violated = self._violated(pending, model)
            if violated is None:
                model = self.solve(asserted)
                if model is None:
                    continue
                violated = self._violated(pending, model)
                if violated is None:
                    return model
            rest = tuple(p for p in pending if p is not violated)
            for child in reversed(violated.args):
                state = self._assert(child, asserted, rest)
                if state is not None:
                    stack.append(state)
        return None


def valuation_of(model: Dict[Symbol, Fraction], variables: Iterable[Var]) -> Valuation:
    '''Reassemble variable values from integer and fractional part symbols.'''
    out = {}
    for x in variables:
        if x.integer:
            out[x.name] = Fraction(model.get(x, 0))
        else:
            out[x.name] = Fraction(model.get(Floor(x), 0)) + Fraction(model.get(Frac(x), 0))
    return out


BACKENDS = ('auto', 'builtin', 'z3')


def backend_of(backend: Optional[str] = None) -> str:
    '''Resolve ``auto`` to ``z3`` when z3-solver is installed and to ``builtin`` otherwise.'''
    backend = backend or config.settings.la_backend
    if backend not in BACKENDS:
        raise LaError(f'unknown backend {backend!r}, expected one of {BACKENDS}')
    if backend == 'auto':
        return 'z3' if has_z3() else 'builtin'
    return backend


def decide(f: Formula, node_limit: Optional[int] = None, backend: Optional[str] = None) -> Verdict:
    '''
    Decide an existential formula.

    The ``builtin`` backend separates the formula and searches its disjunctions lazily; the
    ``z3`` backend hands the :func:`~tbpp.la.export_smt` script to z3. Both check their model
    against the input before answering.

    :param backend: ``auto``, ``builtin`` or ``z3`` (default: ``settings.la_backend``).
    :return: ``Sat`` with a valuation of every variable of the formula (bound variables included,
        under their names after renaming clashes apart), ``Unsat``, or ``Unknown`` when a search
        limit was hit.
    :raises LaError: for formulas outside the existential fragment.
    '''
    bound, matrix = prenex(f)
    if backend_of(backend) == 'z3':
        verdict = solve_smt(f, config.settings.smt_timeout)
        if verdict.is_sat and not evaluate(matrix, verdict.witness):
            raise LaError('model returned by z3 does not satisfy the input')
        logger.debug(f'Decided formula with z3 ({verdict.answer}).')
        return verdict
    separated = separate(exists(bound, matrix))
    _, smatrix = prenex(separated)
    search = _Search(node_limit or config.settings.search_node_limit, config.settings.bnb_node_limit)
    try:
        model = search.run(smatrix)
    except SolverLimit as e:
        logger.warning(f'{e}; answering unknown.')
        return Verdict.unknown(str(e), nodes=search.nodes)
    statistics = {'nodes': search.nodes, 'conjunctions': len(search.cache)}
    logger.debug(f'Decided formula ({statistics=}).')
    if model is None:
        return Verdict.unsat(**statistics)
    variables = sorted(all_vars(matrix) | all_vars(smatrix), key=lambda x: x.name)
    valuation = valuation_of(model, variables)
    if not evaluate(matrix, valuation):
        raise LaError('model extracted from the separated formula does not satisfy the input')
    names = {x.name for x in all_vars(matrix)}
    return Verdict.sat({k: v for k, v in valuation.items() if k in names}, **statistics)
