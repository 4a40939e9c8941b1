'''
General simplex over exact rationals with bounded variables, and branch and bound on top of it.

The tableau keeps every basic variable as a linear combination of the nonbasic ones. Nonbasic
variables always lie within their bounds; :meth:`Simplex.check` repairs violated basic
variables by pivoting with Bland's rule.
'''
from fractions import Fraction
from math import floor
from typing import Dict, List, Optional, Sequence

from .linear import SolverLimit


class Simplex:

    def __init__(self):
        self.lower: List[Optional[Fraction]] = []
        self.upper: List[Optional[Fraction]] = []
        self.value: List[Fraction] = []
        self.rows: Dict[int, Dict[int, Fraction]] = {}
        self.pivots = 0

    def add_variable(self) -> int:
        self.lower.append(None)
        self.upper.append(None)
        self.value.append(Fraction(0))
        return len(self.value) - 1

    def add_row(self, coeffs: Dict[int, Fraction]) -> int:
        '''A new basic variable equal to ``sum(coeffs[j] * x_j)``.'''
        s = self.add_variable()
        row: Dict[int, Fraction] = {}
        for j, a in coeffs.items():
            if j in self.rows:
                for k, b in self.rows[j].items():
                    row[k] = row.get(k, 0) + a * b
            else:
                row[j] = row.get(j, 0) + a
        row = {k: v for k, v in row.items() if v != 0}
        self.rows[s] = row
        self.value[s] = sum((v * self.value[k] for k, v in row.items()), Fraction(0))
        return s

    def _move(self, j: int, v: Fraction):
        delta = v - self.value[j]
        if delta == 0:
            return
        for b, row in self.rows.items():
            if j in row:
                self.value[b] += row[j] * delta
        self.value[j] = v

    def set_lower(self, j: int, v: Fraction):
        if self.lower[j] is None or v > self.lower[j]:
            self.lower[j] = Fraction(v)
            if j not in self.rows and self.value[j] < v:
                self._move(j, Fraction(v))

    def set_upper(self, j: int, v: Fraction):
        if self.upper[j] is None or v < self.upper[j]:
            self.upper[j] = Fraction(v)
            if j not in self.rows and self.value[j] > v:
                self._move(j, Fraction(v))

    def bounds_conflict(self) -> bool:
        return any(lo is not None and hi is not None and lo > hi for lo, hi in zip(self.lower, self.upper))

    def _pivot(self, b: int, j: int):
        row = self.rows.pop(b)
        a = row.pop(j)
        new = {b: 1 / a}
        for k, c in row.items():
            new[k] = -c / a
        for r in self.rows.values():
            c = r.pop(j, None)
            if c is None:
                continue
            for k, d in new.items():
                v = r.get(k, 0) + c * d
                if v:
                    r[k] = v
                else:
                    r.pop(k, None)
        self.rows[j] = new
        self.pivots += 1

    def _pivot_and_update(self, b: int, j: int, v: Fraction):
        a = self.rows[b][j]
        theta = (v - self.value[b]) / a
        self.value[b] = v
        self.value[j] += theta
        for k, row in self.rows.items():
            if k != b and j in row:
                self.value[k] += row[j] * theta
        self._pivot(b, j)

    def _can_increase(self, j):
        return self.upper[j] is None or self.value[j] < self.upper[j]

    def _can_decrease(self, j):
        return self.lower[j] is None or self.value[j] > self.lower[j]

    def check(self) -> bool:
        '''Move to an assignment within all bounds; ``False`` if there is none.'''
        if self.bounds_conflict():
            return False
        while True:
            b = min(
                (b for b in self.rows
                 if (self.lower[b] is not None and self.value[b] < self.lower[b])
                 or (self.upper[b] is not None and self.value[b] > self.upper[b])),
                default=None,
            )
            if b is None:
                return True
            row = self.rows[b]
            if self.lower[b] is not None and self.value[b] < self.lower[b]:
                j = min((j for j, a in row.items()
                         if (a > 0 and self._can_increase(j)) or (a < 0 and self._can_decrease(j))), default=None)
                target = self.lower[b]
            else:
                j = min((j for j, a in row.items()
                         if (a < 0 and self._can_increase(j)) or (a > 0 and self._can_decrease(j))), default=None)
                target = self.upper[b]
            if j is None:
                return False
            self._pivot_and_update(b, j, target)


def branch_and_bound(simplex: Simplex, integers: Sequence[int], node_limit: int) -> Optional[int]:
    '''
    Search for an integral assignment of ``integers``, branching on the first fractional one
    with the floor side first.

    :return: the number of nodes explored, ``None`` if there is no integral assignment.
    :raises SolverLimit: after ``node_limit`` nodes.
    '''
    base_lower, base_upper = list(simplex.lower), list(simplex.upper)
    stack = [()]
    nodes = 0
    while stack:
        branch = stack.pop()
        nodes += 1
        if nodes > node_limit:
            raise SolverLimit(f'branch and bound exceeded {node_limit} nodes')
        simplex.lower, simplex.upper = list(base_lower), list(base_upper)
        for j, side, k in branch:
            (simplex.set_lower if side == 'lower' else simplex.set_upper)(j, k)
        if not simplex.check():
            continue
        fractional = next((j for j in integers if simplex.value[j].denominator != 1), None)
        if fractional is None:
            return nodes
        k = floor(simplex.value[fractional])
        stack.append(branch + ((fractional, 'lower', Fraction(k + 1)),))
        stack.append(branch + ((fractional, 'upper', Fraction(k)),))
    return None
