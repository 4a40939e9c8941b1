'''
Difference bound matrices

Entry ``(i, j)`` bounds ``x_i - x_j``; index 0 is the reference clock with value 0. Bounds are
encoded as integers ``2c + 1`` for ``<= c`` and ``2c`` for ``< c`` so that a smaller code is a
tighter bound; :data:`INF` is the absent bound.

'''
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..model import Guard, Source

INF = np.iinfo(np.int64).max // 4
LE_ZERO = 1


def bound(c: int, strict: bool = False) -> int:
    return (int(c) << 1) | (0 if strict else 1)


def add(a, b):
    '''Sum of encoded bounds, elementwise on arrays.'''
    a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
    s = (((a >> 1) + (b >> 1)) << 1) | (a & b & 1)
    return np.where((a >= INF) | (b >= INF), INF, s)


def decode(b: int) -> Optional[Tuple[int, bool]]:
    '''``(c, strict)`` or ``None`` for no bound.'''
    b = int(b)
    if b >= INF:
        return None
    return b >> 1, not (b & 1)


class Dbm:
    '''
    Dbm

    A zone over named clocks. Operations return new zones and keep them canonical.

    :param clocks: clock names, matrix index ``i + 1`` is ``clocks[i]``.
    :param matrix: the ``(k+1) x (k+1)`` bound matrix.
    '''

    __slots__ = ('clocks', 'matrix', '_index')

    def __init__(self, clocks: Sequence[str], matrix: np.ndarray):
        self.clocks = tuple(clocks)
        self.matrix = matrix
        self._index = {c: i + 1 for i, c in enumerate(self.clocks)}

    @classmethod
    def zero(cls, clocks: Sequence[str]) -> 'Dbm':
        n = len(clocks) + 1
        return cls(clocks, np.full((n, n), LE_ZERO, dtype=np.int64))

    @classmethod
    def universe(cls, clocks: Sequence[str]) -> 'Dbm':
        n = len(clocks) + 1
        m = np.full((n, n), INF, dtype=np.int64)
        m[0, :] = LE_ZERO
        np.fill_diagonal(m, LE_ZERO)
        return cls(clocks, m)

    @classmethod
    def point(cls, valuation: Mapping[str, int], clocks: Optional[Sequence[str]] = None) -> 'Dbm':
        '''The zone holding exactly one integer valuation.'''
        clocks = tuple(clocks or valuation)
        values = np.array([0] + [int(valuation[c]) for c in clocks], dtype=np.int64)
        diff = values[:, None] - values[None, :]
        return cls(clocks, (diff << 1) | 1)

    def index(self, clock: str) -> int:
        return self._index[clock]

    def copy(self) -> 'Dbm':
        return Dbm(self.clocks, self.matrix.copy())

    def normalize(self) -> 'Dbm':
        '''Shortest path closure.'''
        d = self.matrix.copy()
        for k in range(d.shape[0]):
            d = np.minimum(d, add(d[:, k, None], d[None, k, :]))
            if np.any(np.diagonal(d) < LE_ZERO):
                break
        return Dbm(self.clocks, d)

    def is_empty(self) -> bool:
        return bool(np.any(np.diagonal(self.matrix) < LE_ZERO))

    def up(self) -> 'Dbm':
        '''Let time elapse without bound.'''
        d = self.matrix.copy()
        d[1:, 0] = INF
        return Dbm(self.clocks, d)

    def constrain(self, i: int, j: int, b: int) -> 'Dbm':
        d = self.matrix.copy()
        d[i, j] = min(int(d[i, j]), b)
        return Dbm(self.clocks, d).normalize()

    def intersect_guard(self, guard: Guard) -> 'Dbm':
        '''
        Conjoin a guard over the zone's clocks.
        '''
        d = self.matrix.copy()
        for a in guard.atoms:
            i = self._index[a.clock]
            if a.rel in ('<', '<=', '='):
                d[i, 0] = min(int(d[i, 0]), bound(a.bound, a.rel == '<'))
            if a.rel in ('>', '>=', '='):
                d[0, i] = min(int(d[0, i]), bound(-a.bound, a.rel == '>'))
        return Dbm(self.clocks, d).normalize()

    def intersect(self, other: 'Dbm') -> 'Dbm':
        return Dbm(self.clocks, np.minimum(self.matrix, other.matrix)).normalize()

    def apply_assignment(self, assign: Iterable[Tuple[str, Source]]) -> 'Dbm':
        '''Updates ``x := k`` and ``x := y``, applied left to right.'''
        d = self.matrix.copy()
        for target, source in assign:
            x = self._index[target]
            if isinstance(source, int):
                d[x, :] = add(d[0, :], bound(source))
                d[:, x] = add(d[:, 0], bound(-source))
            else:
                y = self._index[source]
                if y == x:
                    continue
                d[x, :] = d[y, :]
                d[:, x] = d[:, y]
                d[x, y] = d[y, x] = LE_ZERO
            d[x, x] = LE_ZERO
        return Dbm(self.clocks, d)

    def remap(self, clocks: Sequence[str], sources: Sequence[str]) -> 'Dbm':
        '''
        A zone over new clocks where ``clocks[i]`` takes the value of the old clock ``sources[i]``.
        '''
        idx = np.array([0] + [self._index[s] for s in sources], dtype=np.intp)
        return Dbm(clocks, self.matrix[np.ix_(idx, idx)].copy())

    def extrapolate(self, ceiling: int) -> 'Dbm':
        '''Forget bounds above ``ceiling`` (max constant extrapolation).'''
        d = self.matrix.copy()
        n = d.shape[0]
        upper = np.full(n, bound(ceiling), dtype=np.int64)
        upper[0] = LE_ZERO
        lower = np.full(n, bound(-ceiling, True), dtype=np.int64)
        lower[0] = LE_ZERO
        off = ~np.eye(n, dtype=bool)
        too_high = (d > upper[:, None]) & (d < INF) & off
        d[too_high] = INF
        too_low = (d < lower[None, :]) & off
        d[too_low] = np.broadcast_to(lower[None, :], d.shape)[too_low]
        return Dbm(self.clocks, d).normalize()

    def includes(self, other: 'Dbm') -> bool:
        '''``other`` is a subset of this zone (both canonical).'''
        return other.is_empty() or bool(np.all(other.matrix <= self.matrix))

    def contains(self, valuation: Mapping[str, Fraction]) -> bool:
        values = [Fraction(0)] + [Fraction(valuation[c]) for c in self.clocks]
        n = len(values)
        for i in range(n):
            for j in range(n):
                b = decode(self.matrix[i, j])
                if b is None:
                    continue
                diff = values[i] - values[j]
                if diff > b[0] or (b[1] and diff == b[0]):
                    return False
        return True

    def key(self):
        return self.clocks, self.matrix.tobytes()

    def __eq__(self, other):
        return isinstance(other, Dbm) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def to_dict(self):
        names = ('0',) + self.clocks
        out = []
        for i in range(len(names)):
            for j in range(len(names)):
                b = decode(self.matrix[i, j])
                if i == j or b is None:
                    continue
                out.append([names[i], names[j], '<' if b[1] else '<=', b[0]])
        return {'clocks': list(self.clocks), 'bounds': out}

    def __str__(self):
        if self.is_empty():
            return 'false'
        parts = []
        for i, j, rel, c in self.to_dict()['bounds']:
            if j == '0':
                parts.append(f'{i} {rel} {c}')
            elif i == '0':
                parts.append(f'-{j} {rel} {c}')
            else:
                parts.append(f'{i} - {j} {rel} {c}')
        return ' & '.join(parts) or 'true'
