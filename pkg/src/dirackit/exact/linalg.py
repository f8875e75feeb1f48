"""Exact linear algebra over a field: QQ(x_1..x_n) or QQ itself.

All routines accept any field elements supporting ``+ - * /`` and truth
testing (``RatFun`` or ``Fraction``).  Reduction is Gauss-Jordan; for
rational-function entries the pivot is the simplest nonzero candidate in
its column, which keeps intermediate expression swell down.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ratfun import Chart, PoleError, RatFun

__all__ = [
    "RatMatrix",
    "LinearSolution",
    "InconsistentSystem",
    "rref",
    "solve_linear",
    "kernel",
    "rank",
    "generic_rank",
    "in_span",
    "same_span",
    "evaluate_matrix",
    "mat_vec",
]


class RatMatrix:
    """A rows x cols grid of :class:`RatFun` on one chart."""

    __slots__ = ("chart", "rows")

    def __init__(self, chart: Chart, rows: Sequence[Sequence]):
        width = len(rows[0]) if rows else 0
        clean = []
        for r in rows:
            if len(r) != width:
                raise ValueError("ragged matrix rows")
            clean.append(tuple(x if isinstance(x, RatFun) else RatFun.const(chart, x) for x in r))
        self.chart = chart
        self.rows = tuple(clean)

    @classmethod
    def identity(cls, chart: Chart, n: int) -> RatMatrix:
        return cls(chart, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, chart: Chart, m: int, n: int) -> RatMatrix:
        return cls(chart, [[0] * n for _ in range(m)])

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def transpose(self) -> RatMatrix:
        m, n = self.shape
        return RatMatrix(self.chart, [[self.rows[i][j] for i in range(m)] for j in range(n)])

    def __matmul__(self, other: RatMatrix) -> RatMatrix:
        m, k = self.shape
        k2, n = other.shape
        if k != k2:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        zero = self.chart.zero()
        out = []
        for i in range(m):
            row = []
            for j in range(n):
                acc = zero
                for t in range(k):
                    a = self.rows[i][t]
                    if a:
                        b = other.rows[t][j]
                        if b:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return RatMatrix(self.chart, out)

    def apply(self, vec: Sequence[RatFun]) -> tuple[RatFun, ...]:
        return mat_vec(self.rows, vec, self.chart.zero())

    def at(self, point) -> list[list[Fraction]]:
        return evaluate_matrix(self.rows, point)

    def __eq__(self, other) -> bool:
        return isinstance(other, RatMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in r) for r in self.rows)
        return f"RatMatrix[{body}]"


def mat_vec(rows, vec, zero):
    out = []
    for r in rows:
        acc = zero
        for a, b in zip(r, vec):
            if a and b:
                acc = acc + a * b
        out.append(acc)
    return tuple(out)


def evaluate_matrix(rows, point) -> list[list[Fraction]]:
    """Evaluate a grid of RatFun at a rational point (raises PoleError)."""
    return [[x.eval(point) if isinstance(x, RatFun) else Fraction(x) for x in r] for r in rows]


def _pivot_key(x):
    if isinstance(x, RatFun):
        return x.complexity()
    return (0, 0)


def rref(rows, ncols: int | None = None):
    """Reduced row echelon form.

    Returns ``(reduced_rows, pivot_columns)``; only the first ``ncols``
    columns are eligible as pivots (the rest ride along, e.g. a right-hand
    side).  Input is not modified.
    """
    a = [list(r) for r in rows]
    if not a:
        return [], []
    width = len(a[0])
    ncols = width if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    m = len(a)
    for c in range(ncols):
        if r == m:
            break
        candidates = [i for i in range(r, m) if a[i][c]]
        if not candidates:
            continue
        p = min(candidates, key=lambda i: _pivot_key(a[i][c]))
        a[r], a[p] = a[p], a[r]
        pv = a[r][c]
        if pv != 1:
            inv = 1 / pv
            a[r] = [x * inv if x else x for x in a[r]]
        prow = a[r]
        for i in range(m):
            if i != r:
                f = a[i][c]
                if f:
                    a[i] = [x - f * y if y else x for x, y in zip(a[i], prow)]
        pivots.append(c)
        r += 1
    return a, pivots


@dataclass(frozen=True)
class LinearSolution:
    """A particular solution and a basis of the homogeneous solution space."""

    particular: tuple
    kernel: tuple[tuple, ...]


class InconsistentSystem(ValueError):
    """``A x = b`` has no solution; ``certificate`` is y with yA = 0, yb != 0."""

    def __init__(self, certificate):
        super().__init__("linear system is inconsistent")
        self.certificate = tuple(certificate)


def _zero_like(x):
    if isinstance(x, RatFun):
        return x.chart.zero()
    return Fraction(0)


def _one_like(x):
    if isinstance(x, RatFun):
        return x.chart.one()
    return Fraction(1)


def _matrix_rows(A):
    if isinstance(A, RatMatrix):
        return [list(r) for r in A.rows], A.chart
    rows = [list(r) for r in A]
    chart = None
    for r in rows:
        for x in r:
            if isinstance(x, RatFun):
                chart = x.chart
                break
        if chart is not None:
            break
    if chart is not None:
        rows = [[x if isinstance(x, RatFun) else RatFun.const(chart, x) for x in r] for r in rows]
    else:
        rows = [[x if isinstance(x, Fraction) else Fraction(x) for x in r] for r in rows]
    return rows, chart


def _kernel_from_rref(red, pivots, n, zero, one):
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [zero] * n
        v[f] = one
        for row, pc in zip(red, pivots):
            coeff = row[f]
            if coeff:
                v[pc] = -coeff
        basis.append(tuple(v))
    return basis


def solve_linear(A, b) -> LinearSolution:
    """Solve ``A x = b`` exactly over the fraction field.

    Returns a :class:`LinearSolution` whose particular solution has all free
    variables set to zero.  Raises :class:`InconsistentSystem` otherwise.
    """
    rows, chart = _matrix_rows(A)
    b = list(b)
    if len(rows) != len(b):
        raise ValueError(f"dimension mismatch: {len(rows)} rows, rhs of length {len(b)}")
    if chart is None:
        chart = next((x.chart for x in b if isinstance(x, RatFun)), None)
        if chart is not None:
            rows = [[RatFun.const(chart, x) for x in r] for r in rows]
    if chart is not None:
        b = [x if isinstance(x, RatFun) else RatFun.const(chart, x) for x in b]
        sample = chart.zero()
    else:
        b = [x if isinstance(x, Fraction) else Fraction(x) for x in b]
        sample = Fraction(0)
    zero, one = _zero_like(sample), _one_like(sample)
    n = len(rows[0]) if rows else 0
    aug = [r + [bi] for r, bi in zip(rows, b)]
    red, pivots = rref(aug, n)
    for row in red[len(pivots):]:
        if row[n]:
            raise InconsistentSystem(_inconsistency_certificate(rows, b, zero, one))
    x = [zero] * n
    for row, pc in zip(red, pivots):
        x[pc] = row[n]
    return LinearSolution(tuple(x), tuple(_kernel_from_rref(red, pivots, n, zero, one)))


def _inconsistency_certificate(rows, b, zero, one):
    m = len(rows)
    n = len(rows[0]) if rows else 0
    aug = [r + [bi] + [one if i == j else zero for j in range(m)] for i, (r, bi) in enumerate(zip(rows, b))]
    red, pivots = rref(aug, n)
    for row in red[len(pivots):]:
        if row[n]:
            return row[n + 1:]
    raise AssertionError("no inconsistent row found")


def kernel(A) -> tuple[tuple, ...]:
    """Basis of {x : A x = 0}."""
    rows, _ = _matrix_rows(A)
    if not rows:
        return ()
    sample = rows[0][0]
    n = len(rows[0])
    red, pivots = rref(rows)
    return tuple(_kernel_from_rref(red, pivots, n, _zero_like(sample), _one_like(sample)))


def rank(A) -> int:
    rows, _ = _matrix_rows(A)
    if not rows or not rows[0]:
        return 0
    return len(rref(rows)[1])


def _random_point(chart: Chart, rng: random.Random):
    return tuple(Fraction(rng.randint(-97, 97), rng.randint(1, 13)) for _ in range(chart.dim))


def generic_rank(A) -> int:
    """Rank over the fraction field (= rank at a generic point).

    A random rational evaluation gives a lower bound; when it already equals
    min(rows, cols) that is the answer, otherwise exact elimination decides.
    """
    rows, chart = _matrix_rows(A)
    if not rows or not rows[0]:
        return 0
    full = min(len(rows), len(rows[0]))
    if chart is not None:
        rng = random.Random(0x5EED)
        for _ in range(3):
            try:
                pt_rank = rank(evaluate_matrix(rows, _random_point(chart, rng)))
            except PoleError:
                continue
            if pt_rank == full:
                return full
            break
    return rank(rows)


def in_span(vectors, target):
    """Coefficients c with sum c_i vectors[i] == target, or None."""
    vectors = list(vectors)
    if not vectors:
        return None if any(target) else ()
    cols = list(zip(*vectors))  # rows of the transposed system
    try:
        return solve_linear([list(r) for r in cols], list(target)).particular
    except InconsistentSystem:
        return None


def same_span(us, vs) -> bool:
    """Whether two finite families span the same subspace."""
    us = [list(u) for u in us]
    vs = [list(v) for v in vs]
    ru = generic_rank(us) if us else 0
    rv = generic_rank(vs) if vs else 0
    if ru != rv:
        return False
    if not us:
        return True
    return generic_rank(us + vs) == ru
