"""Sections of the generalized tangent bundle TM + T*M and their brackets."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .calculus import (
    FORM,
    MULTIVECTOR,
    TensorField,
    exterior_derivative,
    interior_product,
    koszul_bracket,
    lie_bracket,
    lie_derivative,
    one_form,
    pair,
    schouten_bracket,
    sharp,
    vector_field,
)
from .exact import Chart, RatFun

__all__ = [
    "GenSection",
    "NotPoissonError",
    "section",
    "pairing",
    "courant_bracket",
    "bialgebroid_bracket",
    "anchor",
    "is_poisson",
    "d_pi",
    "lie_alpha",
]


class NotPoissonError(ValueError):
    def __init__(self, witness: TensorField):
        super().__init__(f"bivector is not Poisson: [pi, pi] = {witness}")
        self.witness = witness


@dataclass(frozen=True, eq=True)
class GenSection:
    """A section ``X + alpha`` of TM + T*M."""

    vec: TensorField
    form: TensorField

    def __post_init__(self):
        if self.vec.chart != self.form.chart:
            raise ValueError("vector and form parts live on different charts")
        if self.vec.degree != 1 or self.form.degree != 1:
            raise ValueError("generalized sections have degree-1 parts")
        if self.vec.kind != MULTIVECTOR or self.form.kind != FORM:
            raise ValueError("vec must be a vector field and form a 1-form")

    @property
    def chart(self) -> Chart:
        return self.vec.chart

    @classmethod
    def zero(cls, chart: Chart) -> GenSection:
        return cls(TensorField.zero(chart, MULTIVECTOR, 1), TensorField.zero(chart, FORM, 1))

    def __add__(self, other: GenSection) -> GenSection:
        return GenSection(self.vec + other.vec, self.form + other.form)

    def __sub__(self, other: GenSection) -> GenSection:
        return GenSection(self.vec - other.vec, self.form - other.form)

    def __neg__(self) -> GenSection:
        return GenSection(-self.vec, -self.form)

    def scale(self, f) -> GenSection:
        return GenSection(self.vec.scale(f), self.form.scale(f))

    def __mul__(self, f) -> GenSection:
        return self.scale(f)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.vec and not self.form

    def __bool__(self) -> bool:
        return not self.is_zero()

    def row(self) -> tuple[RatFun, ...]:
        """Coefficients (X^1..X^n, alpha_1..alpha_n)."""
        return self.vec.components() + self.form.components()

    def at(self, point) -> tuple[Fraction, ...]:
        return tuple(c.eval(point) for c in self.row())

    @classmethod
    def from_row(cls, chart: Chart, row: Sequence) -> GenSection:
        n = chart.dim
        if len(row) != 2 * n:
            raise ValueError(f"row needs {2 * n} entries")
        return cls(vector_field(chart, row[:n]), one_form(chart, row[n:]))

    def __str__(self) -> str:
        return f"[{self.vec}] + [{self.form}]"


def section(chart: Chart, vec: Sequence | None = None, form: Sequence | None = None) -> GenSection:
    """Build ``X + alpha`` from coefficient lists (expressions, numbers or RatFun)."""
    vec = vec if vec is not None else [0] * chart.dim
    form = form if form is not None else [0] * chart.dim
    return GenSection(vector_field(chart, vec), one_form(chart, form))


def _fn(chart: Chart, f: RatFun, kind: str = FORM) -> TensorField:
    return TensorField(chart, kind, 0, {(): f})


def pairing(s: GenSection, t: GenSection) -> RatFun:
    """``<X + a, Y + b>_+ = (b(X) + a(Y)) / 2``."""
    return (pair(t.form, s.vec) + pair(s.form, t.vec)) / 2


def courant_bracket(s: GenSection, t: GenSection) -> GenSection:
    """``[X,Y] + L_X b - L_Y a + 1/2 d(a(Y) - b(X))``."""
    X, a = s.vec, s.form
    Y, b = t.vec, t.form
    chart = s.chart
    vec = lie_bracket(X, Y)
    h = (pair(a, Y) - pair(b, X)) / 2
    form = lie_derivative(X, b) - lie_derivative(Y, a) + exterior_derivative(_fn(chart, h))
    return GenSection(vec, form)


@lru_cache(maxsize=256)
def _poisson_witness(pi: TensorField) -> TensorField:
    return schouten_bracket(pi, pi)


def is_poisson(pi: TensorField) -> bool:
    return _poisson_witness(pi).is_zero()


def require_poisson(pi: TensorField) -> None:
    w = _poisson_witness(pi)
    if w:
        raise NotPoissonError(w)


def d_pi(pi: TensorField, T: TensorField) -> TensorField:
    """``d_pi T = [pi, T]``; functions are passed as degree-0 fields."""
    if T.degree == 0 and T.kind != MULTIVECTOR:
        T = _fn(T.chart, T.scalar(), MULTIVECTOR)
    return schouten_bracket(pi, T)


def lie_alpha(pi: TensorField, alpha: TensorField, Y: TensorField) -> TensorField:
    """``L_alpha Y = i_alpha d_pi Y + d_pi i_alpha Y`` for a vector field ``Y``."""
    first = interior_product(alpha, d_pi(pi, Y))
    f = pair(alpha, Y)
    second = d_pi(pi, _fn(Y.chart, f, MULTIVECTOR))
    return first + second


def bialgebroid_bracket(s: GenSection, t: GenSection, pi: TensorField, check: bool = True) -> GenSection:
    """Courant bracket of the Poisson-manifold Lie bialgebroid (TM, T*M, pi)."""
    if check:
        require_poisson(pi)
    X, a = s.vec, s.form
    Y, b = t.vec, t.form
    chart = s.chart
    h = (pair(a, Y) - pair(b, X)) / 2
    vec = lie_bracket(X, Y) + lie_alpha(pi, a, Y) - lie_alpha(pi, b, X)
    vec = vec - d_pi(pi, _fn(chart, h, MULTIVECTOR))
    form = koszul_bracket(pi, a, b) + lie_derivative(X, b) - lie_derivative(Y, a)
    form = form + exterior_derivative(_fn(chart, h))
    return GenSection(vec, form)


def anchor(s: GenSection, pi: TensorField | None = None) -> TensorField:
    """``rho(s)``, or ``rho(s) + pi#(rho_*(s))`` in the bialgebroid case."""
    if pi is None:
        return s.vec
    return s.vec + sharp(pi, s.form)
