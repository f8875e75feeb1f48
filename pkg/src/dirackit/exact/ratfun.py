"""Charts, polynomials and rational functions with exact rational coefficients.

Storage and gcd are delegated to sympy's sparse polynomial rings (graded
lexicographic order, coefficients in QQ backed by gmpy2).  Canonical form of a
rational function: coprime numerator and denominator, denominator monic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, Sequence

from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

__all__ = [
    "Chart",
    "Poly",
    "RatFun",
    "PoleError",
    "ChartMismatch",
    "as_fraction",
]


class PoleError(ZeroDivisionError):
    """Raised when a denominator vanishes at an evaluation point."""


class ChartMismatch(ValueError):
    pass


@lru_cache(maxsize=None)
def _ring(names: tuple[str, ...]) -> PolyRing:
    if not names:
        # sympy rings need at least one generator; a hidden one stands in
        # for the 0-dimensional chart and is never used in any monomial.
        return PolyRing(("_pt",), QQ, grlex)
    return PolyRing(names, QQ, grlex)


@dataclass(frozen=True)
class Chart:
    """An ordered list of coordinate names on a single chart."""

    vars: tuple[str, ...]
    ring: PolyRing = field(init=False, repr=False, compare=False, hash=False)

    def __init__(self, vars: Iterable[str]):
        names = tuple(vars)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        for name in names:
            if not name.isidentifier():
                raise ValueError(f"invalid coordinate name {name!r}")
        object.__setattr__(self, "vars", names)
        object.__setattr__(self, "ring", _ring(names))

    @property
    def dim(self) -> int:
        return len(self.vars)

    def index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r} on chart {self.vars}") from None

    def coord(self, i: int) -> RatFun:
        """The i-th coordinate function."""
        return RatFun._raw(self, self.ring.gens[i], self.ring.one)

    def coords(self) -> tuple[RatFun, ...]:
        return tuple(self.coord(i) for i in range(self.dim))

    def const(self, c) -> RatFun:
        return RatFun.const(self, c)

    def zero(self) -> RatFun:
        return RatFun._raw(self, self.ring.zero, self.ring.one)

    def one(self) -> RatFun:
        return RatFun._raw(self, self.ring.one, self.ring.one)

    def __str__(self) -> str:
        return "(" + ", ".join(self.vars) + ")"


def as_fraction(q) -> Fraction:
    """Convert an exact rational (int, Fraction, gmpy2.mpq) to Fraction."""
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    return Fraction(int(q.numerator), int(q.denominator))


def _to_qq(c):
    if isinstance(c, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(c, int):
        return QQ(c)
    if isinstance(c, Fraction):
        return QQ(c.numerator, c.denominator)
    if isinstance(c, Rational):
        return QQ(int(c.numerator), int(c.denominator))
    if type(c) is QQ.dtype:
        return c
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


def _fmt_coeff(c) -> str:
    c = as_fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _fmt_poly(p: PolyElement, names: Sequence[str]) -> str:
    if not p:
        return "0"
    pieces = []
    for monom, coeff in p.terms():  # descending grlex
        c = as_fraction(coeff)
        neg = c < 0
        c = -c if neg else c
        factors = []
        for name, e in zip(names, monom):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        if not factors:
            body = _fmt_coeff(c)
        elif c == 1:
            body = "*".join(factors)
        else:
            body = _fmt_coeff(c) + "*" + "*".join(factors)
        if not pieces:
            pieces.append(("-" if neg else "") + body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    return "".join(pieces)


def _eval_poly(p: PolyElement, point) -> object:
    total = QQ.zero
    for monom, coeff in p.items():
        term = coeff
        for e, v in zip(monom, point):
            if e:
                term = term * v**e
        total += term
    return total


def _total_degree(p: PolyElement) -> int:
    if not p:
        return -1
    return max(sum(m) for m in p.keys())


class Poly:
    """A multivariate polynomial over QQ on a chart.

    Thin immutable view over a sympy ring element.  ``terms`` maps exponent
    vectors to nonzero :class:`~fractions.Fraction` coefficients.
    """

    __slots__ = ("chart", "_p")

    def __init__(self, chart: Chart, terms: Mapping[tuple[int, ...], object] | PolyElement | None = None):
        self.chart = chart
        if isinstance(terms, PolyElement):
            self._p = terms
            return
        p = chart.ring.zero
        if terms:
            clean = {}
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != chart.dim:
                    raise ValueError(f"exponent vector {exps} does not match chart dimension {chart.dim}")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                q = _to_qq(c)
                if q:
                    clean[exps] = q
            p = chart.ring.from_dict(clean) if clean else chart.ring.zero
        self._p = p

    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        if self.chart.dim == 0:
            return {(): as_fraction(c) for _, c in self._p.items()}
        return {m: as_fraction(c) for m, c in self._p.terms()}

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return _total_degree(self._p)

    def is_zero(self) -> bool:
        return not self._p

    def __bool__(self) -> bool:
        return bool(self._p)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.chart == other.chart and self._p == other._p
        if isinstance(other, (int, Fraction)):
            return self._p == self.chart.ring(_to_qq(other))
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.chart.vars, self._p))

    def _wrap(self, other) -> PolyElement:
        if isinstance(other, Poly):
            if other.chart != self.chart:
                raise ChartMismatch(f"{self.chart} vs {other.chart}")
            return other._p
        return self.chart.ring(_to_qq(other))

    def __add__(self, other):
        return Poly(self.chart, self._p + self._wrap(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Poly(self.chart, self._p - self._wrap(other))

    def __rsub__(self, other):
        return Poly(self.chart, self._wrap(other) - self._p)

    def __mul__(self, other):
        return Poly(self.chart, self._p * self._wrap(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Poly(self.chart, -self._p)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        return Poly(self.chart, self._p**n)

    def diff(self, i: int) -> Poly:
        return Poly(self.chart, self._p.diff(self.chart.ring.gens[i]))

    def __call__(self, point) -> Fraction:
        return as_fraction(_eval_poly(self._p, _point(self.chart, point)))

    def to_ratfun(self) -> RatFun:
        return RatFun._raw(self.chart, self._p, self.chart.ring.one)

    def __str__(self) -> str:
        return _fmt_poly(self._p, self.chart.vars)

    def __repr__(self) -> str:
        return f"Poly({str(self)!r} on {self.chart})"


def _point(chart: Chart, point) -> tuple:
    if len(point) != chart.dim:
        raise ValueError(f"point {tuple(point)} has wrong dimension for chart {chart}")
    return tuple(_to_qq(v) for v in point)


class RatFun:
    """An element of QQ(x_1, ..., x_n) in canonical form.

    Numerator and denominator are coprime and the denominator is monic with
    respect to graded lexicographic order, so equal functions have equal
    representations.
    """

    __slots__ = ("chart", "_num", "_den", "_hash")

    def __init__(self, chart: Chart, num, den=1):
        ring = chart.ring
        n = _coerce_poly(chart, num)
        d = _coerce_poly(chart, den)
        if not d:
            raise ZeroDivisionError("zero denominator")
        self.chart = chart
        self._num, self._den = _normalize(ring, n, d)
        self._hash = None

    @classmethod
    def _raw(cls, chart: Chart, num: PolyElement, den: PolyElement) -> RatFun:
        obj = object.__new__(cls)
        obj.chart = chart
        obj._num = num
        obj._den = den
        obj._hash = None
        return obj

    @classmethod
    def const(cls, chart: Chart, c) -> RatFun:
        return cls._raw(chart, chart.ring(_to_qq(c)), chart.ring.one)

    @classmethod
    def _make(cls, chart: Chart, num: PolyElement, den: PolyElement) -> RatFun:
        n, d = _normalize(chart.ring, num, den)
        return cls._raw(chart, n, d)

    # -- views -----------------------------------------------------------
    @property
    def num(self) -> Poly:
        return Poly(self.chart, self._num)

    @property
    def den(self) -> Poly:
        return Poly(self.chart, self._den)

    def is_zero(self) -> bool:
        return not self._num

    def __bool__(self) -> bool:
        return bool(self._num)

    def is_polynomial(self) -> bool:
        return self._den == 1

    def is_constant(self) -> bool:
        return self._den == 1 and self._num.is_ground

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return as_fraction(self._num.LC) if self._num else Fraction(0)

    def complexity(self) -> tuple[int, int]:
        """Sort key used for pivot selection: (total degree, term count)."""
        return (
            _total_degree(self._num) + max(_total_degree(self._den), 0),
            len(self._num) + len(self._den),
        )

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other) -> RatFun:
        if isinstance(other, RatFun):
            if other.chart is not self.chart and other.chart != self.chart:
                raise ChartMismatch(f"{self.chart} vs {other.chart}")
            return other
        if isinstance(other, Poly):
            return other.to_ratfun()
        return RatFun.const(self.chart, other)

    def __add__(self, other) -> RatFun:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not o._num:
            return self
        if not self._num:
            return o
        d1, d2 = self._den, o._den
        if d1 == 1 and d2 == 1:
            return RatFun._raw(self.chart, self._num + o._num, d1)
        if d1 == d2:
            return RatFun._make(self.chart, self._num + o._num, d1)
        return RatFun._make(self.chart, self._num * d2 + o._num * d1, d1 * d2)

    __radd__ = __add__

    def __neg__(self) -> RatFun:
        return RatFun._raw(self.chart, -self._num, self._den)

    def __pos__(self) -> RatFun:
        return self

    def __sub__(self, other) -> RatFun:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> RatFun:
        return (-self) + other

    def __mul__(self, other) -> RatFun:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not self._num or not o._num:
            return self.chart.zero()
        if self._den == 1 and o._den == 1:
            return RatFun._raw(self.chart, self._num * o._num, self._den)
        if o._num.is_ground and o._den == 1:
            return RatFun._raw(self.chart, self._num * o._num.LC, self._den)
        if self._num.is_ground and self._den == 1:
            return RatFun._raw(self.chart, o._num * self._num.LC, o._den)
        return RatFun._make(self.chart, self._num * o._num, self._den * o._den)

    __rmul__ = __mul__

    def inverse(self) -> RatFun:
        if not self._num:
            raise ZeroDivisionError("division by the zero rational function")
        return RatFun._make(self.chart, self._den, self._num)

    def __truediv__(self, other) -> RatFun:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not o._num:
            raise ZeroDivisionError("division by the zero rational function")
        if o._den == 1 and o._num.is_ground:
            return RatFun._raw(self.chart, self._num.quo_ground(o._num.LC), self._den)
        return RatFun._make(self.chart, self._num * o._den, self._den * o._num)

    def __rtruediv__(self, other) -> RatFun:
        return self._coerce(other) / self

    def __pow__(self, n: int) -> RatFun:
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return self.inverse() ** (-n)
        return RatFun._raw(self.chart, self._num**n, self._den**n)

    def diff(self, i: int) -> RatFun:
        """Partial derivative with respect to the i-th coordinate."""
        x = self.chart.ring.gens[i]
        if self._den == 1:
            return RatFun._raw(self.chart, self._num.diff(x), self._den)
        n, d = self._num, self._den
        return RatFun._make(self.chart, n.diff(x) * d - n * d.diff(x), d * d)

    # -- comparison ------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, RatFun):
            return self.chart == other.chart and self._num == other._num and self._den == other._den
        if isinstance(other, (int, Fraction)):
            return self._den == 1 and self._num == self.chart.ring(_to_qq(other))
        if isinstance(other, Poly):
            return self.chart == other.chart and self._den == 1 and self._num == other._p
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.chart.vars, self._num, self._den))
        return self._hash

    # -- evaluation and substitution ------------------------------------
    def __call__(self, point) -> Fraction:
        return self.eval(point)

    def eval(self, point) -> Fraction:
        """Exact value at a rational point; raises :class:`PoleError` on a pole."""
        pt = _point(self.chart, point)
        return as_fraction(self._eval_qq(pt))

    def _eval_qq(self, pt):
        d = _eval_poly(self._den, pt)
        if not d:
            raise PoleError(f"denominator {self.den} vanishes at {tuple(as_fraction(v) for v in pt)}")
        return _eval_poly(self._num, pt) / d

    def compose(self, chart: Chart, images: Sequence[RatFun]) -> RatFun:
        """Substitute ``images[i]`` (functions on ``chart``) for the i-th variable."""
        if len(images) != self.chart.dim:
            raise ValueError("wrong number of substitution images")
        num = _subs(self._num, chart, images)
        if self._den == 1:
            return num
        return num / _subs(self._den, chart, images)

    def __str__(self) -> str:
        if self._den == 1:
            return _fmt_poly(self._num, self.chart.vars)
        return f"({_fmt_poly(self._num, self.chart.vars)})/({_fmt_poly(self._den, self.chart.vars)})"

    def __repr__(self) -> str:
        return f"RatFun({str(self)!r})"


def _coerce_poly(chart: Chart, value) -> PolyElement:
    if isinstance(value, PolyElement):
        return value
    if isinstance(value, Poly):
        if value.chart != chart:
            raise ChartMismatch(f"{value.chart} vs {chart}")
        return value._p
    return chart.ring(_to_qq(value))


def _normalize(ring: PolyRing, n: PolyElement, d: PolyElement) -> tuple[PolyElement, PolyElement]:
    if not n:
        return ring.zero, ring.one
    if d.is_ground:
        lc = d.LC
        if lc == 1:
            return n, d
        return n.quo_ground(lc), ring.one
    n, d = n.cancel(d)
    lc = d.LC
    if lc != 1:
        n = n.quo_ground(lc)
        d = d.quo_ground(lc)
    return n, d


def _subs(p: PolyElement, chart: Chart, images: Sequence[RatFun]) -> RatFun:
    result = chart.zero()
    powers: dict[tuple[int, int], RatFun] = {}
    for monom, coeff in p.items():
        term = RatFun.const(chart, coeff)
        for i, e in enumerate(monom):
            if e:
                key = (i, e)
                if key not in powers:
                    powers[key] = images[i] ** e
                term = term * powers[key]
        result = result + term
    return result
