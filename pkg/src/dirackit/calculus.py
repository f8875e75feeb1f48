"""Coordinate Cartan calculus on a single chart.

Multivector fields and differential forms are stored as antisymmetric
coefficient tables keyed by strictly increasing index tuples.  Sign
conventions:

* ``i_alpha(X_1 ^ ... ^ X_k) = sum_j (-1)^(j+1) <alpha, X_j> X_1 ^ ..^X_j^.. ^ X_k``
  (contraction in the first slot), likewise ``i_X`` on forms;
* ``sharp(pi, alpha) = i_alpha pi``, so ``<beta, sharp(pi, alpha)> = pi(alpha, beta)``;
* the Schouten bracket is the graded biderivation with ``[X, Y]`` the Lie
  bracket of vector fields and ``[X, P] = L_X P``; it satisfies
  ``[P, Q] = -(-1)^((p-1)(q-1)) [Q, P]``;
* ``d_pi = [pi, .]``, which gives ``d_pi f = -sharp(pi, df)``;
* the Koszul bracket ``[a, b]_pi = L_{pi# a} b - L_{pi# b} a - d pi(a, b)``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .exact import Chart, RatFun, RatMatrix, parse_expr

__all__ = [
    "TensorField",
    "PolyMap",
    "MULTIVECTOR",
    "FORM",
    "vector_field",
    "one_form",
    "bivector",
    "two_form",
    "volume_form",
    "scalar",
    "wedge",
    "exterior_derivative",
    "interior_product",
    "lie_derivative",
    "schouten_bracket",
    "divergence",
    "pullback_form",
    "pushforward_vector_at",
    "apply_vector",
    "pair",
    "sharp",
    "flat",
    "koszul_bracket",
    "lie_bracket",
    "poisson_bracket",
    "modular_vector_field",
]

MULTIVECTOR = "multivector"
FORM = "form"


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]] | None:
    """Sign of the permutation sorting ``idx``; None if an index repeats."""
    if len(set(idx)) != len(idx):
        return None
    inversions = 0
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] > idx[b]:
                inversions += 1
    return (-1 if inversions % 2 else 1), tuple(sorted(idx))


def _merge(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
    """``theta_a theta_b = sign * theta_(a u b)`` for disjoint sorted tuples."""
    if set(a) & set(b):
        return None
    inversions = sum(1 for i in a for j in b if i > j)
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


class TensorField:
    """A multivector field or differential form of fixed degree on a chart."""

    __slots__ = ("chart", "kind", "degree", "comps")

    def __init__(self, chart: Chart, kind: str, degree: int, comps: Mapping[tuple[int, ...], object] | None = None):
        if kind not in (MULTIVECTOR, FORM):
            raise ValueError(f"kind must be {MULTIVECTOR!r} or {FORM!r}")
        if degree < 0:
            raise ValueError("negative degree")
        self.chart = chart
        self.kind = kind
        self.degree = degree
        table: dict[tuple[int, ...], RatFun] = {}
        for idx, value in (comps or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} does not have length {degree}")
            if any(not 0 <= i < chart.dim for i in idx):
                raise ValueError(f"index {idx} out of range for chart {chart}")
            if not isinstance(value, RatFun):
                value = RatFun.const(chart, value)
            elif value.chart != chart:
                raise ValueError("component lives on a different chart")
            ss = _sort_sign(idx)
            if ss is None:
                continue
            sign, key = ss
            table[key] = table[key] + value * sign if key in table else (value if sign == 1 else -value)
        self.comps = {k: v for k, v in table.items() if v}

    @classmethod
    def _clean(cls, chart, kind, degree, table) -> TensorField:
        obj = object.__new__(cls)
        obj.chart = chart
        obj.kind = kind
        obj.degree = degree
        obj.comps = {k: v for k, v in table.items() if v}
        return obj

    @classmethod
    def zero(cls, chart: Chart, kind: str, degree: int) -> TensorField:
        return cls._clean(chart, kind, degree, {})

    # -- access ----------------------------------------------------------
    def __getitem__(self, idx) -> RatFun:
        if isinstance(idx, int):
            idx = (idx,)
        ss = _sort_sign(tuple(idx))
        if ss is None:
            return self.chart.zero()
        sign, key = ss
        value = self.comps.get(key)
        if value is None:
            return self.chart.zero()
        return value if sign == 1 else -value

    def components(self) -> tuple[RatFun, ...]:
        """Coefficient list of a degree-1 field (or the scalar of degree 0)."""
        if self.degree == 0:
            return (self[()],)
        if self.degree != 1:
            raise ValueError("components() needs degree <= 1; use matrix() for degree 2")
        return tuple(self[(i,)] for i in range(self.chart.dim))

    def matrix(self) -> tuple[tuple[RatFun, ...], ...]:
        if self.degree != 2:
            raise ValueError("matrix() needs degree 2")
        n = self.chart.dim
        return tuple(tuple(self[(i, j)] for j in range(n)) for i in range(n))

    def scalar(self) -> RatFun:
        if self.degree != 0:
            raise ValueError("not a function")
        return self[()]

    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self) -> bool:
        return bool(self.comps)

    # -- linear structure ------------------------------------------------
    def _check(self, other: TensorField):
        if not isinstance(other, TensorField):
            raise TypeError(f"expected TensorField, got {type(other).__name__}")
        if other.chart != self.chart or other.degree != self.degree:
            raise ValueError("incompatible tensor fields")
        if other.kind != self.kind and self.degree > 0:
            raise ValueError("cannot add a form to a multivector")

    def __add__(self, other: TensorField) -> TensorField:
        self._check(other)
        table = dict(self.comps)
        for k, v in other.comps.items():
            table[k] = table[k] + v if k in table else v
        return TensorField._clean(self.chart, self.kind, self.degree, table)

    def __neg__(self) -> TensorField:
        return TensorField._clean(self.chart, self.kind, self.degree, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other: TensorField) -> TensorField:
        return self + (-other)

    def scale(self, f) -> TensorField:
        if not f:
            return TensorField.zero(self.chart, self.kind, self.degree)
        return TensorField._clean(self.chart, self.kind, self.degree, {k: v * f for k, v in self.comps.items()})

    def __mul__(self, f) -> TensorField:
        if isinstance(f, TensorField):
            return NotImplemented
        return self.scale(f)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorField):
            return NotImplemented
        if self.chart != other.chart or self.degree != other.degree:
            return False
        if self.degree > 0 and self.kind != other.kind:
            return not self.comps and not other.comps
        return self.comps == other.comps

    def __hash__(self):
        return hash((self.kind, self.degree, frozenset(self.comps.items())))

    def map_coefficients(self, fn) -> TensorField:
        return TensorField._clean(self.chart, self.kind, self.degree, {k: fn(v) for k, v in self.comps.items()})

    def at(self, point) -> dict[tuple[int, ...], Fraction]:
        return {k: v.eval(point) for k, v in self.comps.items()}

    def __repr__(self) -> str:
        return f"TensorField({self.kind}, degree={self.degree}, {self})"

    def __str__(self) -> str:
        if not self.comps:
            return "0"
        names = self.chart.vars
        parts = []
        for key in sorted(self.comps):
            if self.kind == FORM:
                basis = "^".join("d" + names[i] for i in key)
            else:
                basis = "^".join("d/d" + names[i] for i in key)
            coeff = str(self.comps[key])
            if not key:
                parts.append(coeff)
            else:
                parts.append(f"({coeff})*{basis}")
        return " + ".join(parts)


# -- constructors -----------------------------------------------------------

def _coerce_fn(chart: Chart, value) -> RatFun:
    if isinstance(value, RatFun):
        return value
    if isinstance(value, str):
        return parse_expr(value, chart)
    return RatFun.const(chart, value)


def scalar(chart: Chart, f) -> TensorField:
    return TensorField(chart, FORM, 0, {(): _coerce_fn(chart, f)})


def vector_field(chart: Chart, comps: Sequence) -> TensorField:
    if len(comps) != chart.dim:
        raise ValueError(f"need {chart.dim} components, got {len(comps)}")
    return TensorField(chart, MULTIVECTOR, 1, {(i,): _coerce_fn(chart, c) for i, c in enumerate(comps)})


def one_form(chart: Chart, comps: Sequence) -> TensorField:
    if len(comps) != chart.dim:
        raise ValueError(f"need {chart.dim} components, got {len(comps)}")
    return TensorField(chart, FORM, 1, {(i,): _coerce_fn(chart, c) for i, c in enumerate(comps)})


def _from_matrix(chart: Chart, kind: str, matrix: Sequence[Sequence]) -> TensorField:
    n = chart.dim
    if len(matrix) != n or any(len(r) != n for r in matrix):
        raise ValueError(f"need a {n}x{n} matrix")
    m = [[_coerce_fn(chart, x) for x in row] for row in matrix]
    for i in range(n):
        if m[i][i]:
            raise ValueError(f"diagonal entry ({i},{i}) of an antisymmetric matrix is nonzero")
        for j in range(i + 1, n):
            if m[i][j] + m[j][i]:
                raise ValueError(f"matrix is not antisymmetric at ({i},{j})")
    return TensorField(chart, kind, 2, {(i, j): m[i][j] for i in range(n) for j in range(i + 1, n)})


def bivector(chart: Chart, matrix: Sequence[Sequence]) -> TensorField:
    """Bivector with ``pi(dx_i, dx_j) = matrix[i][j]``."""
    return _from_matrix(chart, MULTIVECTOR, matrix)


def two_form(chart: Chart, matrix: Sequence[Sequence]) -> TensorField:
    return _from_matrix(chart, FORM, matrix)


def volume_form(chart: Chart, coeff=1) -> TensorField:
    """``coeff * dx_1 ^ ... ^ dx_n``; the coefficient must be nowhere vanishing (caller's contract)."""
    c = _coerce_fn(chart, coeff)
    if not c:
        raise ValueError("volume form coefficient is identically zero")
    return TensorField(chart, FORM, chart.dim, {tuple(range(chart.dim)): c})


# -- algebra ------------------------------------------------------------------

def wedge(a: TensorField, b: TensorField) -> TensorField:
    if a.degree and b.degree and a.kind != b.kind:
        raise ValueError("cannot wedge a form with a multivector")
    kind = a.kind if a.degree else b.kind
    table: dict[tuple[int, ...], RatFun] = {}
    for ka, va in a.comps.items():
        for kb, vb in b.comps.items():
            m = _merge(ka, kb)
            if m is None:
                continue
            sign, key = m
            term = va * vb
            if sign < 0:
                term = -term
            table[key] = table[key] + term if key in table else term
    return TensorField._clean(a.chart, kind, a.degree + b.degree, table)


def pair(alpha: TensorField, X: TensorField) -> RatFun:
    """``<alpha, X>`` for a 1-form and a vector field."""
    if alpha.degree != 1 or X.degree != 1 or alpha.kind == X.kind:
        raise ValueError("pair() needs a 1-form and a vector field")
    acc = alpha.chart.zero()
    for k, v in alpha.comps.items():
        w = X.comps.get(k)
        if w is not None:
            acc = acc + v * w
    return acc


def apply_vector(X: TensorField, f: RatFun) -> RatFun:
    """Directional derivative ``X(f)``."""
    if X.kind != MULTIVECTOR or X.degree != 1:
        raise ValueError("apply_vector() needs a vector field")
    acc = X.chart.zero()
    for (i,), v in X.comps.items():
        df = f.diff(i)
        if df:
            acc = acc + v * df
    return acc


def _d_coeff_table(t: TensorField, i: int) -> dict:
    return {k: v.diff(i) for k, v in t.comps.items()}


def exterior_derivative(omega: TensorField) -> TensorField:
    if omega.kind != FORM and omega.degree > 0:
        raise ValueError("exterior derivative needs a form")
    n = omega.chart.dim
    table: dict[tuple[int, ...], RatFun] = {}
    for key, f in omega.comps.items():
        for j in range(n):
            if j in key:
                continue
            df = f.diff(j)
            if not df:
                continue
            sign, new = _merge((j,), key)
            term = df if sign > 0 else -df
            table[new] = table[new] + term if new in table else term
    return TensorField._clean(omega.chart, FORM, omega.degree + 1, table)


def interior_product(c: TensorField, T: TensorField) -> TensorField:
    """Contraction of ``T`` in its first slot by the degree-1 field ``c`` of opposite kind."""
    if c.degree != 1:
        raise ValueError("interior product needs a degree-1 contracting field")
    if T.degree == 0:
        return TensorField.zero(T.chart, T.kind, 0)
    if c.kind == T.kind:
        raise ValueError("interior product needs fields of opposite kind")
    table: dict[tuple[int, ...], RatFun] = {}
    for key, v in T.comps.items():
        for pos, i in enumerate(key):
            ci = c.comps.get((i,))
            if ci is None:
                continue
            rest = key[:pos] + key[pos + 1:]
            term = ci * v
            if pos % 2:
                term = -term
            table[rest] = table[rest] + term if rest in table else term
    return TensorField._clean(T.chart, T.kind, T.degree - 1, table)


def _rderiv(key: tuple[int, ...], i: int):
    pos = key.index(i)
    sign = -1 if (len(key) - 1 - pos) % 2 else 1
    return sign, key[:pos] + key[pos + 1:]


def _lderiv(key: tuple[int, ...], i: int):
    pos = key.index(i)
    sign = -1 if pos % 2 else 1
    return sign, key[:pos] + key[pos + 1:]


def schouten_bracket(P: TensorField, Q: TensorField) -> TensorField:
    """Schouten-Nijenhuis bracket of multivector fields (functions count as degree 0)."""
    for T in (P, Q):
        if T.degree > 0 and T.kind != MULTIVECTOR:
            raise ValueError("Schouten bracket needs multivector fields")
    if P.chart != Q.chart:
        raise ValueError("fields on different charts")
    p, q = P.degree, Q.degree
    if p + q == 0:
        raise ValueError("Schouten bracket of two functions is undefined (degree -1)")
    n = P.chart.dim
    table: dict[tuple[int, ...], RatFun] = {}

    def add(sign, key_a, key_b, coeff):
        m = _merge(key_a, key_b)
        if m is None or not coeff:
            return
        s2, key = m
        term = coeff if sign * s2 > 0 else -coeff
        table[key] = table[key] + term if key in table else term

    for i in range(n):
        dQ = _d_coeff_table(Q, i)
        dP = _d_coeff_table(P, i)
        for kp, vp in P.comps.items():
            if i in kp:
                s1, rest = _rderiv(kp, i)
                for kq, dvq in dQ.items():
                    if dvq:
                        add(s1, rest, kq, vp * dvq)
        for kq, vq in Q.comps.items():
            if i in kq:
                s2, rest = _lderiv(kq, i)
                for kp, dvp in dP.items():
                    if dvp:
                        add(-s2, kp, rest, dvp * vq)
    return TensorField._clean(P.chart, MULTIVECTOR, p + q - 1, table)


def lie_bracket(X: TensorField, Y: TensorField) -> TensorField:
    """Lie bracket of vector fields."""
    return schouten_bracket(X, Y)


def lie_derivative(X: TensorField, T: TensorField) -> TensorField:
    """``L_X T``: Cartan's formula on forms, the Schouten bracket on multivectors."""
    if X.kind != MULTIVECTOR or X.degree != 1:
        raise ValueError("Lie derivative along a vector field only")
    if T.degree == 0:
        return TensorField(T.chart, T.kind, 0, {(): apply_vector(X, T.scalar())})
    if T.kind == MULTIVECTOR:
        return schouten_bracket(X, T)
    out = interior_product(X, exterior_derivative(T))
    return out + exterior_derivative(interior_product(X, T))


def divergence(X: TensorField, mu: TensorField) -> RatFun:
    """``div_mu X`` defined by ``L_X mu = div_mu(X) mu``."""
    n = X.chart.dim
    if mu.kind != FORM or mu.degree != n:
        raise ValueError("divergence needs a top-degree volume form")
    m = mu[tuple(range(n))]
    if not m:
        raise ValueError("volume form coefficient is identically zero")
    acc = X.chart.zero()
    for (i,), v in X.comps.items():
        acc = acc + (m * v).diff(i)
    return acc / m


def sharp(pi: TensorField, alpha: TensorField) -> TensorField:
    """``pi#(alpha) = i_alpha pi``."""
    if pi.kind != MULTIVECTOR or pi.degree != 2:
        raise ValueError("sharp() needs a bivector")
    return interior_product(alpha, pi)


def flat(omega: TensorField, X: TensorField) -> TensorField:
    """``omega_flat(X) = i_X omega``."""
    if omega.kind != FORM or omega.degree != 2:
        raise ValueError("flat() needs a 2-form")
    return interior_product(X, omega)


def poisson_bracket(pi: TensorField, f: RatFun, g: RatFun) -> RatFun:
    """``{f, g} = pi(df, dg)``."""
    df = exterior_derivative(TensorField(f.chart, FORM, 0, {(): f}))
    dg = exterior_derivative(TensorField(g.chart, FORM, 0, {(): g}))
    return pair(dg, sharp(pi, df))


def koszul_bracket(pi: TensorField, alpha: TensorField, beta: TensorField) -> TensorField:
    a_sharp = sharp(pi, alpha)
    b_sharp = sharp(pi, beta)
    pi_ab = pair(beta, a_sharp)
    out = lie_derivative(a_sharp, beta) - lie_derivative(b_sharp, alpha)
    return out - exterior_derivative(TensorField(pi.chart, FORM, 0, {(): pi_ab}))


def modular_vector_field(pi: TensorField, mu: TensorField | None = None) -> TensorField:
    """``X_mu = sum_i div_mu(pi# dx_i) d/dx_i``: divergences of coordinate Hamiltonian fields."""
    chart = pi.chart
    mu = mu if mu is not None else volume_form(chart)
    comps = []
    for i in range(chart.dim):
        dxi = TensorField(chart, FORM, 1, {(i,): 1})
        comps.append(divergence(sharp(pi, dxi), mu))
    return vector_field(chart, comps)


# -- maps --------------------------------------------------------------------

class PolyMap:
    """A polynomial map between charts, one polynomial per target coordinate."""

    __slots__ = ("source", "target", "components", "_jac")

    def __init__(self, source: Chart, target: Chart, components: Sequence):
        comps = tuple(_coerce_fn(source, c) for c in components)
        if len(comps) != target.dim:
            raise ValueError(f"map needs {target.dim} components, got {len(comps)}")
        for c in comps:
            if not c.is_polynomial():
                raise ValueError(f"map component {c} is not a polynomial")
        self.source = source
        self.target = target
        self.components = comps
        self._jac = None

    @classmethod
    def identity(cls, chart: Chart) -> PolyMap:
        return cls(chart, chart, chart.coords())

    @classmethod
    def by_names(cls, source: Chart, target: Chart, exprs: Iterable[str]) -> PolyMap:
        return cls(source, target, [parse_expr(e, source) for e in exprs])

    def jacobian(self) -> RatMatrix:
        """target.dim x source.dim matrix of partial derivatives."""
        if self._jac is None:
            self._jac = RatMatrix(
                self.source,
                [[c.diff(j) for j in range(self.source.dim)] for c in self.components],
            )
        return self._jac

    def compose(self, f: RatFun) -> RatFun:
        """``f o phi`` for a function on the target."""
        return f.compose(self.source, self.components)

    def __call__(self, point) -> tuple[Fraction, ...]:
        return tuple(c.eval(point) for c in self.components)

    def pull_field_coefficients(self, T: TensorField) -> dict:
        return {k: self.compose(v) for k, v in T.comps.items()}

    def __repr__(self) -> str:
        return f"PolyMap({self.source} -> {self.target}: {', '.join(map(str, self.components))})"


def pullback_form(phi: PolyMap, omega: TensorField) -> TensorField:
    if omega.kind != FORM and omega.degree > 0:
        raise ValueError("pullback needs a form")
    if omega.chart != phi.target:
        raise ValueError("form does not live on the map's target chart")
    src = phi.source
    k = omega.degree
    if k == 0:
        return TensorField(src, FORM, 0, {(): phi.compose(omega.scalar())})
    jac = phi.jacobian().rows
    table: dict[tuple[int, ...], RatFun] = {}
    for I, w in omega.comps.items():
        wphi = phi.compose(w)
        for J in combinations(range(src.dim), k):
            minor = _det([[jac[a][b] for b in J] for a in I], src)
            if minor:
                term = wphi * minor
                table[J] = table[J] + term if J in table else term
    return TensorField._clean(src, FORM, k, table)


def _det(m, chart: Chart) -> RatFun:
    n = len(m)
    if n == 0:
        return chart.one()
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    acc = chart.zero()
    for j in range(n):
        if m[0][j]:
            sub = [row[:j] + row[j + 1:] for row in m[1:]]
            term = m[0][j] * _det(sub, chart)
            acc = acc + term if j % 2 == 0 else acc - term
    return acc


def pushforward_vector_at(phi: PolyMap, X: TensorField, point) -> tuple[Fraction, ...]:
    """``d phi_p (X_p)`` as a coefficient tuple in the target coordinates."""
    if X.chart != phi.source:
        raise ValueError("vector field does not live on the map's source chart")
    xs = [c.eval(point) for c in X.components()]
    jac = phi.jacobian().at(point)
    return tuple(sum((a * b for a, b in zip(row, xs)), Fraction(0)) for row in jac)
