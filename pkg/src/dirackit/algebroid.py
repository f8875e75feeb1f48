"""Trivialized Lie algebroids, their cochains and modular cocycles.

An algebroid of rank r over a chart is given by a frame ``e_1..e_r``, anchor
vector fields ``rho(e_i)`` and structure functions ``[e_i, e_j] = c^k_ij e_k``.
Frame indices are 0-based throughout the Python API.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .calculus import (
    FORM,
    MULTIVECTOR,
    _det,
    pullback_form,
    wedge,
    PolyMap,
    TensorField,
    apply_vector,
    divergence,
    lie_bracket,
    vector_field,
    volume_form,
)
from .exact import (
    Chart,
    InconsistentSystem,
    RatFun,
    RatMatrix,
    generic_rank,
    kernel,
    rank,
    solve_linear,
)
from .exact.ratfun import _total_degree

__all__ = [
    "Algebroid",
    "Cochain",
    "TrivializationChoice",
    "LineRepresentation",
    "AlgebroidMorphism",
    "AxiomReport",
    "MorphismReport",
    "ExactnessVerdict",
    "AlgebroidError",
    "MorphismError",
    "ComorphismError",
    "NotSubmersionError",
    "LiftError",
    "tangent_algebroid",
    "cotangent_algebroid",
    "check_axioms",
    "check_morphism",
    "da_differential",
    "modular_cocycle",
    "characteristic_cocycle",
    "pullback_algebroid",
    "compatible_choice",
    "morphism_modular_cocycle",
    "comorphism_pullback",
    "pullback_cochain",
    "exactness_test",
    "coprime_basis",
    "compare_algebroids",
    "compose_morphisms",
    "identity_morphism",
    "distribution_algebroid",
    "pullback_frame_coefficients",
]


class AlgebroidError(ValueError):
    pass


class MorphismError(AlgebroidError):
    def __init__(self, report: MorphismReport):
        super().__init__(f"not a Lie algebroid morphism: {report.witness}")
        self.report = report


class ComorphismError(AlgebroidError):
    def __init__(self, witness: str):
        super().__init__(f"comorphism identities fail: {witness}")
        self.witness = witness


class NotSubmersionError(AlgebroidError):
    pass


class LiftError(AlgebroidError):
    pass


class Algebroid:
    """A Lie algebroid trivialized by a frame.

    ``structure`` maps pairs ``(i, j)`` with ``i < j`` to the coefficient
    tuple ``(c^0_ij, ..., c^{r-1}_ij)``; missing pairs bracket to zero.
    """

    __slots__ = ("chart", "rank", "anchors", "structure", "name")

    def __init__(
        self,
        chart: Chart,
        anchors: Sequence[TensorField],
        structure: Mapping[tuple[int, int], Sequence] | None = None,
        name: str = "",
    ):
        rank = len(anchors)
        for a in anchors:
            if a.kind != MULTIVECTOR or a.degree != 1 or a.chart != chart:
                raise ValueError("anchors must be vector fields on the base chart")
        table = {}
        for (i, j), coeffs in (structure or {}).items():
            if not (0 <= i < rank and 0 <= j < rank):
                raise ValueError(f"frame index out of range in ({i}, {j})")
            if len(coeffs) != rank:
                raise ValueError(f"structure coefficients for ({i}, {j}) need length {rank}")
            coeffs = tuple(c if isinstance(c, RatFun) else RatFun.const(chart, c) for c in coeffs)
            if i == j:
                if any(coeffs):
                    raise ValueError(f"[e_{i + 1}, e_{i + 1}] must vanish")
                continue
            if i > j:
                i, j = j, i
                coeffs = tuple(-c for c in coeffs)
            if (i, j) in table:
                raise ValueError(f"structure functions for ({i}, {j}) given twice")
            if any(coeffs):
                table[(i, j)] = coeffs
        self.chart = chart
        self.rank = rank
        self.anchors = tuple(anchors)
        self.structure = table
        self.name = name

    @classmethod
    def from_sparse(cls, chart: Chart, anchors: Sequence[TensorField], entries: Iterable[tuple[int, int, int, RatFun]], name: str = ""):
        """Build from ``(i, j, k, c^k_ij)`` entries with ``i < j``."""
        rank = len(anchors)
        table: dict[tuple[int, int], list] = {}
        for i, j, k, c in entries:
            if i == j:
                raise ValueError("diagonal structure entries are not allowed")
            if i > j:
                i, j, c = j, i, -c
            row = table.setdefault((i, j), [chart.zero()] * rank)
            row[k] = row[k] + c
        return cls(chart, anchors, table, name)

    def bracket(self, i: int, j: int) -> tuple[RatFun, ...]:
        """Coefficients of ``[e_i, e_j]`` in the frame."""
        if i == j:
            return (self.chart.zero(),) * self.rank
        if i < j:
            c = self.structure.get((i, j))
            return c if c is not None else (self.chart.zero(),) * self.rank
        c = self.structure.get((j, i))
        return tuple(-x for x in c) if c is not None else (self.chart.zero(),) * self.rank

    def c(self, k: int, i: int, j: int) -> RatFun:
        return self.bracket(i, j)[k]

    def _coerce(self, v) -> RatFun:
        return v if isinstance(v, RatFun) else RatFun.const(self.chart, v)

    def anchor_matrix(self) -> RatMatrix:
        return RatMatrix(self.chart, [a.components() for a in self.anchors])

    def anchor_of(self, coeffs: Sequence[RatFun]) -> TensorField:
        out = TensorField.zero(self.chart, MULTIVECTOR, 1)
        for f, a in zip(coeffs, self.anchors):
            if f:
                out = out + a.scale(f)
        return out

    def section_bracket(self, f: Sequence[RatFun], g: Sequence[RatFun]) -> tuple[RatFun, ...]:
        """``[sum f_i e_i, sum g_j e_j]`` in frame coefficients."""
        f = [self._coerce(v) for v in f]
        g = [self._coerce(v) for v in g]
        zero = self.chart.zero()
        out = [zero] * self.rank
        for i, fi in enumerate(f):
            if not fi:
                continue
            for j, gj in enumerate(g):
                if not gj or i == j:
                    continue
                fg = fi * gj
                for k, ck in enumerate(self.bracket(i, j)):
                    if ck:
                        out[k] = out[k] + fg * ck
        X = self.anchor_of(f)
        Y = self.anchor_of(g)
        for j, gj in enumerate(g):
            if gj:
                out[j] = out[j] + apply_vector(X, gj)
        for i, fi in enumerate(f):
            if fi:
                out[i] = out[i] - apply_vector(Y, fi)
        return tuple(out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Algebroid)
            and self.chart == other.chart
            and self.anchors == other.anchors
            and self.structure == other.structure
        )

    def __hash__(self):
        return hash((self.chart, self.anchors, tuple(sorted(self.structure.items()))))

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Algebroid{label} rank={self.rank} over {self.chart}>"


def tangent_algebroid(chart: Chart) -> Algebroid:
    anchors = [vector_field(chart, [1 if i == j else 0 for j in range(chart.dim)]) for i in range(chart.dim)]
    return Algebroid(chart, anchors, {}, name="TM")


def cotangent_algebroid(pi: TensorField) -> Algebroid:
    """T*M of a bivector with frame ``dx_i``: anchor ``pi#``, ``[dx_i, dx_j] = d pi^ij``."""
    chart = pi.chart
    n = chart.dim
    anchors = []
    for i in range(n):
        anchors.append(vector_field(chart, [pi[(i, j)] for j in range(n)]))
    table = {}
    for i in range(n):
        for j in range(i + 1, n):
            pij = pi[(i, j)]
            coeffs = tuple(pij.diff(k) for k in range(n))
            if any(coeffs):
                table[(i, j)] = coeffs
    return Algebroid(chart, anchors, table, name="T*M")


# -- cochains ---------------------------------------------------------------

class Cochain:
    """An element of Omega^k(A): antisymmetric table over frame index tuples."""

    __slots__ = ("chart", "rank", "degree", "comps")

    def __init__(self, chart: Chart, rank: int, degree: int, comps: Mapping[tuple[int, ...], object] | None = None):
        self.chart = chart
        self.rank = rank
        self.degree = degree
        table: dict[tuple[int, ...], RatFun] = {}
        for idx, v in (comps or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(not 0 <= i < rank for i in idx):
                raise ValueError(f"bad cochain index {idx}")
            if not isinstance(v, RatFun):
                v = RatFun.const(chart, v)
            if len(set(idx)) != len(idx):
                continue
            sign, key = _sort_sign(idx)
            v = v if sign > 0 else -v
            table[key] = table[key] + v if key in table else v
        self.comps = {k: v for k, v in table.items() if v}

    @classmethod
    def from_values(cls, chart: Chart, values: Sequence) -> Cochain:
        """Degree-1 cochain from its values on the frame."""
        return cls(chart, len(values), 1, {(i,): v for i, v in enumerate(values)})

    @classmethod
    def function(cls, chart: Chart, rank: int, f: RatFun) -> Cochain:
        return cls(chart, rank, 0, {(): f})

    def __getitem__(self, idx) -> RatFun:
        if isinstance(idx, int):
            idx = (idx,)
        idx = tuple(idx)
        if len(set(idx)) != len(idx):
            return self.chart.zero()
        sign, key = _sort_sign(idx)
        v = self.comps.get(key)
        if v is None:
            return self.chart.zero()
        return v if sign > 0 else -v

    def values(self) -> tuple[RatFun, ...]:
        if self.degree != 1:
            raise ValueError("values() is for degree-1 cochains")
        return tuple(self[(i,)] for i in range(self.rank))

    def _check(self, other: Cochain):
        if (self.chart, self.rank, self.degree) != (other.chart, other.rank, other.degree):
            raise ValueError("incompatible cochains")

    def __add__(self, other: Cochain) -> Cochain:
        self._check(other)
        table = dict(self.comps)
        for k, v in other.comps.items():
            table[k] = table[k] + v if k in table else v
        return Cochain(self.chart, self.rank, self.degree, table)

    def __neg__(self) -> Cochain:
        return Cochain(self.chart, self.rank, self.degree, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other: Cochain) -> Cochain:
        return self + (-other)

    def scale(self, f) -> Cochain:
        return Cochain(self.chart, self.rank, self.degree, {k: v * f for k, v in self.comps.items()})

    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self) -> bool:
        return bool(self.comps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cochain):
            return NotImplemented
        return (self.chart, self.rank, self.degree) == (other.chart, other.rank, other.degree) and self.comps == other.comps

    def __hash__(self):
        return hash((self.rank, self.degree, frozenset(self.comps.items())))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v}" for k, v in sorted(self.comps.items()))
        return f"Cochain(degree={self.degree}, {{{body}}})"


def _sort_sign(idx):
    inversions = sum(1 for a in range(len(idx)) for b in range(a + 1, len(idx)) if idx[a] > idx[b])
    return (-1 if inversions % 2 else 1), tuple(sorted(idx))


def da_differential(A: Algebroid, xi: Cochain, max_degree: int = 2) -> Cochain:
    """Chevalley-Eilenberg differential; inputs of degree 0, 1, 2."""
    k = xi.degree
    if k > max_degree:
        raise ValueError(f"d_A supports cochains of degree <= {max_degree}, got {k}")
    if xi.rank != A.rank or xi.chart != A.chart:
        raise ValueError("cochain does not belong to this algebroid")
    table: dict[tuple[int, ...], RatFun] = {}
    zero = A.chart.zero()
    for idx in combinations(range(A.rank), k + 1):
        acc = zero
        for a, ia in enumerate(idx):
            rest = idx[:a] + idx[a + 1:]
            term = apply_vector(A.anchors[ia], xi[rest])
            if term:
                acc = acc + term if a % 2 == 0 else acc - term
        for a in range(k + 1):
            for b in range(a + 1, k + 1):
                coeffs = A.bracket(idx[a], idx[b])
                rest = idx[:a] + idx[a + 1:b] + idx[b + 1:]
                term = zero
                for m, cm in enumerate(coeffs):
                    if cm:
                        v = xi[(m,) + rest]
                        if v:
                            term = term + cm * v
                if term:
                    acc = acc + term if (a + b) % 2 == 0 else acc - term
        if acc:
            table[idx] = acc
    return Cochain(A.chart, A.rank, k + 1, table)


@dataclass(frozen=True)
class AxiomReport:
    ok: bool
    witness: str | None = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def check_axioms(A: Algebroid) -> AxiomReport:
    """Skew-symmetry, anchor compatibility and the frame Jacobi identity."""
    r = A.rank
    checked = 0
    zero = A.chart.zero()
    # skew-symmetry is structural (only i < j stored); verify anyway
    for i in range(r):
        for j in range(r):
            checked += 1
            if any(a + b for a, b in zip(A.bracket(i, j), A.bracket(j, i))):
                return AxiomReport(False, f"skew-symmetry fails for (e_{i + 1}, e_{j + 1})", checked)
    for i in range(r):
        for j in range(i + 1, r):
            checked += 1
            lhs = A.anchor_of(A.bracket(i, j))
            rhs = lie_bracket(A.anchors[i], A.anchors[j])
            diff = lhs - rhs
            if diff:
                return AxiomReport(False, f"anchor: rho([e_{i + 1}, e_{j + 1}]) - [rho(e_{i + 1}), rho(e_{j + 1})] = {diff}", checked)
    for i, j, k in combinations(range(r), 3):
        checked += 1
        total = [zero] * r
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            inner = A.bracket(b, c)
            outer = A.section_bracket([1 if t == a else 0 for t in range(r)], inner)
            total = [x + y for x, y in zip(total, outer)]
        if any(total):
            desc = ", ".join(str(t) for t in total)
            return AxiomReport(False, f"Jacobi for (e_{i + 1}, e_{j + 1}, e_{k + 1}) = ({desc})", checked)
    return AxiomReport(True, None, checked)


# -- modular cocycles -------------------------------------------------------

@dataclass(frozen=True)
class TrivializationChoice:
    """Scalings of the frame top section and of the base volume form.

    Both scalings must be nowhere vanishing on the chart; that is an input
    contract, not something checked here.  ``None`` means 1.
    """

    frame_scale: RatFun | None = None
    base_volume: RatFun | None = None

    def frame(self, chart: Chart) -> RatFun:
        return self.frame_scale if self.frame_scale is not None else chart.one()

    def volume(self, chart: Chart) -> TensorField:
        return volume_form(chart, self.base_volume if self.base_volume is not None else 1)


def modular_cocycle(A: Algebroid, choice: TrivializationChoice | None = None, check: bool = True) -> Cochain:
    """``alpha(e_i) = sum_k c^k_ik + div_mu(rho(e_i)) + rho(e_i)(u)/u`` for frame scale ``u``."""
    if check:
        rep = check_axioms(A)
        if not rep:
            raise AlgebroidError(f"algebroid axioms fail: {rep.witness}")
    choice = choice or TrivializationChoice()
    mu = choice.volume(A.chart)
    u = choice.frame(A.chart)
    if not u:
        raise ValueError("frame scaling is identically zero")
    values = []
    for i in range(A.rank):
        trace = A.chart.zero()
        for k in range(A.rank):
            ck = A.c(k, i, k)
            if ck:
                trace = trace + ck
        rho = A.anchors[i]
        value = trace + divergence(rho, mu)
        if not u.is_constant():
            value = value + apply_vector(rho, u) / u
        values.append(value)
    return Cochain.from_values(A.chart, values)


@dataclass(frozen=True)
class LineRepresentation:
    """A flat A-connection on a trivial line bundle: ``nabla_X mu = <theta, X> mu``."""

    algebroid: Algebroid
    connection_form: Cochain

    def __post_init__(self):
        if self.connection_form.degree != 1:
            raise ValueError("connection form must be a degree-1 cochain")
        if da_differential(self.algebroid, self.connection_form):
            raise ValueError("connection is not flat: d_A(theta) != 0")

    def dual(self) -> LineRepresentation:
        return LineRepresentation(self.algebroid, -self.connection_form)

    def tensor(self, other: LineRepresentation) -> LineRepresentation:
        if other.algebroid != self.algebroid:
            raise ValueError("representations of different algebroids")
        return LineRepresentation(self.algebroid, self.connection_form + other.connection_form)

    def pullback(self, morphism: AlgebroidMorphism) -> LineRepresentation:
        return LineRepresentation(morphism.source, pullback_cochain(morphism, self.connection_form))


def characteristic_cocycle(L: LineRepresentation) -> Cochain:
    return L.connection_form


# -- morphisms --------------------------------------------------------------

@dataclass(frozen=True)
class AlgebroidMorphism:
    """``Phi(s_k) = sum_p fiber[k][p] (t_p o phi)`` covering ``base_map``."""

    source: Algebroid
    target: Algebroid
    base_map: PolyMap
    fiber: RatMatrix

    def __post_init__(self):
        if self.base_map.source != self.source.chart or self.base_map.target != self.target.chart:
            raise ValueError("base map does not connect the algebroid bases")
        if self.fiber.shape != (self.source.rank, self.target.rank):
            raise ValueError(f"fiber matrix must be {self.source.rank} x {self.target.rank}")


@dataclass(frozen=True)
class MorphismReport:
    ok: bool
    witness: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def _pulled_structure(T: Algebroid, phi: PolyMap):
    cache = {}

    def get(p, q):
        key = (p, q)
        if key not in cache:
            cache[key] = tuple(phi.compose(c) for c in T.bracket(p, q))
        return cache[key]

    return get


def check_morphism(Phi: AlgebroidMorphism) -> MorphismReport:
    """Anchor and bracket compatibility of a morphism covering a base map."""
    S, T, phi, H = Phi.source, Phi.target, Phi.base_map, Phi.fiber.rows
    jac = phi.jacobian()
    zero = S.chart.zero()
    t_anchor = [tuple(phi.compose(c) for c in a.components()) for a in T.anchors]
    for k in range(S.rank):
        pushed = jac.apply(S.anchors[k].components())
        expected = [zero] * T.chart.dim
        for p in range(T.rank):
            if H[k][p]:
                expected = [e + H[k][p] * a for e, a in zip(expected, t_anchor[p])]
        if tuple(pushed) != tuple(expected):
            diff = ", ".join(str(a - b) for a, b in zip(pushed, expected))
            return MorphismReport(False, f"anchor mismatch on s_{k + 1}: phi_* rho(s_{k + 1}) - rho(Phi s_{k + 1}) = ({diff})")
    tc = _pulled_structure(T, phi)
    for k in range(S.rank):
        for l in range(k + 1, S.rank):
            lhs = [zero] * T.rank
            for m, cm in enumerate(S.bracket(k, l)):
                if cm:
                    lhs = [x + cm * h for x, h in zip(lhs, H[m])]
            rhs = [zero] * T.rank
            for p in range(T.rank):
                if not H[k][p]:
                    continue
                for q in range(T.rank):
                    if not H[l][q] or p == q:
                        continue
                    hh = H[k][p] * H[l][q]
                    rhs = [x + hh * c for x, c in zip(rhs, tc(p, q))]
            Xk, Xl = S.anchors[k], S.anchors[l]
            for q in range(T.rank):
                rhs[q] = rhs[q] + apply_vector(Xk, H[l][q]) - apply_vector(Xl, H[k][q])
            if lhs != rhs:
                diff = ", ".join(str(a - b) for a, b in zip(lhs, rhs))
                return MorphismReport(False, f"bracket mismatch on (s_{k + 1}, s_{l + 1}): ({diff})")
    return MorphismReport(True)


def pullback_cochain(Phi: AlgebroidMorphism, xi: Cochain) -> Cochain:
    """``Phi^* xi`` for cochains of degree 0, 1 or 2 on the target."""
    S, T, phi, H = Phi.source, Phi.target, Phi.base_map, Phi.fiber.rows
    if xi.rank != T.rank or xi.chart != T.chart:
        raise ValueError("cochain does not belong to the target algebroid")
    k = xi.degree
    pulled = {key: phi.compose(v) for key, v in xi.comps.items()}
    if k == 0:
        return Cochain(S.chart, S.rank, 0, {(): pulled.get((), S.chart.zero())})
    table = {}
    for idx in combinations(range(S.rank), k):
        acc = S.chart.zero()
        for key, v in pulled.items():
            # sum over permutations of key matched against idx
            if k == 1:
                coef = H[idx[0]][key[0]]
            elif k == 2:
                p, q = key
                coef = H[idx[0]][p] * H[idx[1]][q] - H[idx[0]][q] * H[idx[1]][p]
            else:
                raise ValueError("pullback implemented for degree <= 2")
            if coef:
                acc = acc + coef * v
        if acc:
            table[idx] = acc
    return Cochain(S.chart, S.rank, k, table)


def morphism_modular_cocycle(
    Phi: AlgebroidMorphism,
    source_choice: TrivializationChoice | None = None,
    target_choice: TrivializationChoice | None = None,
) -> Cochain:
    """Representative ``alpha_S - Phi^* alpha_T`` of the modular class of a morphism."""
    rep = check_morphism(Phi)
    if not rep:
        raise MorphismError(rep)
    a_s = modular_cocycle(Phi.source, source_choice)
    a_t = modular_cocycle(Phi.target, target_choice)
    return a_s - pullback_cochain(Phi, a_t)


# -- pullback algebroid -----------------------------------------------------

def _monomials(nvars: int, max_degree: int):
    out = []
    for d in range(max_degree + 1):
        out.extend(_compositions(d, nvars))
    return out


def _compositions(total: int, parts: int):
    if parts == 0:
        return [()] if total == 0 else []
    if parts == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def _poly_terms(f: RatFun) -> dict:
    return dict(f._num.items()) if f.chart.dim else {(): c for _, c in f._num.items()}


def _lcm_den(fs: Sequence[RatFun], chart: Chart) -> RatFun:
    acc = chart.one()
    for f in fs:
        d = f.den.to_ratfun()
        if not d.is_constant():
            g = _poly_gcd(acc, d)
            acc = acc * d / g
    return acc


def _poly_gcd(a: RatFun, b: RatFun) -> RatFun:
    g = a._num.gcd(b._num)
    return RatFun._make(a.chart, g, a.chart.ring.one)


def _solve_polynomial_ansatz(jac_rows, rhs, chart: Chart, max_degree: int):
    """Find polynomials P_j of degree <= max_degree with sum_j jac[k][j] P_j == rhs[k]."""
    n = chart.dim
    monos = _monomials(n, max_degree)
    ncols = len(jac_rows[0]) if jac_rows else 0
    unknowns = [(j, m) for j in range(ncols) for m in monos]
    col_of = {u: t for t, u in enumerate(unknowns)}
    equations: dict[tuple[int, tuple], dict[int, Fraction]] = {}
    rhs_terms: dict[tuple[int, tuple], Fraction] = {}
    for k, row in enumerate(jac_rows):
        for j, entry in enumerate(row):
            if not entry:
                continue
            if not entry.is_polynomial():
                raise LiftError("Jacobian entry is not polynomial")
            for em, ec in _poly_terms(entry).items():
                for m in monos:
                    key = (k, tuple(a + b for a, b in zip(em, m)))
                    equations.setdefault(key, {})
                    col = col_of[(j, m)]
                    equations[key][col] = equations[key].get(col, Fraction(0)) + Fraction(int(ec.numerator), int(ec.denominator))
        for em, ec in _poly_terms(rhs[k]).items():
            key = (k, tuple(em))
            equations.setdefault(key, {})
            rhs_terms[key] = Fraction(int(ec.numerator), int(ec.denominator))
    keys = sorted(equations)
    A = [[equations[key].get(c, Fraction(0)) for c in range(len(unknowns))] for key in keys]
    b = [rhs_terms.get(key, Fraction(0)) for key in keys]
    if not keys:
        return [chart.zero()] * ncols
    try:
        sol = solve_linear(A, b).particular
    except InconsistentSystem:
        return None
    polys = [chart.zero()] * ncols
    for (j, m), value in zip(unknowns, sol):
        if value:
            mono = chart.one()
            for i, e in enumerate(m):
                if e:
                    mono = mono * chart.coord(i) ** e
            polys[j] = polys[j] + mono * value
    return polys


def _vertical_frame(phi: PolyMap) -> list[TensorField]:
    src = phi.source
    basis = kernel(phi.jacobian())
    frame = []
    for v in basis:
        scale = _lcm_den(v, src)
        entries = [x * scale for x in v]
        frame.append(vector_field(src, entries))
    k = len(frame)
    if k:
        # coordinate-adapted: some k x k minor of the frame is a nonzero constant
        rows = [f.components() for f in frame]
        ok = False
        for cols in combinations(range(src.dim), k):
            minor = _det([[r[c] for c in cols] for r in rows], src)
            if minor and minor.is_constant():
                ok = True
                break
        if not ok:
            raise NotSubmersionError(
                "ker(phi_*) has no polynomial frame with a constant minor; only coordinate-adapted submersions are supported"
            )
    return frame


def _max_degree(fs: Iterable[RatFun]) -> int:
    deg = 0
    for f in fs:
        deg = max(deg, _total_degree(f._num), _total_degree(f._den))
    return deg


def pullback_algebroid(A: Algebroid, phi: PolyMap, degree_bound: int | None = None, points: Sequence = ()):
    """``phi^!! A`` over the source of a submersion, with its morphism to ``A``.

    Frame: lifted elements ``E_i = (X_i, e_i o phi)`` with ``phi_* X_i = rho(e_i) o phi``
    followed by vertical elements ``V_j = (V_j, 0)`` spanning ``ker phi_*``.
    Returns ``(algebroid, morphism)``.
    """
    if phi.target != A.chart:
        raise ValueError("map target is not the algebroid base")
    src = phi.source
    jac = phi.jacobian()
    if generic_rank(jac) != phi.target.dim:
        raise NotSubmersionError("phi is not a submersion (generic Jacobian rank too small)")
    for p in points:
        if rank(jac.at(p)) != phi.target.dim:
            raise NotSubmersionError(f"phi is not a submersion at {tuple(p)}")
    if degree_bound is None:
        degree_bound = max(1, 2 * _max_degree(list(phi.components) + [c for a in A.anchors for c in a.components()]))
    lifts = []
    for i, a in enumerate(A.anchors):
        target = [phi.compose(c) for c in a.components()]
        q = _lcm_den(target, src)
        rhs = [t * q for t in target]
        polys = _solve_polynomial_ansatz(jac.rows, rhs, src, degree_bound + _max_degree([q]))
        if polys is None:
            raise LiftError(f"no polynomial lift of rho(e_{i + 1}) up to degree {degree_bound}")
        lifts.append(vector_field(src, [p / q for p in polys]))
    vertical = _vertical_frame(phi)
    r, k = A.rank, len(vertical)
    size = r + k
    anchors = lifts + vertical
    pulled = _pulled_structure(A, phi)
    zero = src.zero()

    def element(i):
        if i < r:
            return anchors[i], [src.one() if t == i else zero for t in range(r)]
        return anchors[i], [zero] * r

    def decompose(Z, h):
        return _pullback_coordinates(src, lifts, vertical, Z, h)

    table = {}
    for a in range(size):
        X, f = element(a)
        for b in range(a + 1, size):
            Y, g = element(b)
            Z = lie_bracket(X, Y)
            h = [zero] * r
            for l in range(r):
                if not f[l]:
                    continue
                for m in range(r):
                    if not g[m] or l == m:
                        continue
                    fg = f[l] * g[m]
                    h = [x + fg * c for x, c in zip(h, pulled(l, m))]
            for m in range(r):
                if g[m]:
                    h[m] = h[m] + apply_vector(X, g[m])
                if f[m]:
                    h[m] = h[m] - apply_vector(Y, f[m])
            coeffs = decompose(Z, h)
            if any(coeffs):
                table[(a, b)] = tuple(coeffs)
    P = Algebroid(src, anchors, table, name=f"pullback of {A.name or 'A'}")
    fiber = RatMatrix(src, [[1 if (i < r and p == i) else 0 for p in range(r)] for i in range(size)])
    return P, AlgebroidMorphism(P, A, phi, fiber)



def _pullback_coordinates(src: Chart, lifts, vertical, Z: TensorField, h: Sequence[RatFun]) -> list[RatFun]:
    """Frame coefficients of ``(Z, sum h_l e_l o phi)`` in ``(lifts, vertical)``."""
    zero = src.zero()
    k = len(vertical)
    coeffs = list(h)
    residual = Z
    for l, hl in enumerate(h):
        if hl:
            residual = residual - lifts[l].scale(hl)
    if not residual:
        return coeffs + [zero] * k
    if not vertical:
        raise AlgebroidError(f"element leaves phi^!!A: residual {residual}")
    cols = [v.components() for v in vertical]
    system = [[cols[j][row] for j in range(k)] for row in range(src.dim)]
    try:
        w = solve_linear(system, list(residual.components())).particular
    except InconsistentSystem:
        raise AlgebroidError(f"element leaves phi^!!A: residual {residual} is not vertical") from None
    return coeffs + list(w)


def pullback_frame_coefficients(P: Algebroid, base_rank: int, X: TensorField, h: Sequence[RatFun]) -> list[RatFun]:
    """Coordinates of ``(X, h)`` in the frame produced by :func:`pullback_algebroid`."""
    return _pullback_coordinates(P.chart, P.anchors[:base_rank], P.anchors[base_rank:], X, h)


def compatible_choice(P: Algebroid, phi: PolyMap, target_choice: TrivializationChoice | None = None, rank_lifted: int | None = None) -> TrivializationChoice:
    """Choice on ``phi^!! A`` built from the target's: ``mu_M = phi^* mu_N ^ nu`` with ``nu``
    dual to the vertical frame, and the frame top section lifted from the target's.
    """
    target_choice = target_choice or TrivializationChoice()
    src, tgt = phi.source, phi.target
    r = rank_lifted if rank_lifted is not None else P.rank - (src.dim - tgt.dim)
    vertical = P.anchors[r:]
    mu_n = target_choice.volume(tgt)
    nu = TensorField(src, FORM, 0, {(): 1})
    k = len(vertical)
    if k:
        rows = [v.components() for v in vertical]
        for cols in combinations(range(src.dim), k):
            minor = _det([[row[c] for c in cols] for row in rows], src)
            if minor and minor.is_constant():
                nu = TensorField(src, FORM, k, {cols: minor.inverse()})
                break
    mu_m = wedge(pullback_form(phi, mu_n), nu)
    coeff = mu_m[tuple(range(src.dim))]
    if not coeff:
        raise AlgebroidError("pulled-back volume degenerates; vertical frame is not transverse")
    scale = phi.compose(target_choice.frame(tgt))
    return TrivializationChoice(frame_scale=scale, base_volume=coeff)


# -- comorphisms --------------------------------------------------------------

def comorphism_pullback(
    A: Algebroid,
    B: Algebroid,
    phi: PolyMap,
    fiber: RatMatrix,
    choice_A: TrivializationChoice | None = None,
    choice_B: TrivializationChoice | None = None,
):
    """Pullback algebroid ``phi^! B`` of a comorphism and its modular cocycle.

    ``fiber[i][l]`` are the coefficients of ``Phi(e_i o phi)`` in the frame of
    ``A`` (base of ``A`` = source of ``phi``).  Returns ``(algebroid, cocycle)``
    with cocycle ``Phi^* alpha_A - j^* alpha_B``.
    """
    if phi.source != A.chart or phi.target != B.chart:
        raise ValueError("map does not connect the algebroid bases")
    if fiber.shape != (B.rank, A.rank):
        raise ValueError(f"fiber matrix must be {B.rank} x {A.rank}")
    M = A.chart
    H = fiber.rows
    jac = phi.jacobian()
    anchors = []
    for i in range(B.rank):
        X = A.anchor_of(H[i])
        pushed = jac.apply(X.components())
        expected = tuple(phi.compose(c) for c in B.anchors[i].components())
        if tuple(pushed) != expected:
            diff = ", ".join(str(a - b) for a, b in zip(pushed, expected))
            raise ComorphismError(f"phi_* a_A(Phi e_{i + 1}) - a_B(e_{i + 1}) = ({diff})")
        anchors.append(X)
    pulled = _pulled_structure(B, phi)
    zero = M.zero()
    table = {}
    for i in range(B.rank):
        for j in range(i + 1, B.rank):
            lhs = A.section_bracket(H[i], H[j])
            cij = pulled(i, j)
            rhs = [zero] * A.rank
            for k, c in enumerate(cij):
                if c:
                    rhs = [x + c * h for x, h in zip(rhs, H[k])]
            if tuple(lhs) != tuple(rhs):
                diff = ", ".join(str(a - b) for a, b in zip(lhs, rhs))
                raise ComorphismError(f"[Phi e_{i + 1}, Phi e_{j + 1}] - Phi[e_{i + 1}, e_{j + 1}] = ({diff})")
            if any(cij):
                table[(i, j)] = cij
    C = Algebroid(M, anchors, table, name=f"comorphism pullback of {B.name or 'B'}")
    alpha_A = modular_cocycle(A, choice_A).values()
    alpha_B = modular_cocycle(B, choice_B).values()
    values = []
    for i in range(B.rank):
        v = zero
        for l, h in enumerate(H[i]):
            if h:
                v = v + h * alpha_A[l]
        values.append(v - phi.compose(alpha_B[i]))
    return C, Cochain.from_values(M, values)


# -- exactness ------------------------------------------------------------------

@dataclass(frozen=True)
class ExactnessVerdict:
    """``kind`` is ``"exact"`` (xi = d_A f), ``"log_exact"`` (xi = d_A g / g) or ``"inconclusive"``."""

    kind: str
    potential: RatFun | None = None

    def __str__(self) -> str:
        if self.kind == "inconclusive":
            return "inconclusive"
        return f"{self.kind}({self.potential})"


def coprime_basis(polys: Iterable[RatFun]) -> list[RatFun]:
    """Pairwise coprime, squarefree, monic non-constant polynomials whose products
    generate every input up to constants (gcd refinement, no factorization)."""
    chart = None
    work = []
    for p in polys:
        chart = p.chart
        num = p._num
        if num and not num.is_ground:
            work.append(num.monic())
    basis: list = []
    while work:
        p = work.pop()
        if p.is_ground:
            continue
        sqf = p.sqf_part().monic()
        if sqf != p:
            q = p.quo(sqf)
            work.append(sqf)
            if not q.is_ground:
                work.append(q.monic())
            continue
        split = False
        for idx, b in enumerate(basis):
            g = p.gcd(b)
            if not g.is_ground:
                g = g.monic()
                basis.pop(idx)
                for piece in (g, p.quo(g), b.quo(g)):
                    if not piece.is_ground:
                        work.append(piece.monic())
                split = True
                break
        if not split and p not in basis:
            basis.append(p)
    basis.sort(key=lambda e: (len(e), str(e)))
    if chart is None:
        return []
    return [RatFun._raw(chart, b, chart.ring.one) for b in basis]


def _linear_fit(columns: list[Sequence[RatFun]], target: Sequence[RatFun]):
    """Rational constants k with sum_j k_j columns[j][i] == target[i] for all i, or None."""
    chart = target[0].chart
    equations: dict = {}
    rhs: dict = {}
    nrows = len(target)
    for i in range(nrows):
        entries = [col[i] for col in columns] + [target[i]]
        D = _lcm_den(entries, chart)
        for j, col in enumerate(columns):
            for m, c in _poly_terms(col[i] * D).items():
                equations.setdefault((i, m), {})[j] = Fraction(int(c.numerator), int(c.denominator))
        for m, c in _poly_terms(target[i] * D).items():
            equations.setdefault((i, m), {})
            rhs[(i, m)] = Fraction(int(c.numerator), int(c.denominator))
    keys = sorted(equations)
    if not keys:
        return [Fraction(0)] * len(columns)
    if not columns:
        return None if any(rhs.values()) else []
    A = [[equations[key].get(j, Fraction(0)) for j in range(len(columns))] for key in keys]
    b = [rhs.get(key, Fraction(0)) for key in keys]
    try:
        return list(solve_linear(A, b).particular)
    except InconsistentSystem:
        return None


def exactness_test(A: Algebroid, xi: Cochain, degree_bound: int = 2) -> ExactnessVerdict:
    """Search for a polynomial primitive or a logarithmic primitive of a closed 1-cochain.

    Never claims non-exactness: when neither search succeeds the verdict is
    ``inconclusive``.  Every returned certificate is substituted back.
    """
    if xi.degree != 1:
        raise ValueError("exactness_test expects a degree-1 cochain")
    if da_differential(A, xi):
        raise ValueError("cochain is not d_A-closed")
    chart = A.chart
    target = xi.values()
    if not any(target):
        return ExactnessVerdict("exact", chart.zero())
    monos = [m for m in _monomials(chart.dim, degree_bound) if any(m)]
    mono_funs = []
    for m in monos:
        f = chart.one()
        for i, e in enumerate(m):
            if e:
                f = f * chart.coord(i) ** e
        mono_funs.append(f)
    columns = [[apply_vector(A.anchors[i], f) for i in range(A.rank)] for f in mono_funs]
    sol = _linear_fit(columns, target)
    if sol is not None:
        f = chart.zero()
        for coeff, mono in zip(sol, mono_funs):
            if coeff:
                f = f + mono * coeff
        if da_differential(A, Cochain.function(chart, A.rank, f)) == xi:
            return ExactnessVerdict("exact", f)
    data = list(target)
    for a in A.anchors:
        data.extend(a.components())
    for coeffs in A.structure.values():
        data.extend(coeffs)
    candidates = []
    for f in data:
        candidates.append(f.num.to_ratfun())
        candidates.append(f.den.to_ratfun())
    basis = coprime_basis(candidates)
    if basis:
        columns = [[apply_vector(A.anchors[i], p) / p for i in range(A.rank)] for p in basis]
        ks = _linear_fit(columns, target)
        if ks is not None and all(k.denominator == 1 and abs(k) <= degree_bound for k in ks):
            g = chart.one()
            for k, p in zip(ks, basis):
                if k:
                    g = g * p ** int(k)
            dg = da_differential(A, Cochain.function(chart, A.rank, g))
            if dg.scale(g.inverse()) == xi:
                return ExactnessVerdict("log_exact", g)
    return ExactnessVerdict("inconclusive")


# -- comparisons and constructions used by the Dirac layer ---------------------

def compare_algebroids(A: Algebroid, B: Algebroid, anchors_first: bool = True) -> str | None:
    """First difference between two frame presentations, or None when identical."""
    if A.chart != B.chart:
        return f"charts differ: {A.chart} vs {B.chart}"
    if A.rank != B.rank:
        return f"ranks differ: {A.rank} vs {B.rank}"

    def anchors():
        for i, (a, b) in enumerate(zip(A.anchors, B.anchors)):
            if a != b:
                return f"anchor of e_{i + 1}: {a} vs {b}"
        return None

    def structure():
        for i in range(A.rank):
            for j in range(i + 1, A.rank):
                for k, (x, y) in enumerate(zip(A.bracket(i, j), B.bracket(i, j))):
                    if x != y:
                        return f"structure function c^{k + 1}_{i + 1},{j + 1}: {x} vs {y}"
        return None

    order = (anchors, structure) if anchors_first else (structure, anchors)
    for part in order:
        diff = part()
        if diff:
            return diff
    return None


def compose_morphisms(first: AlgebroidMorphism, second: AlgebroidMorphism) -> AlgebroidMorphism:
    """``second o first``."""
    if first.target != second.source:
        raise ValueError("morphisms are not composable")
    phi = first.base_map
    pulled = [[phi.compose(x) for x in row] for row in second.fiber.rows]
    fiber = first.fiber @ RatMatrix(phi.source, pulled)
    components = [phi.compose(c) for c in second.base_map.components]
    return AlgebroidMorphism(first.source, second.target, PolyMap(phi.source, second.base_map.target, components), fiber)


def identity_morphism(A: Algebroid) -> AlgebroidMorphism:
    return AlgebroidMorphism(A, A, PolyMap.identity(A.chart), RatMatrix.identity(A.chart, A.rank))


def distribution_algebroid(chart: Chart, generators: Sequence[TensorField], name: str = "D") -> Algebroid:
    """An involutive distribution with a pointwise-independent frame, as a Lie algebroid."""
    rows = [g.components() for g in generators]
    table = {}
    for i in range(len(generators)):
        for j in range(i + 1, len(generators)):
            Z = lie_bracket(generators[i], generators[j])
            if not Z:
                continue
            system = [[rows[k][c] for k in range(len(rows))] for c in range(chart.dim)]
            try:
                coeffs = solve_linear(system, list(Z.components())).particular
            except InconsistentSystem:
                raise AlgebroidError(f"distribution is not involutive: [{i}, {j}] = {Z}") from None
            table[(i, j)] = tuple(coeffs)
    return Algebroid(chart, list(generators), table, name=name)
