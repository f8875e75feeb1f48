"""Dirac structures presented by generating sections of TM + T*M."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .algebroid import (
    Algebroid,
    TrivializationChoice,
    _lcm_den,
    compare_algebroids,
    modular_cocycle,
)
from .calculus import (
    FORM,
    MULTIVECTOR,
    PolyMap,
    TensorField,
    apply_vector,
    bivector,
    exterior_derivative,
    flat,
    lie_bracket,
    sharp,
    vector_field,
)
from .courant import (
    GenSection,
    NotPoissonError,
    bialgebroid_bracket,
    courant_bracket,
    is_poisson,
    pairing,
    require_poisson,
)
from .exact import (
    Chart,
    InconsistentSystem,
    PoleError,
    RatFun,
    as_fraction,
    generic_rank,
    in_span,
    kernel,
    rank,
    same_span,
    solve_linear,
)
from .exact.linalg import rref
from .sampling import DEFAULT_SAMPLES, DEFAULT_SEED, sample_points

__all__ = [
    "DiracSpec",
    "Reduction",
    "DiracReport",
    "DistributionSpec",
    "CharacteristicPair",
    "NotClosedError",
    "NotAdmissibleError",
    "DiracError",
    "FlattenMismatch",
    "check_dirac",
    "graph_of_bivector",
    "graph_of_twoform",
    "tangent_dirac",
    "cotangent_dirac",
    "dirac_to_algebroid",
    "characteristic_distribution",
    "characteristic_pair",
    "admissible_lift",
    "admissible_bracket",
    "bialgebroid_flatten",
    "modular_cocycle_dirac",
    "fiber_at",
    "characteristic_equations_at",
    "verify_reduction",
    "descend",
]


class DiracError(ValueError):
    pass


class NotClosedError(ValueError):
    def __init__(self, witness: TensorField):
        super().__init__(f"two-form is not closed: d(omega) = {witness}")
        self.witness = witness


class NotAdmissibleError(DiracError):
    def __init__(self, f: RatFun, certificate):
        super().__init__(f"{f} is not admissible: no vector field X with X + d({f}) in L")
        self.function = f
        self.certificate = certificate


class FlattenMismatch(DiracError):
    def __init__(self, witness: str):
        super().__init__(f"flattened structure does not match: {witness}")
        self.witness = witness


@dataclass(frozen=True)
class Reduction:
    """Declared quotient of a reducible Dirac structure by a coordinate projection."""

    quotient: Chart
    projection: PolyMap


@dataclass(frozen=True)
class DiracSpec:
    """``n`` generating sections on an ``n``-dimensional chart.

    With ``ambient_poisson`` set the bracket is that of the Lie bialgebroid
    ``(TM, T*M)`` of the bivector rather than the standard Courant bracket.
    """

    chart: Chart
    generators: tuple[GenSection, ...]
    ambient_poisson: TensorField | None = None
    reduction: Reduction | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if len(self.generators) != self.chart.dim:
            raise ValueError(f"a Dirac structure on a {self.chart.dim}-dimensional chart needs {self.chart.dim} generators")
        for g in self.generators:
            if g.chart != self.chart:
                raise ValueError("generator lives on a different chart")
        if self.ambient_poisson is not None:
            p = self.ambient_poisson
            if p.kind != MULTIVECTOR or p.degree != 2 or p.chart != self.chart:
                raise ValueError("ambient_poisson must be a bivector on the same chart")

    @property
    def dim(self) -> int:
        return self.chart.dim

    def rows(self) -> list[tuple[RatFun, ...]]:
        return [g.row() for g in self.generators]

    def bracket(self, s: GenSection, t: GenSection) -> GenSection:
        if self.ambient_poisson is not None:
            return bialgebroid_bracket(s, t, self.ambient_poisson, check=False)
        return courant_bracket(s, t)

    def anchor(self, s: GenSection) -> TensorField:
        if self.ambient_poisson is not None:
            return s.vec + sharp(self.ambient_poisson, s.form)
        return s.vec

    def functions(self) -> list[RatFun]:
        out = []
        for g in self.generators:
            out.extend(g.row())
        return out


# -- constructors ---------------------------------------------------------------

def _dx(chart: Chart, i: int) -> TensorField:
    return TensorField(chart, FORM, 1, {(i,): 1})


def _d(chart: Chart, i: int) -> TensorField:
    return TensorField(chart, MULTIVECTOR, 1, {(i,): 1})


def graph_of_bivector(pi: TensorField, name: str = "") -> DiracSpec:
    """``{pi#(dx_i) + dx_i}``; the bivector must be Poisson."""
    require_poisson(pi)
    chart = pi.chart
    gens = [GenSection(sharp(pi, _dx(chart, i)), _dx(chart, i)) for i in range(chart.dim)]
    return DiracSpec(chart, tuple(gens), name=name)


def graph_of_twoform(omega: TensorField, name: str = "") -> DiracSpec:
    """``{d_i + i_{d_i} omega}``; the form must be closed."""
    w = exterior_derivative(omega)
    if w:
        raise NotClosedError(w)
    chart = omega.chart
    gens = [GenSection(_d(chart, i), flat(omega, _d(chart, i))) for i in range(chart.dim)]
    return DiracSpec(chart, tuple(gens), name=name)


def tangent_dirac(chart: Chart, ambient_poisson: TensorField | None = None) -> DiracSpec:
    zero = TensorField.zero(chart, FORM, 1)
    return DiracSpec(chart, tuple(GenSection(_d(chart, i), zero) for i in range(chart.dim)), ambient_poisson, name="TM")


def cotangent_dirac(chart: Chart, ambient_poisson: TensorField | None = None) -> DiracSpec:
    zero = TensorField.zero(chart, MULTIVECTOR, 1)
    return DiracSpec(chart, tuple(GenSection(zero, _dx(chart, i)) for i in range(chart.dim)), ambient_poisson, name="T*M")


# -- pointwise linear algebra -------------------------------------------------

def fiber_at(spec: DiracSpec, point) -> list[list[Fraction]]:
    """Generator rows evaluated at a point (raises PoleError)."""
    return [list(g.at(point)) for g in spec.generators]


def _annihilator(rows: list[list[Fraction]], n: int) -> list[tuple]:
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    return list(kernel(rows))


def _span_equal(us, vs) -> bool:
    return same_span(us, vs)


def characteristic_equations_at(spec: DiracSpec, point) -> str | None:
    """Check ``L n TM = rho*(L)^0`` and ``L n T*M = rho(L)^0`` at a point.

    Returns None on success or a description of the first failure.
    """
    n = spec.dim
    rows = fiber_at(spec, point)
    if rank(rows) != n:
        return f"generators are dependent at {_fmt_point(point)} (fiber rank {rank(rows)})"
    vec = [r[:n] for r in rows]
    form = [r[n:] for r in rows]
    # combinations with zero form part give L n TM
    combos = kernel([[form[i][j] for i in range(n)] for j in range(n)])
    l_tm = [[sum((c[i] * vec[i][j] for i in range(n)), Fraction(0)) for j in range(n)] for c in combos]
    l_tm = [v for v in l_tm if any(v)]
    ann_forms = _annihilator([r for r in form if any(r)], n)
    if not _span_equal(l_tm, ann_forms):
        return f"L n TM != rho*(L)^0 at {_fmt_point(point)}"
    combos = kernel([[vec[i][j] for i in range(n)] for j in range(n)])
    l_tstar = [[sum((c[i] * form[i][j] for i in range(n)), Fraction(0)) for j in range(n)] for c in combos]
    l_tstar = [v for v in l_tstar if any(v)]
    ann_vecs = _annihilator([r for r in vec if any(r)], n)
    if not _span_equal(l_tstar, ann_vecs):
        return f"L n T*M != rho(L)^0 at {_fmt_point(point)}"
    return None


def _fmt_point(point) -> str:
    return "(" + ", ".join(str(Fraction(p)) for p in point) + ")"


# -- the main check -----------------------------------------------------------

@dataclass
class DiracReport:
    rank: int
    full_rank: bool = False
    isotropic: bool = False
    integrable: bool = False
    anchor: bool = False
    jacobi: bool = False
    characteristic: bool = False
    samples: int = 0
    seed: int = DEFAULT_SEED
    structure: dict = field(default_factory=dict)
    witness: str | None = None

    @property
    def ok(self) -> bool:
        return self.full_rank and self.isotropic and self.integrable and self.anchor and self.jacobi and self.characteristic

    def __bool__(self) -> bool:
        return self.ok

    def certificate(self) -> dict:
        return {
            "rank": self.rank,
            "isotropic": self.isotropic,
            "integrable": self.integrable,
            "jacobi": self.jacobi,
            "anchor": self.anchor,
            "characteristic_equations": self.characteristic,
            "samples": self.samples,
            "structure": {
                f"[s{i + 1},s{j + 1}]": [str(c) for c in coeffs] for (i, j), coeffs in sorted(self.structure.items())
            },
        }


def _closure(spec: DiracSpec, rows_t, s: GenSection, t: GenSection):
    b = spec.bracket(s, t)
    try:
        return b, solve_linear(rows_t, list(b.row())).particular
    except InconsistentSystem:
        return b, None


def check_dirac(spec: DiracSpec, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED, points=None) -> DiracReport:
    """Rank, isotropy, bracket closure, Jacobi, anchor identity and the
    characteristic equations at seeded sample points.  Never raises on
    mathematical failure: the first failing identity is the report's witness.
    """
    n = spec.dim
    rows = spec.rows()
    r = generic_rank(rows)
    rep = DiracReport(rank=r, seed=seed)
    rep.full_rank = r == n
    if not rep.full_rank:
        rep.witness = f"generator matrix has generic rank {r} < {n}"
        return rep
    gens = spec.generators
    for i in range(n):
        for j in range(i, n):
            p = pairing(gens[i], gens[j])
            if p:
                rep.witness = f"<s{i + 1}, s{j + 1}> = {p}"
                return rep
    rep.isotropic = True
    if spec.ambient_poisson is not None and not is_poisson(spec.ambient_poisson):
        rep.witness = "ambient bivector is not Poisson"
        return rep
    rows_t = [[rows[k][c] for k in range(n)] for c in range(2 * n)]
    structure = {}
    for i in range(n):
        for j in range(i + 1, n):
            b, coeffs = _closure(spec, rows_t, gens[i], gens[j])
            if coeffs is None:
                rep.witness = f"[s{i + 1}, s{j + 1}] = {b} is not in L"
                return rep
            if any(coeffs):
                structure[(i, j)] = tuple(coeffs)
    rep.integrable = True
    rep.structure = structure
    zero = spec.chart.zero()

    def coeffs_of(i, j):
        if i == j:
            return (zero,) * n
        if i < j:
            return structure.get((i, j), (zero,) * n)
        return tuple(-c for c in structure.get((j, i), (zero,) * n))

    def combo(coeffs) -> GenSection:
        out = GenSection.zero(spec.chart)
        for c, g in zip(coeffs, gens):
            if c:
                out = out + g.scale(c)
        return out

    anchors = [spec.anchor(g) for g in gens]
    for i in range(n):
        for j in range(i + 1, n):
            lhs = spec.anchor(combo(coeffs_of(i, j)))
            rhs = lie_bracket(anchors[i], anchors[j])
            if lhs != rhs:
                rep.witness = f"rho([s{i + 1}, s{j + 1}]) - [rho(s{i + 1}), rho(s{j + 1})] = {lhs - rhs}"
                return rep
    rep.anchor = True
    for i, j, k in combinations(range(n), 3):
        total = GenSection.zero(spec.chart)
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            total = total + spec.bracket(gens[a], combo(coeffs_of(b, c)))
        if total:
            rep.witness = f"Jacobiator of (s{i + 1}, s{j + 1}, s{k + 1}) = {total}"
            return rep
    rep.jacobi = True
    if points is None:
        points = sample_points(spec.chart, spec.functions(), samples, seed)
    for p in points:
        msg = characteristic_equations_at(spec, p)
        if msg:
            rep.witness = msg
            return rep
    rep.samples = len(points)
    rep.characteristic = True
    return rep


def _require(spec: DiracSpec, report: DiracReport | None, samples: int = 0) -> DiracReport:
    if report is None:
        report = check_dirac(spec, samples=samples, points=[] if samples == 0 else None)
    if not report:
        raise DiracError(f"not a Dirac structure: {report.witness}")
    return report


def dirac_to_algebroid(spec: DiracSpec, report: DiracReport | None = None) -> Algebroid:
    """Lie algebroid on L in the generator frame."""
    report = _require(spec, report)
    anchors = [spec.anchor(g) for g in spec.generators]
    return Algebroid(spec.chart, anchors, report.structure, name=spec.name or "L")


def modular_cocycle_dirac(spec: DiracSpec, choice: TrivializationChoice | None = None, report: DiracReport | None = None):
    return modular_cocycle(dirac_to_algebroid(spec, report), choice)


# -- characteristic distribution and pairs --------------------------------------

@dataclass(frozen=True)
class DistributionSpec:
    chart: Chart
    generators: tuple[TensorField, ...]
    rank: int
    involutive: bool
    singular: bool = False
    witness: str | None = None


def _clear_denominators(v: Sequence[RatFun], chart: Chart) -> list[RatFun]:
    scale = _lcm_den(v, chart)
    out = [x * scale for x in v]
    for x in out:
        if x:
            lc = as_fraction(x._num.LC)
            return [y / lc for y in out]
    return out


def characteristic_distribution(spec: DiracSpec, points=(), report: DiracReport | None = None) -> DistributionSpec:
    """``D_L = L n TM``: generators, generic rank, involutivity and a rank profile."""
    _require(spec, report)
    n = spec.dim
    chart = spec.chart
    rows = spec.rows()
    form_t = [[rows[i][n + j] for i in range(n)] for j in range(n)]
    combos = kernel(form_t)
    gens = []
    for c in combos:
        v = [sum((c[i] * rows[i][j] for i in range(n)), chart.zero()) for j in range(n)]
        if any(v):
            gens.append(vector_field(chart, _clear_denominators(v, chart)))
    r = generic_rank([g.components() for g in gens]) if gens else 0
    involutive = True
    witness = None
    for a in range(len(gens)):
        for b in range(a + 1, len(gens)):
            Z = lie_bracket(gens[a], gens[b])
            if Z and not _in_span([g.components() for g in gens], Z.components()):
                involutive, witness = False, f"[D{a + 1}, D{b + 1}] = {Z} leaves D"
                break
    singular = False
    for p in points:
        try:
            fib = fiber_at(spec, p)
        except PoleError:
            continue
        vec = [x[:n] for x in fib]
        form = [x[n:] for x in fib]
        ks = kernel([[form[i][j] for i in range(n)] for j in range(n)])
        local = [[sum((c[i] * vec[i][j] for i in range(n)), Fraction(0)) for j in range(n)] for c in ks]
        if (rank(local) if local else 0) != r:
            singular = True
            witness = f"rank of D drops or jumps at {_fmt_point(p)}"
            break
    return DistributionSpec(chart, tuple(gens), r, involutive, singular, witness)


def _in_span(vectors, target) -> bool:
    return in_span(vectors, target) is not None


@dataclass(frozen=True)
class CharacteristicPair:
    distribution: DistributionSpec
    bivector: TensorField


def characteristic_pair(spec: DiracSpec, points=(), report: DiracReport | None = None) -> CharacteristicPair:
    """``(D, Pi)`` with ``L = D + graph(Pi# on D^0)`` and ``Pi`` supported off D's pivot coordinates."""
    report = _require(spec, report)
    D = characteristic_distribution(spec, points, report)
    if D.singular:
        raise DiracError(f"no constant-rank certificate: {D.witness}")
    n = spec.dim
    chart = spec.chart
    zero = chart.zero()
    drows = [list(g.components()) for g in D.generators]
    red, pivots = rref(drows) if drows else ([], [])
    red = red[: len(pivots)]
    free = [c for c in range(n) if c not in pivots]
    unknowns = [(a, b) for a, b in combinations(free, 2)]
    col_of = {u: t for t, u in enumerate(unknowns)}
    A, rhs = [], []
    for g in spec.generators:
        alpha = g.form.components()
        X = g.vec.components()
        # non-pivot components of Pi#alpha - X + sum_p X^{pivot_p} d_p must vanish
        for b in free:
            row = [zero] * len(unknowns)
            for a in free:
                if a == b or not alpha[a]:
                    continue
                if a < b:
                    row[col_of[(a, b)]] = row[col_of[(a, b)]] + alpha[a]
                else:
                    row[col_of[(b, a)]] = row[col_of[(b, a)]] - alpha[a]
            target = X[b]
            for prow, pc in zip(red, pivots):
                if X[pc] and prow[b]:
                    target = target - X[pc] * prow[b]
            A.append(row)
            rhs.append(target)
    if unknowns:
        try:
            sol = solve_linear(A, rhs).particular
        except InconsistentSystem:
            raise DiracError("no rational-function bivector reconstructs L") from None
    else:
        sol = ()
        if any(rhs):
            raise DiracError("no rational-function bivector reconstructs L")
    matrix = [[zero] * n for _ in range(n)]
    for (a, b), v in zip(unknowns, sol):
        matrix[a][b] = v
        matrix[b][a] = -v
    Pi = bivector(chart, matrix)
    # reconstruction: D + {Pi#alpha + alpha : alpha in D^0}
    ann = kernel(drows) if drows else tuple(tuple(chart.one() if i == j else zero for j in range(n)) for i in range(n))
    rebuilt = [tuple(d) + (zero,) * n for d in drows]
    for alpha in ann:
        form = TensorField(chart, FORM, 1, {(i,): c for i, c in enumerate(alpha)})
        rebuilt.append(tuple(sharp(Pi, form).components()) + tuple(alpha))
    if not same_span(rebuilt, spec.rows()):
        raise DiracError("reconstruction identity fails for the computed characteristic pair")
    return CharacteristicPair(D, Pi)


# -- admissible functions ---------------------------------------------------------

def admissible_lift(spec: DiracSpec, f) -> TensorField:
    """A vector field ``X_f`` with ``X_f + df`` in L (raises NotAdmissibleError)."""
    chart = spec.chart
    if not isinstance(f, RatFun):
        f = RatFun.const(chart, f)
    n = spec.dim
    rows = spec.rows()
    df = [f.diff(i) for i in range(n)]
    system = [[rows[k][n + j] for k in range(n)] for j in range(n)]
    try:
        c = solve_linear(system, df).particular
    except InconsistentSystem as exc:
        raise NotAdmissibleError(f, exc.certificate) from None
    comps = [sum((c[k] * rows[k][j] for k in range(n)), chart.zero()) for j in range(n)]
    return vector_field(chart, comps)


def admissible_bracket(spec: DiracSpec, f, g) -> RatFun:
    """``{f, g} = X_f(g)``; antisymmetry is verified exactly."""
    chart = spec.chart
    f = f if isinstance(f, RatFun) else RatFun.const(chart, f)
    g = g if isinstance(g, RatFun) else RatFun.const(chart, g)
    Xf = admissible_lift(spec, f)
    Xg = admissible_lift(spec, g)
    fg = apply_vector(Xf, g)
    gf = apply_vector(Xg, f)
    if fg + gf:
        raise DiracError(f"admissible bracket is not antisymmetric: {{f,g}} + {{g,f}} = {fg + gf}")
    return fg


# -- bialgebroid ------------------------------------------------------------------

def bialgebroid_flatten(spec: DiracSpec, flip_sign: bool = False, report: DiracReport | None = None) -> DiracSpec:
    """Image of a bialgebroid Dirac structure under ``X + a -> X + pi#a + a``.

    ``flip_sign`` uses ``X - pi#a + a`` instead; it exists as a negative
    control and should make the comparison fail whenever ``pi#`` matters.
    Raises FlattenMismatch when the image's algebroid differs from the input's.
    """
    pi = spec.ambient_poisson
    if pi is None:
        raise ValueError("bialgebroid_flatten needs a spec with ambient_poisson")
    require_poisson(pi)
    report = _require(spec, report)
    gens = []
    for g in spec.generators:
        shift = sharp(pi, g.form)
        gens.append(GenSection(g.vec - shift if flip_sign else g.vec + shift, g.form))
    out = DiracSpec(spec.chart, tuple(gens), None, spec.reduction, name=(spec.name + " flattened").strip())
    out_report = check_dirac(out, points=[])
    if not out_report:
        raise FlattenMismatch(f"image is not a Dirac structure: {out_report.witness}")
    diff = compare_algebroids(dirac_to_algebroid(spec, report), dirac_to_algebroid(out, out_report), anchors_first=False)
    if diff:
        raise FlattenMismatch(diff)
    return out


# -- reductions -------------------------------------------------------------------

def descend(h: RatFun, projection: PolyMap) -> RatFun:
    """Express ``h`` as ``h' o p`` for a coordinate projection ``p``; raises if ``h`` does not descend."""
    src, quo = projection.source, projection.target
    idx = []
    for c in projection.components:
        match = [i for i in range(src.dim) if c == src.coord(i)]
        if len(match) != 1:
            raise DiracError(f"projection component {c} is not a source coordinate")
        idx.append(match[0])
    for i in range(src.dim):
        if i not in idx and h.diff(i):
            raise DiracError(f"{h} depends on the fiber coordinate {src.vars[i]}")
    images = [quo.zero()] * src.dim
    for a, i in enumerate(idx):
        images[i] = quo.coord(a)
    return h.compose(quo, images)


def verify_reduction(spec: DiracSpec, report: DiracReport | None = None) -> TensorField:
    """Check a declared reduction and return the quotient Poisson bivector.

    Verifies D_L = ker p_* and that admissible brackets of pulled-back
    quotient coordinates descend.
    """
    red = spec.reduction
    if red is None:
        raise ValueError("spec has no declared reduction")
    report = _require(spec, report)
    p = red.projection
    D = characteristic_distribution(spec, report=report)
    ker = kernel(p.jacobian())
    if not same_span([g.components() for g in D.generators], ker) or D.rank != len(ker):
        raise DiracError("characteristic distribution differs from the fibers of the projection")
    quo = red.quotient
    m = quo.dim
    matrix = [[quo.zero()] * m for _ in range(m)]
    for a in range(m):
        for b in range(a + 1, m):
            v = descend(admissible_bracket(spec, p.components[a], p.components[b]), p)
            matrix[a][b] = v
            matrix[b][a] = -v
    pi = bivector(quo, matrix)
    if not is_poisson(pi):
        raise NotPoissonError(pi)
    return pi
