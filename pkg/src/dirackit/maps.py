"""Dirac maps: backward and forward images, b-/f-Dirac checks, admissibility,
the relation algebroid over the graph of a map and its modular cocycle."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebroid import (
    Algebroid,
    AlgebroidError,
    AlgebroidMorphism,
    Cochain,
    ExactnessVerdict,
    TrivializationChoice,
    _lcm_den,
    check_morphism,
    exactness_test,
    modular_cocycle,
    pullback_algebroid,
    pullback_cochain,
    pullback_frame_coefficients,
)
from .calculus import PolyMap, apply_vector, vector_field
from .courant import GenSection, courant_bracket
from .dirac import DiracError, DiracReport, DiracSpec, dirac_to_algebroid, fiber_at
from .exact import (
    Chart,
    InconsistentSystem,
    PoleError,
    RatFun,
    RatMatrix,
    generic_rank,
    kernel,
    rank,
    same_span,
    solve_linear,
)
from .exact.linalg import rref
from .sampling import DEFAULT_SAMPLES, DEFAULT_SEED, sample_points

__all__ = [
    "DiracMapProblem",
    "MapReport",
    "AdmissibilityReport",
    "RelationAlgebroid",
    "backward_image_point",
    "forward_image_point",
    "backward_image",
    "forward_image",
    "check_dirac_map",
    "check_admissible",
    "relation_algebroid",
    "dirac_map_modular_cocycle",
    "pullback_identification",
    "is_submersion_at",
    "is_immersion_at",
    "immersion_comorphism",
]


@dataclass(frozen=True)
class DiracMapProblem:
    map: PolyMap
    source: DiracSpec
    target: DiracSpec
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.map.source != self.source.chart or self.map.target != self.target.chart:
            raise ValueError("map does not connect the source and target charts")

    def pulled_target_rows(self) -> list[tuple[RatFun, ...]]:
        """Target generator rows composed with the map (functions on the source)."""
        return [tuple(self.map.compose(c) for c in g.row()) for g in self.target.generators]

    def points(self) -> list[tuple[Fraction, ...]]:
        funcs = list(self.source.functions())
        for row in self.pulled_target_rows():
            funcs.extend(row)
        return sample_points(self.source.chart, funcs, self.samples, self.seed)


def _basis(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    if not rows:
        return []
    red, piv = rref(rows)
    return [list(r) for r in red[: len(piv)]]


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def backward_image_point(K: DiracSpec, phi: PolyMap, point) -> list[list[Fraction]]:
    """Basis of ``{(v, J^T a) : (J v, a) in K at phi(p)}`` (rows of length 2 dim M)."""
    m, n = phi.source.dim, phi.target.dim
    J = phi.jacobian().at(point)
    q = phi(point)
    krows = fiber_at(K, q)
    r = len(krows)
    # unknowns (v, c): J v - sum_k c_k w_k = 0
    system = []
    for b in range(n):
        system.append([J[b][j] for j in range(m)] + [-krows[k][b] for k in range(r)])
    sols = kernel(system) if system else [tuple(Fraction(int(i == j)) for j in range(m + r)) for i in range(m + r)]
    out = []
    for s in sols:
        v, c = s[:m], s[m:]
        a = [_dot(c, [krows[k][n + b] for k in range(r)]) for b in range(n)]
        jt_a = [_dot(a, [J[b][j] for b in range(n)]) for j in range(m)]
        out.append(list(v) + jt_a)
    return _basis(out)


def forward_image_point(L: DiracSpec, phi: PolyMap, point) -> list[list[Fraction]]:
    """Basis of ``{(J v, a) : (v, J^T a) in L at p}`` (rows of length 2 dim N)."""
    m, n = phi.source.dim, phi.target.dim
    J = phi.jacobian().at(point)
    lrows = fiber_at(L, point)
    r = len(lrows)
    # unknowns (c, a): sum_k c_k beta_k - J^T a = 0
    system = []
    for j in range(m):
        system.append([lrows[k][m + j] for k in range(r)] + [-J[b][j] for b in range(n)])
    sols = kernel(system)
    out = []
    for s in sols:
        c, a = s[:r], s[r:]
        v = [_dot(c, [lrows[k][j] for k in range(r)]) for j in range(m)]
        jv = [_dot(J[b], v) for b in range(n)]
        out.append(jv + list(a))
    return _basis(out)


def _symbolic_kernel_rows(system, chart: Chart):
    return kernel(RatMatrix(chart, system)) if system else ()


def backward_image(K: DiracSpec, phi: PolyMap) -> list[tuple[RatFun, ...]]:
    """Generators of the backward image over the source chart (generic points)."""
    m, n = phi.source.dim, phi.target.dim
    src = phi.source
    J = phi.jacobian().rows
    krows = [tuple(phi.compose(c) for c in g.row()) for g in K.generators]
    r = len(krows)
    system = [[J[b][j] for j in range(m)] + [-krows[k][b] for k in range(r)] for b in range(n)]
    out = []
    for s in _symbolic_kernel_rows(system, src):
        v, c = s[:m], s[m:]
        a = [sum((c[k] * krows[k][n + b] for k in range(r)), src.zero()) for b in range(n)]
        jt_a = [sum((a[b] * J[b][j] for b in range(n)), src.zero()) for j in range(m)]
        out.append(tuple(v) + tuple(jt_a))
    return out


def forward_image(L: DiracSpec, phi: PolyMap) -> list[tuple[RatFun, ...]]:
    """Generators of the forward image, with coefficients as functions on the source."""
    m, n = phi.source.dim, phi.target.dim
    src = phi.source
    J = phi.jacobian().rows
    lrows = L.rows()
    r = len(lrows)
    system = [[lrows[k][m + j] for k in range(r)] + [-J[b][j] for b in range(n)] for j in range(m)]
    out = []
    for s in _symbolic_kernel_rows(system, src):
        c, a = s[:r], s[r:]
        v = [sum((c[k] * lrows[k][j] for k in range(r)), src.zero()) for j in range(m)]
        jv = [sum((J[b][j] * v[j] for j in range(m)), src.zero()) for b in range(n)]
        out.append(tuple(jv) + tuple(a))
    return out


def is_submersion_at(phi: PolyMap, point) -> bool:
    return rank(phi.jacobian().at(point)) == phi.target.dim


def is_immersion_at(phi: PolyMap, point) -> bool:
    return rank(phi.jacobian().at(point)) == phi.source.dim


@dataclass
class MapReport:
    direction: str
    ok: bool
    samples: int = 0
    seed: int = DEFAULT_SEED
    symbolic: bool | None = None
    level: str = "samples"
    witness: str | None = None

    def __bool__(self) -> bool:
        return self.ok

    def certificate(self) -> dict:
        return {"direction": self.direction, "samples": self.samples, "level": self.level, "symbolic": self.symbolic}


def _fmt(point) -> str:
    return "(" + ", ".join(str(p) for p in point) + ")"


def check_dirac_map(problem: DiracMapProblem, direction: str, points=None) -> MapReport:
    """``L = B(K)`` (backward) or ``K o phi = F(L)`` (forward), at every sample
    point, plus a symbolic generator-matching certificate where available."""
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    phi, L, K = problem.map, problem.source, problem.target
    if points is None:
        points = problem.points()
    rep = MapReport(direction, ok=False, seed=problem.seed)
    for p in points:
        try:
            if direction == "backward":
                image = backward_image_point(K, phi, p)
                fiber = fiber_at(L, p)
            else:
                image = forward_image_point(L, phi, p)
                fiber = fiber_at(K, phi(p))
        except PoleError:
            continue
        if not same_span(image, fiber):
            rep.witness = f"{direction} image differs from the fiber at {_fmt(p)} (image rank {len(image)}, fiber rank {rank(fiber)})"
            return rep
        rep.samples += 1
    if direction == "backward":
        image = backward_image(K, phi)
        target = L.rows()
    else:
        image = forward_image(L, phi)
        target = problem.pulled_target_rows()
    rep.symbolic = same_span(image, target)
    if not rep.symbolic:
        rep.witness = f"{direction} image differs from the target generically"
        return rep
    rep.level = "symbolic+samples"
    rep.ok = True
    return rep


# -- the relation R over graph(phi) ----------------------------------------------

@dataclass
class AdmissibilityReport:
    admissible: bool
    generic_rank: int
    rank_profile: dict = field(default_factory=dict)
    witness: str | None = None

    def __bool__(self) -> bool:
        return self.admissible


def _membership_system(problem: DiracMapProblem, values=None):
    """Rows of the linear conditions on ``(X, alpha)`` in ``T_xM + T*_{phi(x)}N``.

    ``(X, J^T alpha)`` lies in L and ``(J X, alpha)`` lies in K; both are
    Lagrangian, so membership is orthogonality to all generators.
    """
    phi = problem.map
    m, n = phi.source.dim, phi.target.dim
    if values is None:
        J = phi.jacobian().rows
        lrows = problem.source.rows()
        krows = problem.pulled_target_rows()
        zero = phi.source.zero()
    else:
        J, lrows, krows = values
        zero = Fraction(0)
    system = []
    for row in lrows:
        Xk, beta = row[:m], row[m:]
        JX = [sum((J[b][j] * Xk[j] for j in range(m)), zero) for b in range(n)]
        system.append(list(beta) + list(JX))
    for row in krows:
        Y, gamma = row[:n], row[n:]
        gJ = [sum((gamma[b] * J[b][j] for b in range(n)), zero) for j in range(m)]
        system.append(gJ + list(Y))
    return system


def check_admissible(problem: DiracMapProblem, points=None) -> AdmissibilityReport:
    """Dimension of R at every sample point; admissible iff constant and equal to the generic value."""
    phi = problem.map
    m, n = phi.source.dim, phi.target.dim
    system = _membership_system(problem)
    gen = m + n - generic_rank(system)
    if points is None:
        points = problem.points()
    profile: dict[int, int] = {}
    witness = None
    for p in points:
        try:
            vals = (phi.jacobian().at(p), fiber_at(problem.source, p), fiber_at(problem.target, phi(p)))
        except PoleError:
            continue
        dim = m + n - rank(_membership_system(problem, vals))
        profile[dim] = profile.get(dim, 0) + 1
        if dim != gen and witness is None:
            witness = f"dim R = {dim} at {_fmt(p)}, generic {gen}"
    return AdmissibilityReport(witness is None, gen, profile, witness)


@dataclass(frozen=True)
class RelationAlgebroid:
    """R over graph(phi), parameterized by source coordinates.

    ``pairs[k] = (X_k, alpha_k)``: X_k a vector field on M, alpha_k a covector on
    N along phi.  ``first[k]`` is ``X_k + phi^* alpha_k`` (a section of L) and
    ``second[k]`` is ``phi_* X_k + alpha_k`` (a section of K along phi).
    """

    problem: DiracMapProblem
    pairs: tuple
    first: tuple[GenSection, ...]
    second: tuple[tuple[RatFun, ...], ...]
    algebroid: Algebroid
    source_algebroid: Algebroid
    target_algebroid: Algebroid
    morphism_i: AlgebroidMorphism
    morphism_j: AlgebroidMorphism


def _clear(v, chart):
    scale = _lcm_den(v, chart)
    return [x * scale for x in v]


def _solve_in(rows_t, target, what):
    try:
        return solve_linear(rows_t, list(target)).particular
    except InconsistentSystem:
        raise AlgebroidError(f"{what} does not close in the expected span") from None


def relation_algebroid(
    problem: DiracMapProblem,
    points=None,
    source_report: DiracReport | None = None,
    target_report: DiracReport | None = None,
) -> RelationAlgebroid:
    """Generators, bracket, anchor and the projections ``i: R -> L``, ``j: R -> K``."""
    adm = check_admissible(problem, points)
    if not adm:
        raise DiracError(f"map is not admissible: {adm.witness}")
    phi, L, K = problem.map, problem.source, problem.target
    M = phi.source
    m, n = M.dim, phi.target.dim
    zero = M.zero()
    J = phi.jacobian().rows
    A_L = dirac_to_algebroid(L, source_report)
    A_K = dirac_to_algebroid(K, target_report)
    gens = [_clear(v, M) for v in kernel(RatMatrix(M, _membership_system(problem)))]
    pairs, first, second = [], [], []
    for v in gens:
        X, alpha = v[:m], v[m:]
        jt_a = [sum((alpha[b] * J[b][j] for b in range(n)), zero) for j in range(m)]
        jx = [sum((J[b][j] * X[j] for j in range(m)), zero) for b in range(n)]
        pairs.append((tuple(X), tuple(alpha)))
        first.append(GenSection.from_row(M, list(X) + jt_a))
        second.append(tuple(jx) + tuple(alpha))
    r = len(gens)
    lrows = L.rows()
    l_t = [[lrows[k][c] for k in range(m)] for c in range(2 * m)]
    krows = problem.pulled_target_rows()
    k_t = [[krows[k][c] for k in range(n)] for c in range(2 * n)]
    i_fiber = [_solve_in(l_t, s.row(), "first component") for s in first]
    j_fiber = [_solve_in(k_t, t, "second component") for t in second]
    anchors = [vector_field(M, list(X)) for X, _ in pairs]
    pulled_c = {}

    def k_bracket(p, q):
        if (p, q) not in pulled_c:
            pulled_c[(p, q)] = tuple(phi.compose(c) for c in A_K.bracket(p, q))
        return pulled_c[(p, q)]

    rows_R = [tuple(s.row()) + t for s, t in zip(first, second)]
    r_t = [[rows_R[k][c] for k in range(r)] for c in range(2 * m + 2 * n)]
    table = {}
    for a in range(r):
        for b in range(a + 1, r):
            top = courant_bracket(first[a], first[b])
            h, g = j_fiber[a], j_fiber[b]
            coeff = [zero] * n
            for p in range(n):
                if not h[p]:
                    continue
                for q in range(n):
                    if not g[q] or p == q:
                        continue
                    hg = h[p] * g[q]
                    coeff = [x + hg * c for x, c in zip(coeff, k_bracket(p, q))]
            for q in range(n):
                coeff[q] = coeff[q] + apply_vector(anchors[a], g[q]) - apply_vector(anchors[b], h[q])
            bottom = [sum((coeff[k] * krows[k][c] for k in range(n)), zero) for c in range(2 * n)]
            row = tuple(top.row()) + tuple(bottom)
            try:
                c = solve_linear(r_t, list(row)).particular
            except InconsistentSystem:
                raise AlgebroidError(f"bracket of R generators {a + 1}, {b + 1} leaves R") from None
            if any(c):
                table[(a, b)] = tuple(c)
    R = Algebroid(M, anchors, table, name="R")
    # anchor (X, phi_* X) is tangent to graph(phi) by construction; check it anyway
    for k, (X, _) in enumerate(pairs):
        jx = second[k][:n]
        if tuple(jx) != tuple(sum((J[b][j] * X[j] for j in range(m)), zero) for b in range(n)):
            raise AlgebroidError(f"anchor of R generator {k + 1} is not tangent to graph(phi)")
    Mi = AlgebroidMorphism(R, A_L, PolyMap.identity(M), RatMatrix(M, i_fiber) if r else RatMatrix(M, []))
    Mj = AlgebroidMorphism(R, A_K, phi, RatMatrix(M, j_fiber) if r else RatMatrix(M, []))
    for name, mor in (("i", Mi), ("j", Mj)):
        rep = check_morphism(mor)
        if not rep:
            raise AlgebroidError(f"projection {name} is not a morphism: {rep.witness}")
    return RelationAlgebroid(problem, tuple(pairs), tuple(first), tuple(second), R, A_L, A_K, Mi, Mj)


def dirac_map_modular_cocycle(
    problem: DiracMapProblem,
    source_choice: TrivializationChoice | None = None,
    target_choice: TrivializationChoice | None = None,
    degree_bound: int = 2,
    relation: RelationAlgebroid | None = None,
) -> tuple[Cochain, ExactnessVerdict, RelationAlgebroid]:
    """``i^* alpha_L - j^* alpha_K`` on R, with the exactness verdict."""
    rel = relation or relation_algebroid(problem)
    a_l = modular_cocycle(rel.source_algebroid, source_choice)
    a_k = modular_cocycle(rel.target_algebroid, target_choice)
    xi = pullback_cochain(rel.morphism_i, a_l) - pullback_cochain(rel.morphism_j, a_k)
    return xi, exactness_test(rel.algebroid, xi, degree_bound), rel


# -- b-Dirac submersions and the pullback algebroid -------------------------------

def pullback_identification(
    L: DiracSpec,
    K: DiracSpec,
    phi: PolyMap,
    source_report: DiracReport | None = None,
    target_report: DiracReport | None = None,
):
    """Frame change from L to ``phi^!! K`` for a b-Dirac submersion.

    A section ``(v, J^T a)`` of L corresponds to ``(v, k)`` with ``k = (J v, a)``
    in K along phi.  Returns ``(A_L, P, Psi)`` where ``Psi: A_L -> P`` covers the
    identity; callers check it with :func:`check_morphism` and invertibility.
    """
    M = phi.source
    m, n = M.dim, phi.target.dim
    zero = M.zero()
    A_L = dirac_to_algebroid(L, source_report)
    A_K = dirac_to_algebroid(K, target_report)
    P, _ = pullback_algebroid(A_K, phi)
    J = phi.jacobian().rows
    jt = [[J[b][j] for b in range(n)] for j in range(m)]
    krows = [tuple(phi.compose(c) for c in g.row()) for g in K.generators]
    k_t = [[krows[k][c] for k in range(n)] for c in range(2 * n)]
    fiber = []
    for g in L.generators:
        v = g.vec.components()
        beta = g.form.components()
        a = _solve_in(jt, beta, "form part")
        jv = [sum((J[b][j] * v[j] for j in range(m)), zero) for b in range(n)]
        h = _solve_in(k_t, jv + list(a), "image in K")
        fiber.append(pullback_frame_coefficients(P, A_K.rank, g.vec, h))
    Psi = AlgebroidMorphism(A_L, P, PolyMap.identity(M), RatMatrix(M, fiber))
    return A_L, P, Psi


def immersion_comorphism(problem: DiracMapProblem) -> RatMatrix:
    """Coefficients of ``Y + beta -> (phi_*)^{-1} Y + phi^* beta`` in the L frame.

    Row ``k`` is the image of the k-th generator of K along phi.  Fails if some
    ``Y`` is not in the image of the tangent map.
    """
    phi, L = problem.map, problem.source
    M = phi.source
    m, n = M.dim, phi.target.dim
    zero = M.zero()
    J = phi.jacobian().rows
    lrows = L.rows()
    l_t = [[lrows[k][c] for k in range(len(lrows))] for c in range(2 * m)]
    out = []
    for row in problem.pulled_target_rows():
        Y, beta = list(row[:n]), row[n:]
        try:
            X = solve_linear([list(r) for r in J], Y).particular
        except InconsistentSystem:
            raise DiracError("a vector of K is not tangent to the image of phi") from None
        jt_b = [sum((beta[b] * J[b][j] for b in range(n)), zero) for j in range(m)]
        out.append(_solve_in(l_t, list(X) + jt_b, "comorphism image"))
    return RatMatrix(M, out)
