"""Named checks that a document can request, each returning a verdict with a
certificate (on PASS) or a witness (otherwise)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from ..algebroid import (
    AlgebroidError,
    AlgebroidMorphism,
    Cochain,
    check_axioms,
    check_morphism,
    comorphism_pullback,
    compatible_choice,
    compose_morphisms,
    cotangent_algebroid,
    da_differential,
    distribution_algebroid,
    exactness_test,
    modular_cocycle,
    morphism_modular_cocycle,
    pullback_algebroid,
    pullback_cochain,
    TrivializationChoice,
)
from ..calculus import (
    FORM,
    PolyMap,
    TensorField,
    _det,
    bivector,
    exterior_derivative,
    koszul_bracket,
    lie_derivative,
    modular_vector_field,
    one_form,
    pair,
    poisson_bracket,
    pullback_form,
    scalar,
    sharp,
    two_form,
    vector_field,
)
from ..courant import _poisson_witness
from ..dirac import (
    DiracError,
    admissible_bracket,
    bialgebroid_flatten,
    characteristic_distribution,
    characteristic_pair,
    check_dirac,
    descend,
    dirac_to_algebroid,
    graph_of_bivector,
    graph_of_twoform,
    modular_cocycle_dirac,
    verify_reduction,
)
from ..exact import Chart, RatFun, RatMatrix, generic_rank, parse_expr, print_expr, same_span
from ..maps import (
    DiracMapProblem,
    backward_image,
    check_admissible,
    check_dirac_map,
    dirac_map_modular_cocycle,
    immersion_comorphism,
    is_immersion_at,
    pullback_identification,
    relation_algebroid,
)
from .document import Document, InputError, iter_expressions

__all__ = ["CheckResult", "Options", "CHECKS", "run_check"]

PASS, FAIL, INCONCLUSIVE, ERROR = "PASS", "FAIL", "INCONCLUSIVE", "ERROR"


@dataclass
class Options:
    seed: int | None = None
    samples: int | None = None
    degree_bound: int = 2
    flip_sharp: bool = False

    def seed_for(self, doc: Document) -> int:
        if self.seed is not None:
            return self.seed
        block = doc.raw.get("map_problem") or {}
        return int(block.get("seed", 0))

    def samples_for(self, doc: Document) -> int:
        if self.samples is not None:
            return self.samples
        block = doc.raw.get("map_problem") or {}
        return int(block.get("samples", 100))


@dataclass
class CheckResult:
    verdict: str
    certificate: dict | None = None
    witness: str | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"verdict": self.verdict}
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _ok(**cert) -> CheckResult:
    return CheckResult(PASS, cert)


def _fail(witness: str, **cert) -> CheckResult:
    return CheckResult(FAIL, cert or None, witness)


def _tensor_json(T: TensorField) -> dict:
    return {",".join(str(i + 1) for i in k): str(v) for k, v in sorted(T.comps.items())}


def _cochain_json(c: Cochain) -> list[str]:
    return [str(v) for v in c.values()]


def _require(value, what: str):
    if value is None:
        raise InputError(f"this check needs a {what} block")
    return value


def _values_match(doc: Document, key: str, chart: Chart, computed: list[RatFun]) -> str | None:
    """Compare against ``values[key]`` (a list of expressions) if present."""
    if key not in doc.values:
        return None
    raw = doc.values[key]
    if not isinstance(raw, list) or len(raw) != len(computed):
        raise InputError(f"values.{key}: expected a list of {len(computed)} expressions")
    for i, (r, c) in enumerate(zip(raw, computed)):
        want = parse_expr(r, chart) if isinstance(r, str) else RatFun.const(chart, r)
        if want != c:
            return f"{key}[{i + 1}]: expected {want}, computed {c}"
    return None


def _matrix_value(doc: Document, key: str, chart: Chart):
    raw = doc.values[key]
    rows = [[parse_expr(x, chart) if isinstance(x, str) else RatFun.const(chart, x) for x in r] for r in raw]
    return rows


# -- individual checks ------------------------------------------------------------

def check_roundtrip(doc: Document, opts: Options) -> CheckResult:
    count = 0
    for where, text, names in iter_expressions(doc.raw):
        chart = Chart(names)
        f = parse_expr(text, chart)
        back = parse_expr(print_expr(f), chart)
        if back != f or print_expr(back) != print_expr(f):
            return _fail(f"{where}: {text!r} -> {print_expr(f)!r} does not round-trip")
        count += 1
    return _ok(expressions=count)


def check_poisson(doc: Document, opts: Options) -> CheckResult:
    pi = _require(doc.poisson, "poisson")
    w = _poisson_witness(pi)
    if w:
        return _fail(f"[pi,pi] = {w}", schouten=_tensor_json(w))
    return _ok(schouten="0")


def check_modular_vector_field(doc: Document, opts: Options) -> CheckResult:
    pi = _require(doc.poisson, "poisson")
    X = modular_vector_field(pi, doc.trivialization.volume(doc.chart))
    comps = list(X.components())
    bad = _values_match(doc, "modular_vector_field", doc.chart, comps)
    if bad:
        return _fail(bad)
    return _ok(modular_vector_field=[str(c) for c in comps])


def check_modular_twice(doc: Document, opts: Options) -> CheckResult:
    """The cotangent modular cocycle equals twice the modular vector field's pairing."""
    pi = _require(doc.poisson, "poisson")
    A = cotangent_algebroid(pi)
    alpha = modular_cocycle(A).values()
    X = modular_vector_field(pi)
    for i in range(doc.chart.dim):
        dxi = TensorField(doc.chart, FORM, 1, {(i,): 1})
        want = pair(dxi, X) * 2
        if alpha[i] != want:
            return _fail(f"alpha(dx_{i + 1}) = {alpha[i]} but 2<X_mu, dx_{i + 1}> = {want}")
    return _ok(cocycle=[str(a) for a in alpha])


def check_algebroid_axioms(doc: Document, opts: Options) -> CheckResult:
    A = _require(doc.algebroid, "algebroid or poisson")
    rep = check_axioms(A)
    if not rep:
        return _fail(rep.witness)
    return _ok(rank=A.rank, identities=rep.checked)


def check_modular_cocycle(doc: Document, opts: Options) -> CheckResult:
    A = _require(doc.algebroid, "algebroid or poisson")
    rep = check_axioms(A)
    if not rep:
        return _fail(f"axioms: {rep.witness}")
    alpha = modular_cocycle(A, doc.trivialization, check=False)
    d = da_differential(A, alpha)
    if d:
        return _fail(f"d_A(alpha) = {d}")
    bad = _values_match(doc, "modular_cocycle", doc.chart, list(alpha.values()))
    if bad:
        return _fail(bad)
    return _ok(cocycle=_cochain_json(alpha), closed=True)


def _verdict_of(v) -> CheckResult:
    if v.kind == "inconclusive":
        return CheckResult(INCONCLUSIVE, None, "no polynomial or logarithmic primitive within the degree bound")
    return _ok(kind=v.kind, potential=str(v.potential))


def _expected_exactness(doc: Document, chart: Chart, v) -> str | None:
    want = doc.values.get("exactness")
    if want is None or v.kind == "inconclusive":
        return None
    if not isinstance(want, dict) or "kind" not in want:
        raise InputError("values.exactness: expected {kind, potential}")
    if want["kind"] != v.kind:
        return f"exactness: expected {want['kind']}, got {v.kind}"
    if "potential" in want and v.potential is not None:
        p = parse_expr(want["potential"], chart)
        if p != v.potential:
            return f"exactness potential: expected {p}, got {v.potential}"
    return None


def check_exactness(doc: Document, opts: Options) -> CheckResult:
    A = _require(doc.algebroid, "algebroid or poisson")
    xi = doc.cochain if doc.cochain is not None else modular_cocycle(A, doc.trivialization)
    v = exactness_test(A, xi, opts.degree_bound)
    bad = _expected_exactness(doc, doc.chart, v)
    if bad:
        return _fail(bad)
    res = _verdict_of(v)
    if res.certificate is not None:
        res.certificate["cochain"] = _cochain_json(xi)
    return res


def check_dirac_structure(doc: Document, opts: Options) -> CheckResult:
    L = _require(doc.dirac, "dirac")
    rep = check_dirac(L, samples=opts.samples_for(doc), seed=opts.seed_for(doc))
    if not rep:
        return _fail(rep.witness)
    return _ok(**rep.certificate())


def check_dirac_modular_cocycle(doc: Document, opts: Options) -> CheckResult:
    L = _require(doc.dirac, "dirac")
    try:
        alpha = modular_cocycle_dirac(L, doc.trivialization)
    except DiracError as exc:
        return _fail(str(exc))
    bad = _values_match(doc, "dirac_modular_cocycle", doc.chart, list(alpha.values()))
    if bad:
        return _fail(bad)
    return _ok(cocycle=_cochain_json(alpha))


def check_characteristic_pair(doc: Document, opts: Options) -> CheckResult:
    L = _require(doc.dirac, "dirac")
    try:
        cp = characteristic_pair(L)
    except DiracError as exc:
        return _fail(str(exc))
    D = cp.distribution
    if "characteristic_rank" in doc.values and int(doc.values["characteristic_rank"]) != D.rank:
        return _fail(f"characteristic rank: expected {doc.values['characteristic_rank']}, got {D.rank}")
    if "characteristic_bivector" in doc.values:
        want = bivector(doc.chart, _matrix_value(doc, "characteristic_bivector", doc.chart))
        if want != cp.bivector:
            return _fail(f"characteristic bivector: expected {want}, got {cp.bivector}")
    return _ok(
        rank=D.rank,
        distribution=[str(g) for g in D.generators],
        bivector=_tensor_json(cp.bivector),
        involutive=D.involutive,
    )


def check_reduction(doc: Document, opts: Options) -> CheckResult:
    L = _require(doc.dirac, "dirac")
    _require(doc.reduction, "reduction")
    try:
        pi = verify_reduction(L)
    except (DiracError, ValueError) as exc:
        return _fail(str(exc))
    q = doc.reduction.quotient
    if "quotient_poisson" in doc.values:
        want = bivector(q, _matrix_value(doc, "quotient_poisson", q))
        if want != pi:
            return _fail(f"quotient bivector: expected {want}, got {pi}")
    return _ok(quotient_poisson=_tensor_json(pi))


def check_admissible_bracket(doc: Document, opts: Options) -> CheckResult:
    L = _require(doc.dirac, "dirac")
    cases = doc.values.get("admissible_bracket", [])
    if not isinstance(cases, list) or not cases:
        raise InputError("values.admissible_bracket: expected a non-empty list of {f, g, value}")
    out = []
    for c in cases:
        f, g = parse_expr(c["f"], doc.chart), parse_expr(c["g"], doc.chart)
        want = parse_expr(c["value"], doc.chart)
        try:
            got = admissible_bracket(L, f, g)
        except DiracError as exc:
            return _fail(str(exc))
        if got != want:
            return _fail(f"{{{f}, {g}}}: expected {want}, got {got}")
        out.append(f"{{{f}, {g}}} = {got}")
    return _ok(brackets=out)


def check_bialgebroid_flatten(doc: Document, opts: Options) -> CheckResult:
    L = _require(doc.dirac, "dirac")
    if L.ambient_poisson is None:
        raise InputError("bialgebroid_flatten needs dirac.ambient_poisson")
    try:
        out = bialgebroid_flatten(L, flip_sign=opts.flip_sharp)
    except DiracError as exc:
        return _fail(str(exc))
    return _ok(generators=[str(g) for g in out.generators], flipped=opts.flip_sharp)


def _problem(doc: Document, opts: Options):
    p = doc.map_problem(samples=opts.samples, seed=opts.seed)
    if p is None:
        raise InputError("this check needs a map_problem block")
    return p


def _map_direction(direction: str):
    def run(doc: Document, opts: Options) -> CheckResult:
        rep = check_dirac_map(_problem(doc, opts), direction)
        if not rep:
            return _fail(rep.witness, **rep.certificate())
        return _ok(**rep.certificate())

    return run


def check_admissible_map(doc: Document, opts: Options) -> CheckResult:
    rep = check_admissible(_problem(doc, opts))
    prof = {str(k): v for k, v in sorted(rep.rank_profile.items())}
    if not rep:
        return _fail(rep.witness, rank_profile=prof)
    return _ok(generic_rank=rep.generic_rank, rank_profile=prof)


def check_relation_algebroid(doc: Document, opts: Options) -> CheckResult:
    try:
        rel = relation_algebroid(_problem(doc, opts))
    except (DiracError, ValueError) as exc:
        return _fail(str(exc))
    rank = rel.algebroid.rank
    if "relation_rank" in doc.values and int(doc.values["relation_rank"]) != rank:
        return _fail(f"rank of R: expected {doc.values['relation_rank']}, got {rank}")
    return _ok(
        rank=rank,
        generators=[f"({s}, {list(map(str, t))})" for s, t in zip(rel.first, rel.second)],
        i_fiber=[[str(x) for x in r] for r in rel.morphism_i.fiber.rows],
        j_fiber=[[str(x) for x in r] for r in rel.morphism_j.fiber.rows],
    )


def check_mod_phi(doc: Document, opts: Options) -> CheckResult:
    xi, verdict, _ = dirac_map_modular_cocycle(
        _problem(doc, opts), doc.map_source.trivialization, doc.map_target.trivialization, opts.degree_bound
    )
    bad = _values_match(doc, "mod_phi", doc.chart, list(xi.values()))
    if bad:
        return _fail(bad)
    bad = _expected_exactness(doc, doc.chart, verdict)
    if bad:
        return _fail(bad)
    res = _verdict_of(verdict)
    if res.certificate is not None:
        res.certificate["cocycle"] = _cochain_json(xi)
    return res


def check_mod_phi_zero(doc: Document, opts: Options) -> CheckResult:
    """mod phi vanishes on the nose; b-Dirac submersions use the compatible source choice."""
    problem = _problem(doc, opts)
    tgt_choice = doc.map_target.trivialization
    src_choice = doc.map_source.trivialization
    compatible = _submersion_choice(problem, tgt_choice)
    if compatible is not None:
        src_choice = compatible
    xi, _, _ = dirac_map_modular_cocycle(problem, src_choice, tgt_choice, opts.degree_bound)
    if xi:
        return _fail(f"mod phi cocycle is {_cochain_json(xi)}")
    return _ok(cocycle=_cochain_json(xi), compatible_choice=compatible is not None)


def check_backward_image_graph(doc: Document, opts: Options) -> CheckResult:
    """The backward image of a presymplectic graph is the graph of the pulled-back form."""
    problem = _problem(doc, opts)
    omega = _require(doc.map_target.twoform, "map_problem.target.twoform")
    pulled = pullback_form(problem.map, omega)
    graph = graph_of_twoform(pulled)
    image = backward_image(problem.target, problem.map)
    if not same_span(image, graph.rows()):
        return _fail("backward image is not the graph of the pulled-back form")
    src = problem.map.source
    if "pullback_form" in doc.values:
        want = two_form(src, _matrix_value(doc, "pullback_form", src))
        if want != pulled:
            return _fail(f"pulled-back form: expected {want}, got {pulled}")
    return _ok(pullback_form=_tensor_json(pulled), image=[[str(x) for x in r] for r in image])


def check_pullback_algebroid(doc: Document, opts: Options) -> CheckResult:
    """L is isomorphic to the pullback algebroid of K along the map."""
    problem = _problem(doc, opts)
    try:
        A_L, P, Psi = pullback_identification(problem.source, problem.target, problem.map)
    except (DiracError, ValueError) as exc:
        return _fail(str(exc))
    rep = check_axioms(P)
    if not rep:
        return _fail(f"pullback algebroid axioms: {rep.witness}")
    rep = check_morphism(Psi)
    if not rep:
        return _fail(f"identification is not a morphism: {rep.witness}")
    if generic_rank(Psi.fiber) != A_L.rank or P.rank != A_L.rank:
        return _fail("identification is not invertible")
    return _ok(fiber=[[str(x) for x in r] for r in Psi.fiber.rows], rank=P.rank)


def check_comorphism_match(doc: Document, opts: Options) -> CheckResult:
    """R is identified with the comorphism pullback and the two cocycles agree entry by entry."""
    problem = _problem(doc, opts)
    A = _require(doc.map_source.algebroid, "map_problem.source poisson/algebroid")
    B = _require(doc.map_target.algebroid, "map_problem.target poisson/algebroid")
    phi = problem.map
    M = phi.source
    if "comorphism" in doc.values:
        fiber = RatMatrix(M, _matrix_value_general(doc.values["comorphism"], M))
    else:
        fiber = phi.jacobian()
    C, coc = comorphism_pullback(A, B, phi, fiber)
    xi, _, rel = dirac_map_modular_cocycle(problem, degree_bound=opts.degree_bound)
    # R generator k corresponds to sum_b alpha_{k,b} e_b in phi^!B
    ident = RatMatrix(M, [list(alpha) for _, alpha in rel.pairs])
    mor = AlgebroidMorphism(rel.algebroid, C, PolyMap.identity(M), ident)
    rep = check_morphism(mor)
    if not rep:
        return _fail(f"R -> phi^!B is not a morphism: {rep.witness}")
    if generic_rank(ident) != C.rank or rel.algebroid.rank != C.rank:
        return _fail("R -> phi^!B is not invertible")
    values = coc.values()
    for k, (_, alpha) in enumerate(rel.pairs):
        want = sum((a * v for a, v in zip(alpha, values)), M.zero())
        if xi[(k,)] != want:
            return _fail(f"entry {k + 1}: mod phi gives {xi[(k,)]}, comorphism cocycle gives {want}")
    return _ok(comorphism_cocycle=_cochain_json(coc), mod_phi=_cochain_json(xi))


def _matrix_value_general(raw, chart: Chart):
    return [[parse_expr(x, chart) if isinstance(x, str) else RatFun.const(chart, x) for x in r] for r in raw]


def check_immersion_comorphism(doc: Document, opts: Options) -> CheckResult:
    """An f-Dirac immersion is b-Dirac and defines a comorphism between L and K."""
    problem = _problem(doc, opts)
    fwd = check_dirac_map(problem, "forward")
    if not fwd:
        return _fail(f"not f-Dirac: {fwd.witness}")
    pts = problem.points()
    bad = [p for p in pts if not is_immersion_at(problem.map, p)]
    if bad:
        return _fail(f"not an immersion at {bad[0]}")
    bwd = check_dirac_map(problem, "backward", pts)
    if not bwd:
        return _fail(f"f-Dirac immersion is not b-Dirac: {bwd.witness}")
    try:
        fiber = immersion_comorphism(problem)
        A_L = dirac_to_algebroid(problem.source)
        A_K = dirac_to_algebroid(problem.target)
        C, coc = comorphism_pullback(A_L, A_K, problem.map, fiber)
    except (DiracError, ValueError) as exc:
        return _fail(str(exc))
    return _ok(comorphism=[[str(x) for x in r] for r in fiber.rows], cocycle=_cochain_json(coc))


def check_pullback_cocycle(doc: Document, opts: Options) -> CheckResult:
    """The pullback morphism's modular cocycle vanishes for compatible choices."""
    phi = _require(doc.map, "map_problem")
    B = _require(doc.map_target.algebroid, "map_problem.target algebroid or poisson")
    tgt_choice = doc.map_target.trivialization
    try:
        P, Phi = pullback_algebroid(B, phi)
    except AlgebroidError as exc:
        return _fail(str(exc))
    rep = check_axioms(P)
    if not rep:
        return _fail(f"pullback algebroid axioms: {rep.witness}")
    rep = check_morphism(Phi)
    if not rep:
        return _fail(f"pullback morphism: {rep.witness}")
    choice = compatible_choice(P, phi, tgt_choice)
    xi = morphism_modular_cocycle(Phi, choice, tgt_choice)
    if xi:
        return _fail(f"morphism cocycle is {_cochain_json(xi)}")
    return _ok(rank=P.rank, anchors=[str(a) for a in P.anchors], cocycle=_cochain_json(xi))


def _lemma_block(doc: Document):
    block = doc.raw.get("lemma")
    if not isinstance(block, dict):
        raise InputError("this check needs a lemma block")
    try:
        quo = Chart(block["quotient_chart"])
        M = doc.chart
        p = PolyMap(M, quo, [parse_expr(c, M) for c in block["projection"]])
        pi = bivector(quo, _matrix_value_general(block["poisson"], quo))
        alpha = one_form(quo, _matrix_value_general([block["alpha"]], quo)[0])
        beta = one_form(quo, _matrix_value_general([block["beta"]], quo)[0])
        f, g = parse_expr(block["f"], M), parse_expr(block["g"], M)
        X = vector_field(M, _matrix_value_general([block["X"]], M)[0])
        Y = vector_field(M, _matrix_value_general([block["Y"]], M)[0])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"lemma: {exc}") from None
    return p, pi, alpha, beta, f, g, X, Y


def check_lemma(doc: Document, opts: Options) -> CheckResult:
    """``fg p^*[a,b]_pi = g L_X(p^*b) - f L_Y(p^*a) + d<f p^*a, Y>`` under the projection hypotheses."""
    p, pi, alpha, beta, f, g, X, Y = _lemma_block(doc)
    J = p.jacobian()
    for name, V, h, form in (("X", X, f, alpha), ("Y", Y, g, beta)):
        pushed = J.apply(V.components())
        want = [p.compose(c) * h for c in sharp(pi, form).components()]
        if tuple(pushed) != tuple(want):
            return _fail(f"hypothesis on {name} fails: p_*{name} = {list(map(str, pushed))}")
    pa, pb = pullback_form(p, alpha), pullback_form(p, beta)
    lhs = pullback_form(p, koszul_bracket(pi, alpha, beta)) * (f * g)
    rhs = lie_derivative(X, pb) * g - lie_derivative(Y, pa) * f + exterior_derivative(scalar(doc.chart, pair(pa * f, Y)))
    if lhs != rhs:
        return _fail(f"lhs {lhs} differs from rhs {rhs}")
    return _ok(lhs=_tensor_json(lhs), rhs=_tensor_json(rhs))


def check_char_mod_zero(doc: Document, opts: Options) -> CheckResult:
    """The characteristic distribution's modular cocycle is exact."""
    L = _require(doc.dirac, "dirac")
    D = characteristic_distribution(L)
    if not D.involutive or not D.generators:
        return _fail(D.witness or "characteristic distribution is zero")
    A = distribution_algebroid(doc.chart, D.generators)
    xi = modular_cocycle(A)
    v = exactness_test(A, xi, opts.degree_bound)
    res = _verdict_of(v)
    if res.certificate is not None:
        res.certificate["cocycle"] = _cochain_json(xi)
    return res


def _submersion_data(problem, tgt_choice: TrivializationChoice):
    """``(A_L, Psi, Phi, choice on L)`` for a b-Dirac submersion; the choice on L is
    transported from the compatible one on the pullback algebroid through ``Psi``."""
    phi = problem.map
    A_L, P, Psi = pullback_identification(problem.source, problem.target, phi)
    _, Phi = pullback_algebroid(dirac_to_algebroid(problem.target), phi)
    p_choice = compatible_choice(P, phi, tgt_choice)
    det = _det(Psi.fiber.rows, phi.source)
    return A_L, Psi, Phi, TrivializationChoice(p_choice.frame(phi.source) / det, p_choice.base_volume)


def _submersion_choice(problem, tgt_choice: TrivializationChoice) -> TrivializationChoice | None:
    if not check_dirac_map(problem, "backward"):
        return None
    try:
        A_L, Psi, _, choice = _submersion_data(problem, tgt_choice)
    except (AlgebroidError, DiracError, ValueError):
        return None
    if not check_morphism(Psi) or generic_rank(Psi.fiber) != A_L.rank:
        return None
    return choice


def check_mod_pullback(doc: Document, opts: Options) -> CheckResult:
    """Modular cocycle of L equals the pullback of the quotient's, with compatible choices."""
    problem = _problem(doc, opts)
    phi = problem.map
    tgt_choice = doc.map_target.trivialization
    try:
        A_L, Psi, Phi, l_choice = _submersion_data(problem, tgt_choice)
    except (DiracError, ValueError) as exc:
        return _fail(str(exc))
    alpha_l = modular_cocycle(A_L, l_choice)
    pulled = pullback_cochain(compose_morphisms(Psi, Phi), modular_cocycle(Phi.target, tgt_choice))
    if alpha_l != pulled:
        return _fail(f"mod L = {_cochain_json(alpha_l)} but the pulled-back quotient cocycle is {_cochain_json(pulled)}")
    return _ok(cocycle=_cochain_json(alpha_l), frame_scale=str(l_choice.frame(phi.source)))


def _quotient_data(side, where: str):
    red = side.reduction
    L = side.dirac
    if red is None or L is None:
        raise InputError(f"{where} needs dirac and reduction blocks")
    return L, red, verify_reduction(L)


def _quotient_map(problem, src_red, tgt_red) -> PolyMap:
    comps = [descend(problem.map.compose(c), src_red.projection) for c in tgt_red.projection.components]
    return PolyMap(src_red.quotient, tgt_red.quotient, comps)


def check_bdirac_quotient(doc: Document, opts: Options) -> CheckResult:
    """A b-Dirac map preserving the foliations induces a b-Dirac map of the quotient Poisson graphs."""
    problem = _problem(doc, opts)
    rep = check_dirac_map(problem, "backward")
    if not rep:
        return _fail(f"not b-Dirac: {rep.witness}")
    try:
        _, src_red, pi_m = _quotient_data(doc.map_source, "map_problem.source")
        _, tgt_red, pi_n = _quotient_data(doc.map_target, "map_problem.target")
        qmap = _quotient_map(problem, src_red, tgt_red)
    except DiracError as exc:
        return _fail(str(exc))
    quotient = DiracMapProblem(qmap, graph_of_bivector(pi_m), graph_of_bivector(pi_n), problem.samples, problem.seed)
    rep = check_dirac_map(quotient, "backward")
    if not rep:
        return _fail(f"quotient map is not b-Dirac: {rep.witness}")
    return _ok(quotient_map=[str(c) for c in qmap.components], source_poisson=_tensor_json(pi_m), target_poisson=_tensor_json(pi_n))


def check_fdirac_quotient(doc: Document, opts: Options) -> CheckResult:
    """An f-Dirac map induces a Poisson map between the quotients."""
    problem = _problem(doc, opts)
    rep = check_dirac_map(problem, "forward")
    if not rep:
        return _fail(f"not f-Dirac: {rep.witness}")
    try:
        _, src_red, pi_m = _quotient_data(doc.map_source, "map_problem.source")
        _, tgt_red, pi_n = _quotient_data(doc.map_target, "map_problem.target")
        qmap = _quotient_map(problem, src_red, tgt_red)
    except DiracError as exc:
        return _fail(str(exc))
    Q = qmap.target
    for a in range(Q.dim):
        for b in range(a + 1, Q.dim):
            left = poisson_bracket(pi_m, qmap.components[a], qmap.components[b])
            right = qmap.compose(poisson_bracket(pi_n, Q.coord(a), Q.coord(b)))
            if left != right:
                return _fail(f"{{{Q.vars[a]}, {Q.vars[b]}}}: {left} upstairs vs {right} downstairs")
    return _ok(quotient_map=[str(c) for c in qmap.components], source_poisson=_tensor_json(pi_m), target_poisson=_tensor_json(pi_n))


def check_mod_phi_rescaled(doc: Document, opts: Options) -> CheckResult:
    """Constant unit rescalings of the compatible choices leave mod phi exact."""
    problem = _problem(doc, opts)
    M, N = problem.map.source, problem.map.target
    tgt_base = doc.map_target.trivialization
    src_base = _submersion_choice(problem, tgt_base) or doc.map_source.trivialization
    src = TrivializationChoice(src_base.frame(M) * 2, src_base.volume(M)[tuple(range(M.dim))] * 3)
    tgt = TrivializationChoice(tgt_base.frame(N) * 5, tgt_base.volume(N)[tuple(range(N.dim))] * 7)
    xi, verdict, _ = dirac_map_modular_cocycle(problem, src, tgt, opts.degree_bound)
    if verdict.kind != "exact" or not verdict.potential.is_constant():
        return _fail(f"rescaled mod phi {_cochain_json(xi)} is {verdict.kind}")
    return _ok(cocycle=_cochain_json(xi), potential=str(verdict.potential))

CHECKS: dict[str, Callable[[Document, Options], CheckResult]] = {
    "roundtrip": check_roundtrip,
    "poisson": check_poisson,
    "modular_vector_field": check_modular_vector_field,
    "modular_twice": check_modular_twice,
    "algebroid_axioms": check_algebroid_axioms,
    "modular_cocycle": check_modular_cocycle,
    "exactness": check_exactness,
    "dirac": check_dirac_structure,
    "dirac_modular_cocycle": check_dirac_modular_cocycle,
    "characteristic_pair": check_characteristic_pair,
    "reduction": check_reduction,
    "admissible_bracket": check_admissible_bracket,
    "bialgebroid_flatten": check_bialgebroid_flatten,
    "dirac_forward": _map_direction("forward"),
    "dirac_backward": _map_direction("backward"),
    "admissible": check_admissible_map,
    "relation_algebroid": check_relation_algebroid,
    "mod_phi": check_mod_phi,
    "mod_phi_zero": check_mod_phi_zero,
    "backward_image_graph": check_backward_image_graph,
    "pullback_algebroid": check_pullback_algebroid,
    "comorphism_match": check_comorphism_match,
    "immersion_comorphism": check_immersion_comorphism,
    "pullback_cocycle": check_pullback_cocycle,
    "lemma": check_lemma,
    "char_mod_zero": check_char_mod_zero,
    "mod_pullback": check_mod_pullback,
    "bdirac_quotient": check_bdirac_quotient,
    "fdirac_quotient": check_fdirac_quotient,
    "mod_phi_rescaled": check_mod_phi_rescaled,
}


def run_check(name: str, doc: Document, opts: Options) -> CheckResult:
    fn = CHECKS.get(name)
    if fn is None:
        raise InputError(f"unknown check {name!r}; known: {', '.join(sorted(CHECKS))}")
    return fn(doc, opts)
