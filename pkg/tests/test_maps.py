from fractions import Fraction

import pytest

from dirackit.algebroid import check_morphism, compare_algebroids
from dirackit.calculus import PolyMap, TensorField, bivector, two_form
from dirackit.courant import section
from dirackit.dirac import DiracError, DiracSpec, fiber_at, graph_of_bivector, graph_of_twoform
from dirackit.exact import Chart, RatMatrix, parse_expr, same_span
from dirackit.harness.document import load_document
from dirackit.harness.runner import corpus_paths
from dirackit.maps import (
    DiracMapProblem,
    backward_image,
    backward_image_point,
    check_admissible,
    check_dirac_map,
    dirac_map_modular_cocycle,
    forward_image_point,
    immersion_comorphism,
    is_immersion_at,
    is_submersion_at,
    pullback_identification,
    relation_algebroid,
)

from conftest import XY

X1 = Chart(["x"])
T1 = Chart(["t"])
M3 = Chart(["x", "y", "t"])
R4 = Chart(["x1", "x2", "x3", "x4"])
F = Fraction


def e(text, chart=XY):
    return parse_expr(text, chart)


SYMP = bivector(XY, [[0, 1], [-1, 0]])
XPI = bivector(XY, [[0, e("x")], [e("-x"), 0]])
OMEGA = two_form(XY, [[0, 1], [-1, 0]])
ZERO_T = graph_of_bivector(TensorField.zero(T1, "multivector", 2))


def reducible():
    gens = [
        section(M3, [0, e("x", M3), 0], [1, 0, 0]),
        section(M3, [e("-x", M3), 0, 0], [0, 1, 0]),
        section(M3, [0, 0, 1]),
    ]
    return DiracSpec(M3, gens)


def reducible_problem():
    return DiracMapProblem(PolyMap(M3, XY, [M3.coord(0), M3.coord(1)]), reducible(), graph_of_bivector(XPI), samples=20)


def first_coordinate():
    return DiracMapProblem(PolyMap(XY, T1, [XY.coord(0)]), graph_of_bivector(SYMP), ZERO_T, samples=20)


def identity_problem(spec):
    return DiracMapProblem(PolyMap.identity(spec.chart), spec, spec, samples=20)


def corpus_problems():
    out = []
    for path in corpus_paths():
        doc = load_document(path)
        if "map_problem" in doc.raw:
            out.append((doc.id, doc.map_problem(samples=20)))
    return out


PROBLEMS = corpus_problems()


# -- pointwise images --------------------------------------------------------------

def test_backward_image_of_symplectic_under_inclusion():
    inc = PolyMap(X1, XY, [X1.coord(0), X1.zero()])
    rows = backward_image_point(graph_of_twoform(OMEGA), inc, (F(1, 3),))
    assert same_span(rows, [[1, 0]])
    # symbolically: the graph of the pulled-back form, which vanishes
    assert same_span(backward_image(graph_of_twoform(OMEGA), inc), [(X1.one(), X1.zero())])


@pytest.mark.parametrize("point", [(F(1), F(2)), (F(-3, 2), F(1, 4))])
def test_images_under_identity_are_fibers(point):
    K = graph_of_bivector(XPI)
    idm = PolyMap.identity(XY)
    assert same_span(backward_image_point(K, idm, point), fiber_at(K, point))
    assert same_span(forward_image_point(K, idm, point), fiber_at(K, point))


def test_backward_image_under_projection_is_reducible_fiber():
    p = (F(2), F(-1), F(5, 3))
    rows = backward_image_point(graph_of_bivector(XPI), PolyMap(M3, XY, [M3.coord(0), M3.coord(1)]), p)
    assert same_span(rows, fiber_at(reducible(), p))


def test_forward_image_of_symplectic_under_first_coordinate():
    rows = forward_image_point(graph_of_bivector(SYMP), PolyMap(XY, T1, [XY.coord(0)]), (F(1), F(1)))
    assert same_span(rows, [[0, 1]])


def test_forward_image_of_reducible_is_quotient_fiber():
    p = (F(3), F(1, 2), F(-4))
    rows = forward_image_point(reducible(), PolyMap(M3, XY, [M3.coord(0), M3.coord(1)]), p)
    assert same_span(rows, fiber_at(graph_of_bivector(XPI), p[:2]))


# -- b- and f-Dirac maps ----------------------------------------------------------

def test_reducible_projection_is_b_and_f_dirac():
    pr = reducible_problem()
    assert check_dirac_map(pr, "backward")
    rep = check_dirac_map(pr, "forward")
    assert rep and rep.level == "symbolic+samples" and rep.samples == 20


def test_first_coordinate_forward_not_backward():
    pr = first_coordinate()
    assert check_dirac_map(pr, "forward")
    rep = check_dirac_map(pr, "backward")
    assert not rep and rep.witness.startswith("backward image differs from the fiber at (")


def test_direction_validated():
    with pytest.raises(ValueError):
        check_dirac_map(first_coordinate(), "sideways")


@pytest.mark.parametrize("name,problem", PROBLEMS, ids=[p[0] for p in PROBLEMS])
def test_duality_propositions(name, problem):
    pts = problem.points()
    back = check_dirac_map(problem, "backward", pts)
    fwd = check_dirac_map(problem, "forward", pts)
    if back and all(is_submersion_at(problem.map, p) for p in pts):
        assert fwd
    if fwd and all(is_immersion_at(problem.map, p) for p in pts):
        assert back


# -- admissibility and R ---------------------------------------------------------------

def test_admissibility_examples():
    assert check_admissible(first_coordinate())
    rep = check_admissible(identity_problem(graph_of_bivector(XPI)))
    assert rep and rep.generic_rank == 2
    presym = load_document(next(p for p in corpus_paths() if p.stem == "presymplectic-inclusion")).map_problem(samples=20)
    assert check_admissible(presym)


def test_relation_algebroid_first_coordinate():
    rel = relation_algebroid(first_coordinate())
    assert rel.algebroid.rank == 1
    assert check_morphism(rel.morphism_i) and check_morphism(rel.morphism_j)
    assert not rel.algebroid.structure


def test_relation_algebroid_identity():
    spec = graph_of_bivector(XPI)
    rel = relation_algebroid(identity_problem(spec))
    assert rel.algebroid.rank == 2
    assert check_morphism(rel.morphism_i)


def test_relation_algebroid_poisson_dirac_inclusion():
    pi_m = bivector(R4, [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
    S = Chart(["u", "v"])
    inc = PolyMap(S, R4, [S.coord(0), S.coord(1), S.zero(), S.zero()])
    pr = DiracMapProblem(inc, graph_of_bivector(bivector(S, [[0, 1], [-1, 0]])), graph_of_bivector(pi_m), samples=10)
    rel = relation_algebroid(pr)
    assert rel.algebroid.rank == 2
    # the second components are covectors along S spanned by dx1, dx2
    for _, alpha in rel.pairs:
        assert not alpha[2] and not alpha[3]


def test_relation_algebroid_requires_admissible():
    # graph(x d/dx ^ d/dy) meets T*M only where x = 0
    pr = DiracMapProblem(PolyMap.identity(XY), graph_of_bivector(XPI), graph_of_bivector(TensorField.zero(XY, "multivector", 2)), samples=10)
    rep = check_admissible(pr, points=[(F(0), F(1)), (F(1), F(1))])
    assert not rep
    with pytest.raises(DiracError):
        relation_algebroid(pr, points=[(F(0), F(1)), (F(1), F(1))])


# -- modular cocycle of a Dirac map ------------------------------------------------------

def test_mod_phi_examples():
    xi, verdict, _ = dirac_map_modular_cocycle(first_coordinate())
    assert not xi and verdict.kind == "exact"
    xi, _, _ = dirac_map_modular_cocycle(identity_problem(graph_of_bivector(XPI)))
    assert not xi
    xi, verdict, _ = dirac_map_modular_cocycle(reducible_problem())
    assert not xi


def test_pullback_identification_reducible():
    pr = reducible_problem()
    A_L, P, Psi = pullback_identification(pr.source, pr.target, pr.map)
    assert check_morphism(Psi)
    assert Psi.fiber == RatMatrix.identity(M3, 3)
    assert compare_algebroids(A_L, P) is None


def test_immersion_comorphism_rejects_non_tangent():
    inc = PolyMap(X1, XY, [X1.coord(0), X1.zero()])
    pr = DiracMapProblem(inc, graph_of_twoform(TensorField.zero(X1, "form", 2)), graph_of_bivector(SYMP), samples=5)
    with pytest.raises(DiracError):
        immersion_comorphism(pr)


def test_immersion_comorphism_corpus():
    pr = load_document(next(p for p in corpus_paths() if p.stem == "fdirac-immersion")).map_problem(samples=10)
    H = immersion_comorphism(pr)
    assert H.shape == (pr.target.dim, pr.source.dim)
