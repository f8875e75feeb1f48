import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirackit.algebroid import (
    Algebroid,
    AlgebroidError,
    AlgebroidMorphism,
    Cochain,
    ComorphismError,
    LineRepresentation,
    NotSubmersionError,
    TrivializationChoice,
    characteristic_cocycle,
    check_axioms,
    check_morphism,
    comorphism_pullback,
    compatible_choice,
    cotangent_algebroid,
    da_differential,
    exactness_test,
    identity_morphism,
    modular_cocycle,
    morphism_modular_cocycle,
    pullback_algebroid,
    tangent_algebroid,
)
from dirackit.calculus import MULTIVECTOR, PolyMap, TensorField, bivector, modular_vector_field, pair, vector_field
from dirackit.exact import Chart, RatMatrix, parse_expr

from conftest import XY, XYZ, bivectors, polys

X1 = Chart(["x"])
T1 = Chart(["t"])
M3 = Chart(["x", "y", "t"])


def e(text, chart=XY):
    return parse_expr(text, chart)


SYMP = bivector(XY, [[0, 1], [-1, 0]])
XPI = bivector(XY, [[0, e("x")], [e("-x"), 0]])


def d_fn(A, f):
    return da_differential(A, Cochain.function(A.chart, A.rank, f))


def unit(f):
    """A nowhere vanishing function built from an arbitrary polynomial."""
    return f * f + 1


# -- axioms -------------------------------------------------------------------

def test_axioms_tangent_and_cotangent():
    assert check_axioms(tangent_algebroid(XYZ))
    A = cotangent_algebroid(XPI)
    assert check_axioms(A)
    # [dx, dy]_pi = d(x) = dx
    assert A.bracket(0, 1) == (XY.one(), XY.zero())
    assert A.anchors[0] == vector_field(XY, [0, e("x")])
    assert A.anchors[1] == vector_field(XY, [e("-x"), 0])


def test_axioms_perturbed_structure_function_fails():
    A = cotangent_algebroid(XPI)
    bad = Algebroid(XY, A.anchors, {(0, 1): (XY.const(2), XY.zero())})
    rep = check_axioms(bad)
    assert not rep
    # rank 2 has no frame triples, so the first failing identity is anchor compatibility
    assert rep.witness.startswith("anchor: rho([e_1, e_2])")


def test_axioms_jacobi_witness_rank_three():
    # constant anchors zero, structure of a non-Lie bracket on R^3
    zero = TensorField.zero(X1, MULTIVECTOR, 1)
    bad = Algebroid(X1, [zero] * 3, {(0, 1): (0, 0, 1), (1, 2): (1, 0, 0), (0, 2): (0, 0, 1)})
    rep = check_axioms(bad)
    assert not rep and rep.witness.startswith("Jacobi for (e_1, e_2, e_3)")


def test_structure_is_antisymmetrized_on_access():
    A = Algebroid(XY, cotangent_algebroid(XPI).anchors, {(1, 0): (-1, 0)})
    assert A.bracket(0, 1) == (XY.one(), XY.zero())
    assert A.c(0, 1, 0) == -XY.one()


# -- differential -------------------------------------------------------------

def test_da_of_function_on_tangent_is_df():
    f = e("x^2*y + y")
    assert d_fn(tangent_algebroid(XY), f).values() == (e("2*x*y"), e("x^2 + 1"))


@given(polys(XYZ))
def test_da_squared_zero_on_functions(f):
    A = cotangent_algebroid(bivector(XYZ, [[0, e("z", XYZ), 0], [e("-z", XYZ), 0, 0], [0, 0, 0]]))
    assert not da_differential(A, d_fn(A, f))


@given(polys(XY), polys(XY))
def test_da_squared_zero_on_one_cochains(f, g):
    A = cotangent_algebroid(XPI)
    assert not da_differential(A, da_differential(A, Cochain.from_values(XY, [f, g])))


def test_da_degree_cap():
    A = tangent_algebroid(XYZ)
    with pytest.raises(ValueError):
        da_differential(A, Cochain(XYZ, 3, 3, {(0, 1, 2): 1}))


# -- modular cocycles ---------------------------------------------------------

def test_modular_cocycle_examples():
    assert not modular_cocycle(tangent_algebroid(XY))
    alpha = modular_cocycle(cotangent_algebroid(XPI))
    assert alpha.values() == (XY.zero(), XY.const(-2))
    assert modular_cocycle(cotangent_algebroid(XPI), TrivializationChoice(XY.one())) == alpha


def test_modular_cocycle_rejects_broken_algebroid():
    bad = Algebroid(XY, cotangent_algebroid(XPI).anchors, {(0, 1): (2, 0)})
    with pytest.raises(AlgebroidError):
        modular_cocycle(bad)


@given(bivectors(XY, 2))
def test_cotangent_cocycle_is_twice_modular_vector_field(pi):
    # oracle: divergence of the Hamiltonian fields of the coordinates
    A = cotangent_algebroid(pi)
    alpha = modular_cocycle(A)
    X = modular_vector_field(pi)
    for i in range(2):
        dxi = TensorField(XY, "form", 1, {(i,): 1})
        assert alpha[i] == pair(dxi, X) * 2
    assert not da_differential(A, alpha)


@given(polys(XY, 1), polys(XY, 1))
def test_rescaling_shifts_by_log_derivative(f, h):
    A = cotangent_algebroid(XPI)
    g, k = unit(f), unit(h)
    base = modular_cocycle(A)
    shifted = modular_cocycle(A, TrivializationChoice(frame_scale=g, base_volume=k))
    shift = d_fn(A, g).scale(g.inverse()) + d_fn(A, k).scale(k.inverse())
    assert shifted == base + shift


@given(polys(XY, 2))
def test_tangent_cocycle_is_dlog_of_volume(f):
    g = unit(f)
    alpha = modular_cocycle(tangent_algebroid(XY), TrivializationChoice(base_volume=g))
    assert alpha.values() == (g.diff(0) / g, g.diff(1) / g)


# -- line representations -----------------------------------------------------

def test_line_representation_classes():
    A = cotangent_algebroid(XPI)
    theta = modular_cocycle(A)
    L = LineRepresentation(A, theta)
    triv = LineRepresentation(A, Cochain.from_values(XY, [0, 0]))
    assert not characteristic_cocycle(triv)
    assert characteristic_cocycle(L.dual()) == -theta
    other = LineRepresentation(A, d_fn(A, e("x*y")))
    assert characteristic_cocycle(L.tensor(other)) == theta + characteristic_cocycle(other)


def test_line_representation_must_be_flat():
    A = tangent_algebroid(XY)
    with pytest.raises(ValueError):
        LineRepresentation(A, Cochain.from_values(XY, [e("y"), 0]))


# -- pullback algebroids and morphisms ----------------------------------------

def projection(source=M3):
    return PolyMap(source, XY, [source.coord(0), source.coord(1)])


def test_pullback_along_projection():
    P, Phi = pullback_algebroid(cotangent_algebroid(SYMP), projection())
    assert P.rank == 3
    assert [a.components() for a in P.anchors] == [
        vector_field(M3, [0, 1, 0]).components(),
        vector_field(M3, [-1, 0, 0]).components(),
        vector_field(M3, [0, 0, 1]).components(),
    ]
    assert not P.structure
    assert check_axioms(P) and check_morphism(Phi)


def test_pullback_along_identity_is_same_data():
    A = cotangent_algebroid(XPI)
    P, _ = pullback_algebroid(A, PolyMap.identity(XY))
    assert P.anchors == A.anchors and P.structure == A.structure


def test_pullback_of_tangent_is_tangent():
    P, _ = pullback_algebroid(tangent_algebroid(XY), projection())
    rows = RatMatrix(M3, [a.components() for a in P.anchors])
    assert rows == RatMatrix.identity(M3, 3)
    assert not P.structure


def test_pullback_rejects_non_submersion():
    with pytest.raises(NotSubmersionError):
        pullback_algebroid(tangent_algebroid(XY), PolyMap(T1, XY, [T1.coord(0), T1.zero()]))


def test_morphism_cocycle_identity_is_zero():
    A = cotangent_algebroid(XPI)
    assert not morphism_modular_cocycle(identity_morphism(A))
    ch = TrivializationChoice(XY.const(3), e("1 + y^2"))
    assert not morphism_modular_cocycle(identity_morphism(A), ch, ch)


@pytest.mark.parametrize("comps", [["x", "y"], ["x + t^2", "y"], ["x", "y + x*t"]])
def test_pullback_morphism_cocycle_zero_for_compatible_choice(comps):
    phi = PolyMap(M3, XY, [e(c, M3) for c in comps])
    A = cotangent_algebroid(XPI)
    P, Phi = pullback_algebroid(A, phi)
    assert check_axioms(P)
    assert not morphism_modular_cocycle(Phi, compatible_choice(P, phi), None)
    target = TrivializationChoice(XY.one(), XY.one())
    assert not morphism_modular_cocycle(Phi, compatible_choice(P, phi, target), target)


def test_broken_morphism_reported():
    A = cotangent_algebroid(XPI)
    Phi = AlgebroidMorphism(A, A, PolyMap.identity(XY), RatMatrix(XY, [[0, 1], [1, 0]]))
    rep = check_morphism(Phi)
    assert not rep and "s_1" in rep.witness


# -- comorphisms --------------------------------------------------------------

def test_comorphism_of_poisson_map():
    A = cotangent_algebroid(SYMP)
    B = cotangent_algebroid(TensorField.zero(T1, MULTIVECTOR, 2))
    phi = PolyMap(XY, T1, [XY.coord(0)])
    C, cocycle = comorphism_pullback(A, B, phi, RatMatrix(XY, [[1, 0]]))
    assert C.rank == 1 and C.anchors[0] == vector_field(XY, [0, 1])
    assert not C.structure and not cocycle
    _, again = comorphism_pullback(A, B, phi, RatMatrix(XY, [[1, 0]]), TrivializationChoice(XY.one(), XY.one()))
    assert again == cocycle


def test_comorphism_identity_zero():
    A = cotangent_algebroid(XPI)
    _, cocycle = comorphism_pullback(A, A, PolyMap.identity(XY), RatMatrix.identity(XY, 2))
    assert not cocycle


def test_comorphism_violation_witness():
    A = cotangent_algebroid(SYMP)
    B = cotangent_algebroid(TensorField.zero(T1, MULTIVECTOR, 2))
    with pytest.raises(ComorphismError) as info:
        comorphism_pullback(A, B, PolyMap(XY, T1, [XY.coord(0)]), RatMatrix(XY, [[0, 1]]))
    assert "a_B(e_1)" in str(info.value)


# -- exactness ----------------------------------------------------------------

def check_certificate(A, xi, verdict):
    if verdict.kind == "exact":
        assert d_fn(A, verdict.potential) == xi
    elif verdict.kind == "log_exact":
        g = verdict.potential
        assert d_fn(A, g).scale(g.inverse()) == xi


def test_exactness_documented_instances():
    A = tangent_algebroid(X1)
    zero = Cochain.from_values(X1, [0])
    v = exactness_test(A, zero)
    assert v.kind == "exact" and not d_fn(A, v.potential)
    xi = d_fn(A, parse_expr("x^2", X1))
    v = exactness_test(A, xi, 2)
    assert v.kind == "exact" and v.potential == parse_expr("x^2", X1)
    x = parse_expr("x", X1)
    xi = d_fn(A, x).scale(x.inverse())
    v = exactness_test(A, xi, 1)
    assert v.kind == "log_exact" and v.potential == x
    check_certificate(A, xi, v)


def test_exactness_of_cotangent_cocycle_is_log():
    A = cotangent_algebroid(XPI)
    alpha = modular_cocycle(A)
    v = exactness_test(A, alpha)
    assert v.kind == "log_exact"
    check_certificate(A, alpha, v)


def test_exactness_bound_gives_inconclusive():
    A = tangent_algebroid(X1)
    assert exactness_test(A, d_fn(A, parse_expr("x^3", X1)), 2).kind == "inconclusive"


def test_exactness_rejects_non_closed():
    with pytest.raises(ValueError):
        exactness_test(tangent_algebroid(XY), Cochain.from_values(XY, [e("y"), 0]))


@given(polys(XY, 2))
def test_exactness_finds_polynomial_primitives(f):
    A = tangent_algebroid(XY)
    xi = d_fn(A, f)
    # the bound is on total degree; each variable has exponent <= 2 here
    v = exactness_test(A, xi, 4)
    assert v.kind == "exact"
    check_certificate(A, xi, v)


@given(st.integers(-2, 2), st.integers(-2, 2), polys(XY, 1))
def test_exactness_certificates_substitute_back(a, b, f):
    A = tangent_algebroid(XY)
    g = e("x + 1") ** a * e("y - 2") ** b
    xi = d_fn(A, g).scale(g.inverse()) + d_fn(A, f)
    v = exactness_test(A, xi, 2)
    check_certificate(A, xi, v)
    if not f:
        assert v.kind in ("exact", "log_exact")
