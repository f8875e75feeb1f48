from fractions import Fraction

import pytest
from hypothesis import given

from dirackit.calculus import (
    FORM,
    MULTIVECTOR,
    PolyMap,
    TensorField,
    apply_vector,
    bivector,
    divergence,
    exterior_derivative,
    interior_product,
    lie_bracket,
    lie_derivative,
    one_form,
    pullback_form,
    pushforward_vector_at,
    scalar,
    schouten_bracket,
    two_form,
    vector_field,
    volume_form,
    wedge,
)
from dirackit.exact import Chart, parse_expr

from conftest import XY, XYZ, bivectors, one_forms, polys, vector_fields
from oracles import oracle_schouten


def e(text, chart=XY):
    return parse_expr(text, chart)


def dx(i, chart=XY):
    return TensorField(chart, FORM, 1, {(i,): 1})


def d_(i, chart=XY):
    return TensorField(chart, MULTIVECTOR, 1, {(i,): 1})


# -- exterior derivative --------------------------------------------------------

def test_d_examples():
    assert exterior_derivative(one_form(XY, [0, e("x")])) == two_form(XY, [[0, 1], [-1, 0]])
    f = scalar(XY, e("x^2*y"))
    assert exterior_derivative(f) == one_form(XY, [e("2*x*y"), e("x^2")])
    assert not exterior_derivative(exterior_derivative(f))


@given(one_forms(XYZ))
def test_d_squared_zero(a):
    assert not exterior_derivative(exterior_derivative(a))


# -- Lie derivative and contraction ---------------------------------------------

def test_lie_derivative_examples():
    vol = volume_form(XY)
    assert lie_derivative(d_(0), vol * e("x")) == vol
    assert lie_derivative(vector_field(XY, [e("x"), 0]), vol) == vol


def test_interior_examples():
    pi = bivector(XY, [[0, e("x")], [e("-x"), 0]])
    assert interior_product(dx(0), pi) == vector_field(XY, [0, e("x")])
    assert interior_product(dx(1), pi) == vector_field(XY, [e("-x"), 0])
    assert interior_product(d_(0), two_form(XY, [[0, 1], [-1, 0]])) == dx(1)


@given(vector_fields(XYZ), one_forms(XYZ))
def test_cartan_formula_on_one_forms(X, a):
    rhs = interior_product(X, exterior_derivative(a)) + exterior_derivative(interior_product(X, a))
    assert lie_derivative(X, a) == rhs


@given(vector_fields(XYZ), one_forms(XYZ), one_forms(XYZ))
def test_cartan_formula_on_two_forms(X, a, b):
    w = wedge(a, b)
    rhs = interior_product(X, exterior_derivative(w)) + exterior_derivative(interior_product(X, w))
    assert lie_derivative(X, w) == rhs


@given(vector_fields(XY), polys(XY), one_forms(XY))
def test_lie_derivative_leibniz(X, f, T):
    assert lie_derivative(X, T * f) - lie_derivative(X, T) * f - T * apply_vector(X, f) == TensorField.zero(XY, FORM, 1)


# -- Schouten bracket -----------------------------------------------------------

def test_schouten_examples():
    assert not schouten_bracket(d_(0), d_(1))
    pi = bivector(XY, [[0, e("x")], [e("-x"), 0]])
    assert not schouten_bracket(pi, pi)


def test_schouten_non_poisson_value_fixed_by_oracle():
    # z dx^dy + y dx^dz = dx ^ (z dy + y dz) with commuting factors: Poisson
    pi = bivector(XYZ, [[0, e("z", XYZ), e("y", XYZ)], [e("-z", XYZ), 0, 0], [e("-y", XYZ), 0, 0]])
    assert not schouten_bracket(pi, pi)
    # dx^dy + y dy^dz fails Jacobi
    pi = bivector(XYZ, [[0, 1, 0], [-1, 0, e("y", XYZ)], [0, e("-y", XYZ), 0]])
    got = schouten_bracket(pi, pi)
    assert got == oracle_schouten(pi, pi, XYZ)
    assert got.comps == {(0, 1, 2): got.comps[(0, 1, 2)]} and got.comps[(0, 1, 2)].is_constant()


@given(bivectors(XYZ), bivectors(XYZ))
def test_schouten_matches_oracle_on_bivectors(P, Q):
    assert schouten_bracket(P, Q) == oracle_schouten(P, Q, XYZ)


@given(vector_fields(XYZ), bivectors(XYZ))
def test_schouten_matches_oracle_mixed(X, P):
    assert schouten_bracket(X, P) == oracle_schouten(X, P, XYZ)
    assert schouten_bracket(X, P) == lie_derivative(X, P)


@given(vector_fields(XYZ), vector_fields(XYZ))
def test_schouten_of_vectors_is_lie_bracket(X, Y):
    assert schouten_bracket(X, Y) == lie_bracket(X, Y)
    assert schouten_bracket(X, Y) == -schouten_bracket(Y, X)


@given(bivectors(XYZ), vector_fields(XYZ))
def test_schouten_graded_skew(P, X):
    # [P, Q] = -(-1)^((p-1)(q-1)) [Q, P]
    assert schouten_bracket(P, X) == -schouten_bracket(X, P)
    assert schouten_bracket(P, P) == schouten_bracket(P, P)


@given(vector_fields(XYZ, 1), vector_fields(XYZ, 1), bivectors(XYZ))
def test_schouten_graded_jacobi(X, Y, P):
    # degrees 1, 1, 2: [X,[Y,P]] = [[X,Y],P] + [Y,[X,P]]
    lhs = schouten_bracket(X, schouten_bracket(Y, P))
    rhs = schouten_bracket(schouten_bracket(X, Y), P) + schouten_bracket(Y, schouten_bracket(X, P))
    assert lhs == rhs


# -- divergence -----------------------------------------------------------------

def test_divergence_examples():
    vol = volume_form(XY)
    assert divergence(vector_field(XY, [e("x"), 0]), vol) == XY.one()
    assert divergence(d_(0), vol) == XY.zero()
    assert divergence(vector_field(XY, [0, e("x")]), vol) == XY.zero()


@given(vector_fields(XY), polys(XY))
def test_divergence_leibniz(X, f):
    vol = volume_form(XY, e("1 + x^2"))
    assert divergence(X * f, vol) == divergence(X, vol) * f + apply_vector(X, f)


@given(vector_fields(XY))
def test_divergence_matches_lie_derivative_oracle(X):
    vol = volume_form(XY)
    assert lie_derivative(X, vol) == vol * divergence(X, vol)


# -- maps -----------------------------------------------------------------------

def test_pullback_examples():
    X1, T = Chart(["x"]), Chart(["t"])
    M2 = Chart(["x", "y"])
    assert pullback_form(PolyMap(M2, T, [M2.coord(0)]), dx(0, T)) == dx(0, M2)
    inc = PolyMap(X1, XY, [X1.coord(0), X1.zero()])
    assert not pullback_form(inc, two_form(XY, [[0, 1], [-1, 0]]))
    U = Chart(["u"])
    sq = PolyMap(M2, U, [e("x^2", M2)])
    assert pullback_form(sq, dx(0, U)) == one_form(M2, [e("2*x", M2), 0])


@given(one_forms(XY, 1))
def test_pullback_commutes_with_d(a):
    M = Chart(["u", "v", "w"])
    phi = PolyMap(M, XY, [e("u*v + w", M), e("u^2 - w", M)])
    assert pullback_form(phi, exterior_derivative(a)) == exterior_derivative(pullback_form(phi, a))


def test_pushforward_examples():
    T = Chart(["t"])
    assert pushforward_vector_at(PolyMap(XY, T, [e("x")]), d_(1), (1, 2)) == (0,)
    assert pushforward_vector_at(PolyMap(XY, T, [e("x + y")]), d_(0), (Fraction(3), Fraction(5))) == (1,)
    assert pushforward_vector_at(PolyMap(XY, T, [e("x*y")]), d_(0), (1, 2)) == (2,)


def test_wrong_kind_rejected():
    with pytest.raises(ValueError):
        interior_product(d_(0), d_(1))
