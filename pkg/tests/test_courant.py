import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirackit.calculus import FORM, TensorField, bivector, koszul_bracket, lie_bracket, one_form, vector_field
from dirackit.courant import (
    GenSection,
    NotPoissonError,
    anchor,
    bialgebroid_bracket,
    courant_bracket,
    is_poisson,
    pairing,
    section,
)
from dirackit.exact import parse_expr

from conftest import XY, XYZ, one_forms, polys, vector_fields


def e(text):
    return parse_expr(text, XY)


def sections(max_deg=2):
    return st.builds(GenSection, vector_fields(XY, max_deg), one_forms(XY, max_deg))


SYMP = bivector(XY, [[0, 1], [-1, 0]])
XPI = bivector(XY, [[0, e("x")], [e("-x"), 0]])


def oracle_koszul(pi, alpha, beta):
    """[f dx_i, g dx_j] = fg d pi^ij + f pi#(dx_i)(g) dx_j - g pi#(dx_j)(f) dx_i, summed."""
    n = XY.dim
    P = [[pi.comps.get((i, j), XY.zero()) if i < j else -pi.comps.get((j, i), XY.zero()) if i > j else XY.zero() for j in range(n)] for i in range(n)]
    a, b = alpha.components(), beta.components()
    out = [XY.zero()] * n
    for i in range(n):
        for j in range(n):
            f, g = a[i], b[j]
            for k in range(n):
                out[k] = out[k] + f * g * P[i][j].diff(k)
            out[j] = out[j] + f * sum((P[i][k] * g.diff(k) for k in range(n)), XY.zero())
            out[i] = out[i] - g * sum((P[j][k] * f.diff(k) for k in range(n)), XY.zero())
    return one_form(XY, out)


# -- pairing ------------------------------------------------------------------

def test_pairing_examples():
    assert pairing(section(XY, [1, 0], [0, 1]), section(XY, [0, 1], [1, 0])) == XY.one()
    assert pairing(section(XY, [1, 0], [1, 0]), section(XY, [0, 1], [0, 1])) == XY.zero()
    assert pairing(section(XY, [1, 0], [0, 1]), section(XY, [0, e("x")], [e("-x"), 0])) == XY.zero()


@given(sections(), sections(), sections(), polys(XY))
def test_pairing_symmetric_bilinear(s, t, u, f):
    assert pairing(s, t) == pairing(t, s)
    assert pairing(s, t * f + u) == pairing(s, t) * f + pairing(s, u)


# -- Courant bracket ----------------------------------------------------------

def test_courant_examples():
    assert not courant_bracket(section(XY, [1, 0]), section(XY, [0, 1]))
    assert courant_bracket(section(XY, [1, 0]), section(XY, None, [0, e("x")])) == section(XY, None, [0, 1])
    assert not courant_bracket(section(XY, [1, 0], [0, 1]), section(XY, [0, 1], [1, 0]))


@given(sections(), sections(), polys(XY))
def test_courant_leibniz(s, t, f):
    # derived by expanding the bracket: the correction is -<s,t> df with the halved pairing
    df = one_form(XY, [f.diff(0), f.diff(1)])
    X = s.vec
    Xf = sum((X.components()[i] * f.diff(i) for i in range(2)), XY.zero())
    lhs = courant_bracket(s, t * f)
    rhs = courant_bracket(s, t) * f + t * Xf - GenSection(vector_field(XY, [0, 0]), df * pairing(s, t))
    assert lhs == rhs


@given(sections(), sections())
def test_courant_skew(s, t):
    assert courant_bracket(s, t) == -courant_bracket(t, s)


@given(sections(), sections())
def test_courant_anchor_is_bracket_morphism(s, t):
    assert anchor(courant_bracket(s, t)) == lie_bracket(anchor(s), anchor(t))


# -- bialgebroid bracket ------------------------------------------------------

def test_bialgebroid_examples():
    dx, dy = section(XY, None, [1, 0]), section(XY, None, [0, 1])
    assert not bialgebroid_bracket(dx, dy, SYMP)
    got = bialgebroid_bracket(dx, section(XY, None, [0, e("x")]), SYMP)
    want = oracle_koszul(SYMP, dx.form, one_form(XY, [0, e("x")]))
    assert not got.vec and got.form == want


def test_bialgebroid_rejects_non_poisson():
    pi = bivector(XYZ, [[0, 1, 0], [-1, 0, parse_expr("y", XYZ)], [0, parse_expr("-y", XYZ), 0]])
    assert not is_poisson(pi)
    with pytest.raises(NotPoissonError):
        bialgebroid_bracket(section(XYZ, [1, 0, 0]), section(XYZ, [0, 1, 0]), pi)


@given(sections(), sections())
def test_bialgebroid_zero_pi_is_courant(s, t):
    zero = TensorField.zero(XY, "multivector", 2)
    assert bialgebroid_bracket(s, t, zero) == courant_bracket(s, t)


@given(one_forms(XY), one_forms(XY))
def test_koszul_matches_coordinate_oracle(a, b):
    assert koszul_bracket(XPI, a, b) == oracle_koszul(XPI, a, b)


@given(sections(1), sections(1))
def test_bialgebroid_anchor_is_bracket_morphism(s, t):
    assert anchor(bialgebroid_bracket(s, t, XPI), XPI) == lie_bracket(anchor(s, XPI), anchor(t, XPI))


def test_anchor_examples():
    assert anchor(section(XY, [1, 0], [0, 1])) == vector_field(XY, [1, 0])
    assert anchor(section(XY, None, [1, 0]), SYMP) == vector_field(XY, [0, 1])
    assert anchor(section(XY, [1, 0], [1, 0]), TensorField.zero(XY, "multivector", 2)) == vector_field(XY, [1, 0])


def test_section_validation():
    with pytest.raises(ValueError):
        GenSection(vector_field(XY, [1, 0]), TensorField.zero(XY, FORM, 2))
