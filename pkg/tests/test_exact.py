from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from dirackit.exact import (
    Chart,
    ExprSyntaxError,
    InconsistentSystem,
    PoleError,
    RatFun,
    RatMatrix,
    UnknownVariable,
    eval_point,
    generic_rank,
    kernel,
    parse_expr,
    print_expr,
    rank,
    ratfun_arith,
    solve_linear,
)
from dirackit.exact.linalg import evaluate_matrix

from conftest import XY, nonzero_polys, polys, ratfuns

X, Y = sympy.symbols("x y")


def as_sympy(f: RatFun):
    return sympy.sympify(print_expr(f).replace("^", "**"), locals={"x": X, "y": Y})


def p(text, chart=XY):
    return parse_expr(text, chart)


# -- parsing ------------------------------------------------------------------

def test_parse_polynomial_terms():
    f = p("x^2 - 2*x*y")
    assert f.is_polynomial()
    assert f.num.terms == {(2, 0): 1, (1, 1): -2}


def test_parse_zero():
    assert not p("0")
    assert p("0") == XY.zero()


def test_parse_quotient_is_already_reduced():
    f = p("(x+y)/(x-y)")
    assert f.num.terms == {(1, 0): 1, (0, 1): 1}
    assert f.den.terms == {(1, 0): 1, (0, 1): -1}
    # gcd oracle: sympy agrees that numerator and denominator are coprime
    assert sympy.gcd(X + Y, X - Y) == 1


def test_parse_cancels_common_factors():
    assert p("(x^2 - y^2)/(x + y)") == p("x - y")


@pytest.mark.parametrize("text", ["x +", "(x", "x ** y", "2x", "x^-1", "x^y", ""])
def test_parse_rejects_malformed(text):
    with pytest.raises(ExprSyntaxError):
        p(text)


def test_parse_rejects_unknown_variable():
    with pytest.raises((UnknownVariable, ExprSyntaxError)):
        p("z + 1")


def test_parse_unary_minus_and_powers():
    assert p("-x^2") == -(p("x") * p("x"))
    assert p("(-x)^2") == p("x") * p("x")
    assert p("2^3") == XY.const(8)


def test_print_is_canonical():
    assert print_expr(p("y + x")) == print_expr(p("x + y"))
    assert print_expr(p("(2*x)/(4*y)")) == print_expr(p("x/(2*y)"))


@given(ratfuns(XY))
def test_roundtrip(f):
    assert parse_expr(print_expr(f), XY) == f
    assert print_expr(parse_expr(print_expr(f), XY)) == print_expr(f)


# -- arithmetic ---------------------------------------------------------------

def test_arith_examples():
    x = p("x")
    assert ratfun_arith(x, -x, "add") == XY.zero()
    assert ratfun_arith(p("1/x"), x, "mul") == XY.one()
    assert ratfun_arith(p("x^2 - y^2"), p("x + y"), "div") == p("x - y")
    with pytest.raises(ValueError):
        ratfun_arith(x, x, "pow")


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        p("x") / XY.zero()


@given(ratfuns(XY), ratfuns(XY), ratfuns(XY))
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    assert a - a == XY.zero()
    if a:
        assert a * a.inverse() == XY.one()


@given(ratfuns(XY), ratfuns(XY))
def test_arith_matches_sympy(a, b):
    assert sympy.simplify(as_sympy(a * b - a) - (as_sympy(a) * as_sympy(b) - as_sympy(a))) == 0
    if b:
        assert sympy.cancel(as_sympy(a / b) - as_sympy(a) / as_sympy(b)) == 0


@given(ratfuns(XY))
def test_derivative_matches_sympy(f):
    assert sympy.cancel(as_sympy(f.diff(0)) - sympy.diff(as_sympy(f), X)) == 0


@given(ratfuns(XY), ratfuns(XY))
def test_equal_functions_hash_equal(a, b):
    s = a + b
    t = b + a
    assert s == t and hash(s) == hash(t)


# -- evaluation ---------------------------------------------------------------

def test_eval_examples():
    X1 = Chart(["x"])
    f = parse_expr("x/(x-1)", X1)
    assert eval_point(f, (2,)) == 2
    with pytest.raises(PoleError):
        eval_point(f, (1,))
    assert eval_point(p("x^2 + y"), (Fraction(1, 2), Fraction(1, 3))) == Fraction(7, 12)


small = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5))


@given(ratfuns(XY), small, small)
def test_eval_matches_sympy(f, a, b):
    try:
        v = f.eval((a, b))
    except PoleError:
        return
    assert sympy.Rational(v.numerator, v.denominator) == as_sympy(f).subs({X: sympy.Rational(a.numerator, a.denominator), Y: sympy.Rational(b.numerator, b.denominator)})


# -- linear algebra -----------------------------------------------------------

def test_solve_identity():
    sol = solve_linear(RatMatrix.identity(XY, 2), [p("x"), p("y")])
    assert sol.particular == (p("x"), p("y"))
    assert sol.kernel == ()


def test_solve_inconsistent_has_certificate():
    A = [[1, 1], [1, 1]]
    with pytest.raises(InconsistentSystem) as info:
        solve_linear(A, [0, 1])
    y = info.value.certificate
    for c in range(2):
        assert sum(y[i] * A[i][c] for i in range(2)) == 0
    assert y[0] * 0 + y[1] * 1 != 0


def test_kernel_of_row():
    A = [[p("x"), XY.one()]]
    sol = solve_linear(A, [XY.zero()])
    assert len(sol.kernel) == 1
    k = sol.kernel[0]
    assert p("x") * k[0] + k[1] == XY.zero()
    assert k[1] / k[0] == -p("x")


def test_generic_rank_examples():
    assert generic_rank(RatMatrix.identity(XY, 3)) == 3
    assert generic_rank([[p("x"), p("x")], [XY.one(), XY.one()]]) == 1
    assert generic_rank(RatMatrix.zeros(XY, 2, 2)) == 0


@given(st.lists(st.lists(polys(XY, 1), min_size=3, max_size=3), min_size=2, max_size=3), st.lists(polys(XY, 1), min_size=3, max_size=3))
def test_solve_certificates(rows, b3):
    b = b3[: len(rows)]
    try:
        sol = solve_linear(rows, b)
    except InconsistentSystem as exc:
        y = exc.certificate
        for c in range(3):
            assert sum((y[i] * rows[i][c] for i in range(len(rows))), XY.zero()) == XY.zero()
        assert sum((y[i] * b[i] for i in range(len(rows))), XY.zero()) != XY.zero()
        return
    for i, r in enumerate(rows):
        assert sum((a * x for a, x in zip(r, sol.particular)), XY.zero()) == b[i]
        for k in sol.kernel:
            assert sum((a * x for a, x in zip(r, k)), XY.zero()) == XY.zero()


@given(st.lists(st.lists(polys(XY, 1), min_size=3, max_size=3), min_size=1, max_size=3))
def test_generic_rank_matches_point_rank(rows):
    # oracle: exact rank at a few rational points, maximized
    best = 0
    for pt in [(Fraction(3, 7), Fraction(-5, 11)), (Fraction(13, 3), Fraction(2, 9)), (Fraction(-17, 5), Fraction(19, 4))]:
        best = max(best, rank(evaluate_matrix(rows, pt)))
    assert generic_rank(rows) == best == rank(rows)


@given(st.lists(st.lists(nonzero_polys(XY, 1), min_size=2, max_size=2), min_size=2, max_size=2))
def test_kernel_vectors_annihilate(rows):
    for k in kernel(rows):
        for r in rows:
            assert sum((a * x for a, x in zip(r, k)), XY.zero()) == XY.zero()
