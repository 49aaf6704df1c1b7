import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peanodiff.errors import ExactUnavailable, NonPositive
from peanodiff.functions import (UnknownFunction, builtin_functions, group23, in_group_23, parity,
                                 parse_function, parse_polynomial, poly_derivative, sgn, x3sin)


@pytest.mark.parametrize("q, expected", [(12, (2, 1)), (1, (0, 0)), (5, None), (F(3, 8), (-3, 1)), (F(1, 18), (-1, -2))])
def test_in_group_23(q, expected):
    assert in_group_23(q) == expected


@pytest.mark.parametrize("q", [0, -6])
def test_in_group_23_rejects_nonpositive(q):
    with pytest.raises(NonPositive):
        in_group_23(q)


def test_group23_values():
    g = group23()
    assert g.exact_value(F(12)) == -1728
    assert g.exact_value(F(5)) == 0
    assert g.exact_value(F(-4)) == 0
    assert g.exact_value(F(1, 2)) == F(-1, 8)
    assert g.approx(0.25) == 0.25**3


def test_parity_values():
    p3 = parity(3)
    assert p3.approx(-4.0) == 32.0
    assert p3.exact_value(F(-4)) == 32
    assert p3.exact_value(F(9, 4)) == F(243, 32)
    with pytest.raises(ExactUnavailable):
        p3.exact_value(F(2))
    assert parity(2).exact_value(F(-4)) == -8


def test_x3sin_and_sgn():
    g = x3sin()
    assert g.exact_value(F(0)) == 0 and g.approx(0.0) == 0.0
    with pytest.raises(ExactUnavailable):
        g.exact_value(F(1, 3))
    assert math.isclose(g.approx(0.5), 0.125 * math.sin(2.0))
    s = sgn()
    assert [s.exact_value(F(v)) for v in (-2, 0, 3)] == [-1, 0, 1]


def test_exp_has_no_exact_evaluator():
    e = parse_function("exp")
    with pytest.raises(ExactUnavailable):
        e.exact_value(F(0))
    assert e.approx(1.0) == math.e


@pytest.mark.parametrize(
    "expr, coeffs",
    [("x^5", (0, 0, 0, 0, 0, 1)), ("3*x**2 - 2*x + 7", (7, -2, 3)), ("(x+1)^3", (1, 3, 3, 1)), ("x - x", (0,)),
     ("-(x^2)", (0, 0, -1))],
)
def test_parse_polynomial(expr, coeffs):
    assert parse_polynomial(expr) == coeffs


@pytest.mark.parametrize("expr", ["x^y", "sin(x)", "x/2", "1.5*x", "x^-1", "x +"])
def test_parse_polynomial_rejects(expr):
    with pytest.raises(UnknownFunction):
        parse_polynomial(expr)


@pytest.mark.parametrize("text", ["cos", "parity:x", "parity:0", "poly:y"])
def test_parse_function_rejects(text):
    with pytest.raises(UnknownFunction):
        parse_function(text)


def test_poly_derivative():
    c = parse_polynomial("x^5")
    assert [poly_derivative(c, 1, k) for k in range(1, 6)] == [5, 20, 60, 120, 120]


def test_catalog_contents():
    cat = builtin_functions()
    for name in ("poly:x^3", "sgn", "x3sin", "parity:3", "group23", "exp"):
        assert name in cat


@settings(max_examples=100, deadline=None)
@given(st.fractions(min_value=-4, max_value=4, max_denominator=64))
def test_exact_and_float_evaluators_agree(x):
    for name, f in builtin_functions().items():
        if name == "group23" and F(float(x)) != x:
            # nowhere continuous: the rounded float is a different point, possibly outside G
            continue
        try:
            exact = f.exact_value(x)
        except ExactUnavailable:
            continue
        assert math.isclose(f.approx(float(x)), float(exact), rel_tol=1e-12, abs_tol=1e-300), name
