from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_solve, lagrange_weights
from peanodiff.errors import ArityMismatch, DuplicateNodes
from peanodiff.exact_linalg import format_rational, parse_rational, solve_vandermonde, vandermonde_residual


@pytest.mark.parametrize(
    "nodes, n, expected",
    [
        ((0, 1), 1, (-1, 1)),
        ((-1, 0, 1), 2, (1, -2, 1)),
        ((0, 1, 2, 4), 3, (F(-3, 4), 2, F(-3, 2), F(1, 4))),
        ((0, 1, 2, 3), 3, (-1, 3, -3, 1)),
    ],
)
def test_solve_examples(nodes, n, expected):
    assert solve_vandermonde(nodes, n) == tuple(F(e) for e in expected)


def test_solve_sorts_nodes():
    assert solve_vandermonde((4, 0, 2, 1), 3) == solve_vandermonde((0, 1, 2, 4), 3)


def test_order_zero():
    assert solve_vandermonde(("7/3",), 0) == (F(1),)


def test_solve_errors():
    with pytest.raises(DuplicateNodes):
        solve_vandermonde((0, 1, 1), 2)
    with pytest.raises(ArityMismatch):
        solve_vandermonde((0, 1), 2)


def test_residual_examples():
    assert vandermonde_residual((-1, 1), (0, 1), 1) == (0, 0)
    assert vandermonde_residual((1, 1), (0, 1), 1) == (2, 0)
    with pytest.raises(ArityMismatch):
        vandermonde_residual((1, 2), (0,), 1)


def test_zero_to_the_zero_is_one():
    # only node 0 contributes to j = 0 through 0**0
    assert vandermonde_residual((5,), (0,), 0) == (4,)


@pytest.mark.parametrize("text, value", [("3", F(3)), ("-3/4", F(-3, 4)), ("+6/8", F(3, 4)), ("0", F(0))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["1.5", "1e3", "1/0", "a", "1/-2", ""])
def test_parse_rational_rejects(text):
    with pytest.raises(ValueError):
        parse_rational(text)


def test_format_rational():
    assert format_rational(F(6, 8)) == "3/4"
    assert format_rational(F(-4, 2)) == "-2"
    assert parse_rational(format_rational(F(-22, 7))) == F(-22, 7)


node_sets = st.integers(min_value=0, max_value=8).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=12),
                 min_size=n + 1, max_size=n + 1, unique=True),
    )
)


@settings(max_examples=150, deadline=None)
@given(node_sets)
def test_solver_agrees_with_both_oracles(case):
    n, nodes = case
    got = solve_vandermonde(nodes, n)
    assert list(got) == lagrange_weights(nodes, n)
    assert list(got) == dense_solve(nodes, n)


@settings(max_examples=150, deadline=None)
@given(node_sets, st.data())
def test_round_trip_and_uniqueness(case, data):
    n, nodes = case
    coeffs = solve_vandermonde(nodes, n)
    pts = sorted(nodes)
    assert not any(vandermonde_residual(coeffs, pts, n))
    i = data.draw(st.integers(0, n))
    eps = data.draw(st.fractions(min_value=-5, max_value=5).filter(lambda q: q != 0))
    bumped = list(coeffs)
    bumped[i] += eps
    assert any(vandermonde_residual(bumped, pts, n))
