"""Exact rational arithmetic and the Vandermonde solver.

Rationals are :class:`fractions.Fraction` values at every public boundary;
nothing in this module touches floating point.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import ArityMismatch, DuplicateNodes, InvalidOrder

Rational = Fraction

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:/(\d+))?\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` with an optional sign.

    Decimal and exponent notation are rejected so that every accepted string
    denotes exactly the rational it spells.
    """
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ValueError(f"not a rational literal: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(q: Fraction | int) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational")


def _check_nodes(nodes: Sequence[Fraction], order: int) -> None:
    if order < 0:
        raise InvalidOrder(f"order must be nonnegative, got {order}")
    if len(nodes) != order + 1:
        raise ArityMismatch(f"order {order} needs {order + 1} nodes, got {len(nodes)}")
    if len(set(nodes)) != len(nodes):
        raise DuplicateNodes(f"nodes are not pairwise distinct: {[format_rational(a) for a in nodes]}")


def solve_vandermonde(nodes: Iterable, order: int) -> tuple[Fraction, ...]:
    """Coefficients A with sum_i A_i a_i**j == order! * [j == order], j = 0..order.

    The result is aligned to the nodes sorted ascending. The system is solved
    by Bjorck-Pereyra elimination, which factors the Vandermonde matrix into
    bidiagonal pieces and needs O(n**2) exact operations.
    """
    pts = sorted(as_rational(a) for a in nodes)
    _check_nodes(pts, order)
    n = order
    # mpq carries the inner loops; results are handed back as Fraction
    x = [mpq(a.numerator, a.denominator) for a in pts]
    b = [mpq(0)] * n + [mpq(math.factorial(n))]
    for k in range(n):
        for i in range(n, k, -1):
            b[i] -= x[k] * b[i - 1]
    for k in range(n - 1, -1, -1):
        for i in range(k + 1, n + 1):
            b[i] /= x[i] - x[i - k - 1]
        for i in range(k, n):
            b[i] -= b[i + 1]
    return tuple(Fraction(int(c.numerator), int(c.denominator)) for c in b)


def _moments(coefficients: Sequence[Fraction], nodes: Sequence[Fraction], upto: int) -> list[Fraction]:
    # clear denominators so the power sums run over plain integers
    den_c = math.lcm(*(c.denominator for c in coefficients)) if coefficients else 1
    den_a = math.lcm(*(a.denominator for a in nodes)) if nodes else 1
    weights = [c.numerator * (den_c // c.denominator) for c in coefficients]
    points = [a.numerator * (den_a // a.denominator) for a in nodes]
    out = []
    powers = [1] * len(points)  # 0**0 == 1
    for j in range(upto + 1):
        out.append(Fraction(sum(w * p for w, p in zip(weights, powers)), den_c * den_a**j))
        powers = [p * a for p, a in zip(powers, points)]
    return out


def vandermonde_residual(coefficients: Sequence, nodes: Sequence, order: int) -> tuple[Fraction, ...]:
    """Entry j is sum_i A_i a_i**j - order! * [j == order], for j = 0..order."""
    if len(coefficients) != len(nodes):
        raise ArityMismatch(f"{len(coefficients)} coefficients for {len(nodes)} nodes")
    if order < 0:
        raise InvalidOrder(f"order must be nonnegative, got {order}")
    coeffs = [as_rational(c) for c in coefficients]
    pts = [as_rational(a) for a in nodes]
    out = _moments(coeffs, pts, order)
    out[order] -= math.factorial(order)
    return tuple(out)


def moment(coefficients: Sequence, nodes: Sequence, j: int) -> Fraction:
    """sum_i A_i a_i**j with 0**0 == 1."""
    return _moments([as_rational(c) for c in coefficients], [as_rational(a) for a in nodes], j)[j]
