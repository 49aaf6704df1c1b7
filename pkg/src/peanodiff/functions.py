"""Catalog of test functions with exact and floating-point evaluators.

Exact evaluators raise :class:`ExactUnavailable` wherever the value is not
a rational number (``x**3 sin(1/x)`` away from 0, ``x**(n-1/2)`` off the
squares, ``exp`` everywhere).
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .errors import ExactUnavailable, NonPositive, PeanoDiffError


class UnknownFunction(PeanoDiffError):
    pass


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # keep pytest from collecting this class

    name: str
    exact: Callable[[Fraction], Fraction] | None
    approx: Callable[[float], float]
    facts: Mapping[str, object] = field(default_factory=dict)

    def exact_value(self, x: Fraction) -> Fraction:
        if self.exact is None:
            raise ExactUnavailable(f"{self.name} has no exact evaluator")
        return self.exact(x)


def _valuation(n: int, p: int) -> tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def in_group_23(q) -> tuple[int, int] | None:
    """Return (m, k) with q == 2**m * 3**k, or None when q is not of that form."""
    q = Fraction(q)
    if q <= 0:
        raise NonPositive(f"expected a positive rational, got {q}")
    m1, num = _valuation(q.numerator, 2)
    k1, num = _valuation(num, 3)
    m2, den = _valuation(q.denominator, 2)
    k2, den = _valuation(den, 3)
    if num != 1 or den != 1:
        return None
    return m1 - m2, k1 - k2


# -- polynomials ---------------------------------------------------------------


def _poly_mul(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_add(p: list[int], q: list[int], sign: int = 1) -> list[int]:
    out = [0] * max(len(p), len(q))
    for i, a in enumerate(p):
        out[i] += a
    for i, b in enumerate(q):
        out[i] += sign * b
    return out


def _poly_from_ast(node: ast.AST) -> list[int]:
    if isinstance(node, ast.Expression):
        return _poly_from_ast(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return [node.value]
    if isinstance(node, ast.Name) and node.id == "x":
        return [0, 1]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        p = _poly_from_ast(node.operand)
        return [-c for c in p] if isinstance(node.op, ast.USub) else p
    if isinstance(node, ast.BinOp):
        left = _poly_from_ast(node.left)
        if isinstance(node.op, ast.Pow):
            exp = _poly_from_ast(node.right)
            if any(exp[1:]) or exp[0] < 0:
                raise UnknownFunction("exponents must be nonnegative integer constants")
            out = [1]
            for _ in range(exp[0]):
                out = _poly_mul(out, left)
            return out
        right = _poly_from_ast(node.right)
        if isinstance(node.op, ast.Add):
            return _poly_add(left, right)
        if isinstance(node.op, ast.Sub):
            return _poly_add(left, right, -1)
        if isinstance(node.op, ast.Mult):
            return _poly_mul(left, right)
    raise UnknownFunction(f"unsupported polynomial syntax: {ast.dump(node)}")


def parse_polynomial(expr: str) -> tuple[int, ...]:
    """Integer coefficients (constant term first) of a polynomial in ``x``.

    Accepts ``+ - *``, ``^`` or ``**`` with constant exponents, integers and parentheses.
    """
    try:
        tree = ast.parse(expr.replace("^", "**"), mode="eval")
    except SyntaxError:
        raise UnknownFunction(f"cannot parse polynomial {expr!r}") from None
    coeffs = _poly_from_ast(tree)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def polynomial(coeffs: tuple[int, ...], name: str | None = None) -> TestFunction:
    def exact(x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    def approx(x: float) -> float:
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    terms = " + ".join(f"{c}*x^{i}" for i, c in enumerate(coeffs) if c)
    label = name or f"poly:{terms or '0'}"
    return TestFunction(label, exact, approx, {"coefficients": coeffs, "smooth": True})


def poly_derivative(coeffs: tuple[int, ...], x, k: int) -> Fraction:
    """kth derivative at x, which is also the kth Peano derivative."""
    x = Fraction(x)
    total = Fraction(0)
    for i, c in enumerate(coeffs):
        if i >= k:
            total += c * math.perm(i, k) * x ** (i - k)
    return total


# -- the distinguished examples ------------------------------------------------


def _sgn_exact(x: Fraction) -> Fraction:
    return Fraction((x > 0) - (x < 0))


def sgn() -> TestFunction:
    return TestFunction(
        "sgn",
        _sgn_exact,
        lambda x: float((x > 0) - (x < 0)),
        {"point": 0, "schwarz": 0, "peano_orders": ()},
    )


def _x3sin_exact(x: Fraction) -> Fraction:
    if x == 0:
        return Fraction(0)
    raise ExactUnavailable("x**3 sin(1/x) is irrational at nonzero rationals")


def x3sin() -> TestFunction:
    return TestFunction(
        "x3sin",
        _x3sin_exact,
        lambda x: 0.0 if x == 0 else x**3 * math.sin(1.0 / x),
        {"point": 0, "peano": (0, 0, 0), "second_derivative_exists": False},
    )


def _sqrt_exact(q: Fraction) -> Fraction | None:
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def parity(n: int) -> TestFunction:
    """x**(n-1/2) for x >= 0, mirrored with sign (-1)**(n-1) for x < 0."""
    if n < 1:
        raise UnknownFunction("parity:<n> needs n >= 1")
    sign = (-1) ** (n - 1)

    def g_exact(t: Fraction) -> Fraction:
        if t == 0:
            return Fraction(0)
        root = _sqrt_exact(t)
        if root is None:
            raise ExactUnavailable(f"{t}**({n}-1/2) is irrational")
        return t**n / root

    def exact(x: Fraction) -> Fraction:
        return g_exact(x) if x >= 0 else sign * g_exact(-x)

    def approx(x: float) -> float:
        return math.pow(x, n - 0.5) if x >= 0 else sign * math.pow(-x, n - 0.5)

    return TestFunction(
        f"parity:{n}",
        exact,
        approx,
        {"point": 0, "peano": (0,) * n, "peano_fails_at": n},
    )


def _group23_exact(x: Fraction) -> Fraction:
    if x <= 0:
        return Fraction(0)
    mk = in_group_23(x)
    if mk is None:
        return Fraction(0)
    return (-1) ** ((mk[0] + mk[1]) % 2) * x**3


def group23() -> TestFunction:
    return TestFunction(
        "group23",
        _group23_exact,
        # floats are dyadic, so the exact rule applies to their exact value
        lambda x: float(_group23_exact(Fraction(x))),
        {"point": 0, "peano": (0, 0, 0), "forward_riemann_3": 0, "ratio_limit_points": (-1, 0, 1)},
    )


def exp() -> TestFunction:
    return TestFunction("exp", None, math.exp, {"smooth": True, "derivatives_at_0": 1})


def parse_function(text: str) -> TestFunction:
    """Resolve the function mini-language: poly:<expr>, group23, parity:<n>, sgn, x3sin, exp."""
    text = text.strip()
    if text.startswith("poly:"):
        return polynomial(parse_polynomial(text[5:]), name=text)
    if text.startswith("parity:"):
        try:
            n = int(text[7:])
        except ValueError:
            raise UnknownFunction(f"bad parity order in {text!r}") from None
        return parity(n)
    simple = {"group23": group23, "sgn": sgn, "x3sin": x3sin, "exp": exp}
    if text in simple:
        return simple[text]()
    raise UnknownFunction(f"unknown function {text!r}")


def builtin_functions() -> dict[str, TestFunction]:
    catalog = {f"poly:x^{m}": polynomial((0,) * m + (1,), name=f"poly:x^{m}") for m in range(9)}
    catalog.update({f"parity:{n}": parity(n) for n in range(1, 9)})
    for f in (sgn(), x3sin(), group23(), exp()):
        catalog[f.name] = f
    return catalog
