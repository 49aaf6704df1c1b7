"""Generalized Riemann difference stencils and their algebra.

A :class:`Stencil` of order n is a data vector with n+1 distinct nodes whose
coefficients satisfy the nth Vandermonde conditions exactly. Every
constructor here returns a validated stencil; the raw Marcinkiewicz-Zygmund
difference, which only satisfies the lower conditions, is kept separate as
:class:`RawDifference`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import (
    DegenerateCombination,
    IntersectionNotN,
    InvalidOrder,
    NodeNotShared,
    OrderMismatch,
    PeanoDiffError,
    ZeroDilation,
)
from .exact_linalg import as_rational, format_rational, moment, parse_rational, solve_vandermonde, vandermonde_residual


@dataclass(frozen=True)
class Stencil:
    order: int
    nodes: tuple[Fraction, ...]
    coefficients: tuple[Fraction, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(as_rational(a) for a in self.nodes))
        object.__setattr__(self, "coefficients", tuple(as_rational(c) for c in self.coefficients))
        if self.order < 0:
            raise InvalidOrder(f"order must be nonnegative, got {self.order}")
        if len(self.nodes) != self.order + 1 or len(self.coefficients) != self.order + 1:
            raise PeanoDiffError(f"order {self.order} stencil needs {self.order + 1} nodes and coefficients")
        if any(b <= a for a, b in zip(self.nodes, self.nodes[1:])):
            raise PeanoDiffError("stencil nodes must be strictly increasing")
        if any(c == 0 for c in self.coefficients):
            raise PeanoDiffError("zero coefficient: node is not a base point")
        if any(vandermonde_residual(self.coefficients, self.nodes, self.order)):
            raise PeanoDiffError("coefficients violate the Vandermonde conditions")

    @classmethod
    def from_pairs(cls, order: int, pairs: Mapping[Fraction, Fraction] | Iterable[tuple], name: str = "") -> Stencil:
        items = sorted(dict(pairs).items())
        return cls(order, tuple(a for a, _ in items), tuple(c for _, c in items), name)

    def as_dict(self) -> dict[Fraction, Fraction]:
        return dict(zip(self.nodes, self.coefficients))

    def node_set(self) -> frozenset[Fraction]:
        return frozenset(self.nodes)

    def coefficient_at(self, a) -> Fraction:
        return self.as_dict().get(as_rational(a), Fraction(0))

    def renamed(self, name: str) -> Stencil:
        return Stencil(self.order, self.nodes, self.coefficients, name)

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "nodes": [format_rational(a) for a in self.nodes],
            "coefficients": [format_rational(c) for c in self.coefficients],
        }

    @classmethod
    def from_json(cls, data: Mapping, name: str = "") -> Stencil:
        return cls(
            int(data["order"]),
            tuple(parse_rational(str(a)) for a in data["nodes"]),
            tuple(parse_rational(str(c)) for c in data["coefficients"]),
            name,
        )

    def __str__(self) -> str:
        terms = ", ".join(f"{format_rational(c)}@{format_rational(a)}" for a, c in zip(self.nodes, self.coefficients))
        label = self.name or f"order-{self.order}"
        return f"{label}[{terms}]"


@dataclass(frozen=True)
class RawDifference:
    """Difference whose conditions j < n hold exactly but whose nth moment is arbitrary (nonzero)."""

    order: int
    nodes: tuple[Fraction, ...]
    coefficients: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        res = vandermonde_residual(self.coefficients, self.nodes, self.order)
        if any(res[:-1]):
            raise PeanoDiffError("lower Vandermonde conditions fail")
        if self.nth_moment() == 0:
            raise PeanoDiffError("nth moment vanishes")

    def nth_moment(self) -> Fraction:
        return moment(self.coefficients, self.nodes, self.order)

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "nodes": [format_rational(a) for a in self.nodes],
            "coefficients": [format_rational(c) for c in self.coefficients],
        }


def from_nodes(nodes: Iterable, order: int, name: str = "") -> Stencil:
    pts = sorted(as_rational(a) for a in nodes)
    return Stencil(order, tuple(pts), solve_vandermonde(pts, order), name)


def forward_riemann(n: int) -> Stencil:
    if n < 1:
        raise InvalidOrder(f"forward Riemann difference needs n >= 1, got {n}")
    pairs = {Fraction(n - i): Fraction((-1) ** i * math.comb(n, i)) for i in range(n + 1)}
    return Stencil.from_pairs(n, pairs, f"D{n}")


def symmetric_riemann(n: int) -> Stencil:
    if n < 1:
        raise InvalidOrder(f"symmetric Riemann difference needs n >= 1, got {n}")
    pairs = {Fraction(n, 2) - i: Fraction((-1) ** i * math.comb(n, i)) for i in range(n + 1)}
    return Stencil.from_pairs(n, pairs, f"D{n}s")


def shift(s: Stencil, r) -> Stencil:
    r = as_rational(r)
    return Stencil(s.order, tuple(a + r for a in s.nodes), s.coefficients, s.name)


def shift_family(n: int) -> list[Stencil]:
    """D_{n,j} for j = 0..n-2: the first n-1 forward shifts of the forward difference."""
    if n < 2:
        raise InvalidOrder(f"shift family needs n >= 2, got {n}")
    base = forward_riemann(n)
    return [shift(base, j).renamed(f"D{n},{j}") for j in range(n - 1)]


def dilate(s: Stencil, r) -> Stencil:
    r = as_rational(r)
    if r == 0:
        raise ZeroDilation("dilation factor must be nonzero")
    scale = r ** (-s.order)
    pairs = {a * r: c * scale for a, c in zip(s.nodes, s.coefficients)}
    return Stencil.from_pairs(s.order, pairs, s.name)


def eliminate(s: Stencil, t: Stencil, a) -> Stencil:
    """Combine s and t so that node ``a`` cancels, then renormalize to a true stencil."""
    if s.order != t.order:
        raise OrderMismatch(f"orders differ: {s.order} vs {t.order}")
    n = s.order
    a = as_rational(a)
    common = s.node_set() & t.node_set()
    if len(common) != n:
        raise IntersectionNotN(f"stencils share {len(common)} nodes, need {n}")
    if a not in common:
        raise NodeNotShared(f"node {format_rational(a)} is not shared")
    sd, td = s.as_dict(), t.as_dict()
    alpha, beta = td[a], -sd[a]
    combined: dict[Fraction, Fraction] = {}
    for node in s.node_set() | t.node_set():
        c = alpha * sd.get(node, 0) + beta * td.get(node, 0)
        if c != 0:
            combined[node] = c
        elif node != a:
            raise DegenerateCombination(f"combination also cancels node {format_rational(node)}")
    nodes = sorted(combined)
    coeffs = [combined[x] for x in nodes]
    m = moment(coeffs, nodes, n)
    if m == 0:
        raise DegenerateCombination("nth moment vanishes after cancellation")
    scale = math.factorial(n) / m
    return Stencil(n, tuple(nodes), tuple(c * scale for c in coeffs))


def mz_raw(n: int) -> RawDifference:
    if n < 1:
        raise InvalidOrder(f"MZ difference needs n >= 1, got {n}")
    current = {Fraction(0): Fraction(-1), Fraction(1): Fraction(1)}
    for k in range(2, n + 1):
        nxt: dict[Fraction, Fraction] = {}
        for node, c in current.items():
            nxt[2 * node] = nxt.get(2 * node, 0) + c
            nxt[node] = nxt.get(node, 0) - 2 ** (k - 1) * c
        current = {node: c for node, c in nxt.items() if c != 0}
    nodes = sorted(current)
    return RawDifference(n, tuple(nodes), tuple(current[x] for x in nodes))


def mz_difference(n: int) -> tuple[RawDifference, Fraction, Stencil]:
    """Raw MZ difference, its normalizing scalar lambda_n, and the normalized stencil."""
    raw = mz_raw(n)
    lam = Fraction(math.factorial(n)) / raw.nth_moment()
    stencil = Stencil(n, raw.nodes, tuple(lam * c for c in raw.coefficients), f"MZ{n}")
    return raw, lam, stencil


def mz_nodes(n: int) -> list[int]:
    return [0] + [2**k for k in range(n)]
