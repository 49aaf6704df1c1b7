"""Difference quotients, h-sweeps and the two Peano characterizations in practice.

Quotients are evaluated in one of three modes:

``exact``  rational arithmetic; refuses with ExactUnavailable when a node value is irrational
``float``  float64 evaluation, summed with :func:`math.fsum`
``auto``   exact where every node value is rational, float otherwise (per sample)
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import ExactUnavailable, InvalidOrder, PeanoDiffError, ZeroStep
from .exact_linalg import format_rational
from .functions import TestFunction
from .stencils import Stencil, forward_riemann, mz_difference, shift_family

DEFAULT_H0 = Fraction(1, 2)
DEFAULT_RATIO = Fraction(1, 2)
DEFAULT_COUNT = 40
DEFAULT_TOL = 1e-6

MODES = ("exact", "float", "auto")


def _rational(v) -> Fraction:
    # floats convert exactly; strings go through Fraction's own parser
    return Fraction(v)


def _exact_quotient(s: Stencil, f: TestFunction, x: Fraction, h: Fraction) -> Fraction:
    total = sum((c * f.exact_value(x + a * h) for a, c in zip(s.nodes, s.coefficients)), Fraction(0))
    return total / h**s.order


def _float_quotient(s: Stencil, f: TestFunction, x: float, h: float) -> float:
    terms = [float(c) * f.approx(x + float(a) * h) for a, c in zip(s.nodes, s.coefficients)]
    return math.fsum(terms) / h**s.order


def evaluate_quotient(s: Stencil, f: TestFunction, x, h, mode: str = "exact") -> Fraction | float:
    """h**-n * sum_i A_i f(x + a_i h)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if h == 0:
        raise ZeroStep("step h must be nonzero")
    if mode == "float":
        return _float_quotient(s, f, float(x), float(h))
    try:
        return _exact_quotient(s, f, _rational(x), _rational(h))
    except ExactUnavailable:
        if mode == "exact":
            raise
        return _float_quotient(s, f, float(x), float(h))


def remainder_quotient(f: TestFunction, x, h, order: int, lower: Sequence = (), mode: str = "exact"):
    """(f(x+h) - sum_{k<order} lower[k] h**k / k!) / h**order.

    With no lower derivatives this is the plain ratio f(x+h) / h**order.
    """
    if h == 0:
        raise ZeroStep("step h must be nonzero")

    def taylor(hv, xv, conv):
        return sum((conv(d) * hv**k / math.factorial(k) for k, d in enumerate(lower)), conv(0))

    if mode != "float":
        try:
            xr, hr = _rational(x), _rational(h)
            return (f.exact_value(xr + hr) - taylor(hr, xr, Fraction)) / hr**order
        except ExactUnavailable:
            if mode == "exact":
                raise
    xf, hf = float(x), float(h)
    return (f.approx(xf + hf) - taylor(hf, xf, float)) / hf**order


@dataclass(frozen=True)
class EstimateReport:
    stencil: str
    function: str
    x: str
    h: tuple[Fraction, ...]
    quotients: tuple[float | None, ...]
    exact: tuple[str | None, ...]
    gaps: tuple[float | None, ...]
    verdict: str
    limit: float | None
    limit_points: tuple[float, ...] = ()
    errors: tuple[str | None, ...] = field(default=())

    @property
    def converged(self) -> bool:
        return self.verdict == "converged"

    def to_json(self) -> dict:
        return {
            "stencil": self.stencil,
            "function": self.function,
            "x": self.x,
            "verdict": self.verdict,
            "limit": self.limit,
            "limit_points": list(self.limit_points),
            "samples": [
                {"h": format_rational(h), "quotient": q, "exact": e, "gap": g, "error": err}
                for h, q, e, g, err in zip(self.h, self.quotients, self.exact, self.gaps, self.errors)
            ],
        }

    def csv_rows(self) -> list[list[str]]:
        return [[format_rational(h), _fmt(q), _fmt(g)] for h, q, g in zip(self.h, self.quotients, self.gaps)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "quotient", "gap"])
        w.writerows(self.csv_rows())
        return buf.getvalue()


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(v)


def _cluster_values(values: Sequence[float], tol: float) -> tuple[float, ...]:
    """Representatives of groups of at least two values lying within tol of each other."""
    pts = sorted(v for v in values if math.isfinite(v))
    clusters: list[list[float]] = []
    for v in pts:
        if clusters and v - clusters[-1][-1] < tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return tuple(math.fsum(c) / len(c) for c in clusters if len(c) >= 2)


def sweep_steps(h0, ratio, count: int) -> list[Fraction]:
    h0, ratio = _rational(h0), _rational(ratio)
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie strictly between 0 and 1")
    if count < 3:
        raise ValueError("count must be at least 3")
    if h0 == 0:
        raise ZeroStep("h0 must be nonzero")
    return [h0 * ratio**k for k in range(count)]


def _sweep(label: str, fname: str, x, sample: Callable[[Fraction], Fraction | float],
           h0, ratio, count: int, tol: float) -> EstimateReport:
    if tol <= 0:
        raise ValueError("tol must be positive")
    hs = sweep_steps(h0, ratio, count)
    values: list[Fraction | float | None] = []
    errors: list[str | None] = []
    for h in hs:
        try:
            values.append(sample(h))
            errors.append(None)
        except PeanoDiffError as exc:
            values.append(None)
            errors.append(f"{type(exc).__name__}: {exc}")
    gaps: list[float | None] = [None]
    exact_gaps: list[bool] = [False]
    for prev, cur in zip(values, values[1:]):
        if prev is None or cur is None:
            gaps.append(None)
            exact_gaps.append(False)
            continue
        g = abs(cur - prev)
        gaps.append(float(g))
        exact_gaps.append(g < Fraction(tol) if isinstance(g, Fraction) else g < tol)
    floats = [None if v is None else float(v) for v in values]
    if any(e is not None for e in errors):
        verdict, limit = "incomplete", None
    else:
        window = exact_gaps[-min(3, count - 1):]
        verdict = "converged" if all(window) else "not converged"
        limit = floats[-1]
    tail = [v for v in floats[len(floats) // 2:] if v is not None]
    return EstimateReport(
        stencil=label,
        function=fname,
        x=format_rational(_rational(x)) if not isinstance(x, float) else repr(x),
        h=tuple(hs),
        quotients=tuple(floats),
        exact=tuple(format_rational(v) if isinstance(v, Fraction) else None for v in values),
        gaps=tuple(gaps),
        verdict=verdict,
        limit=limit,
        limit_points=_cluster_values(tail, tol),
        errors=tuple(errors),
    )


def stencil_label(s: Stencil) -> str:
    nodes = ",".join(format_rational(a) for a in s.nodes)
    return f"{s.name or 'stencil'}{{{nodes}}}"


def estimate_limit(s: Stencil, f: TestFunction, x=0, h0=DEFAULT_H0, ratio=DEFAULT_RATIO,
                   count: int = DEFAULT_COUNT, tol: float = DEFAULT_TOL, mode: str = "auto") -> EstimateReport:
    """Sweep h = h0 * ratio**k and judge convergence of the quotient by its last three gaps."""
    return _sweep(stencil_label(s), f.name, x, lambda h: evaluate_quotient(s, f, x, h, mode),
                  h0, ratio, count, tol)


def estimate_remainder(f: TestFunction, x=0, order: int = 1, lower: Sequence = (), h0=DEFAULT_H0,
                       ratio=DEFAULT_RATIO, count: int = DEFAULT_COUNT, tol: float = DEFAULT_TOL,
                       mode: str = "auto") -> EstimateReport:
    return _sweep(f"remainder-ratio({order})", f.name, x,
                  lambda h: remainder_quotient(f, x, h, order, lower, mode), h0, ratio, count, tol)


@dataclass(frozen=True)
class FamilyReport:
    order: int
    reports: tuple[EstimateReport, ...]
    agreement: bool

    @property
    def value(self) -> float | None:
        """Mean of the shifted limits, or None unless they agree."""
        if not self.agreement:
            return None
        limits = [r.limit for r in self.reports]
        return math.fsum(limits) / len(limits)


def _agree(reports: Sequence[EstimateReport], tol: float) -> bool:
    if not all(r.converged for r in reports):
        return False
    limits = [r.limit for r in reports]
    return max(limits) - min(limits) < tol


def shift_family_report(n: int, f: TestFunction, x=0, h0=DEFAULT_H0, ratio=DEFAULT_RATIO,
                        count: int = DEFAULT_COUNT, tol: float = DEFAULT_TOL, mode: str = "auto") -> FamilyReport:
    reports = tuple(estimate_limit(s, f, x, h0, ratio, count, tol, mode) for s in shift_family(n))
    return FamilyReport(n, reports, _agree(reports, tol))


@dataclass(frozen=True)
class ProfileEntry:
    order: int
    value: float | None
    ok: bool
    reports: tuple[EstimateReport, ...]


def peano_profile(f: TestFunction, x=0, n: int = 1, method: str = "mz", h0=DEFAULT_H0, ratio=DEFAULT_RATIO,
                  count: int = DEFAULT_COUNT, tol: float = DEFAULT_TOL, mode: str = "auto") -> list[ProfileEntry]:
    """Estimates of f_(1)(x) .. f_(n)(x) by either pointwise characterization.

    ``mz`` takes one limit per order with the MZ stencil; ``shifts`` takes the
    first-order forward quotient and then the whole shift family per order,
    requiring the shifted limits to agree.
    """
    if n < 1:
        raise InvalidOrder(f"profile order must be >= 1, got {n}")
    if method not in ("mz", "shifts"):
        raise ValueError("method must be 'mz' or 'shifts'")
    out = []
    for k in range(1, n + 1):
        if method == "mz" or k == 1:
            s = mz_difference(k)[2] if method == "mz" else forward_riemann(1)
            r = estimate_limit(s, f, x, h0, ratio, count, tol, mode)
            out.append(ProfileEntry(k, r.limit, r.converged, (r,)))
        else:
            fam = shift_family_report(k, f, x, h0, ratio, count, tol, mode)
            out.append(ProfileEntry(k, fam.value, fam.agreement, fam.reports))
    return out


@dataclass(frozen=True)
class ConditioningReport:
    stencil: str
    abs_sum: Fraction
    abs_sum_float: float
    max_abs: Fraction
    span: Fraction
    node_count: int

    def to_json(self) -> dict:
        return {
            "stencil": self.stencil,
            "abs_sum": format_rational(self.abs_sum),
            "abs_sum_float": self.abs_sum_float,
            "max_abs": format_rational(self.max_abs),
            "span": format_rational(self.span),
            "node_count": self.node_count,
        }


def conditioning_report(s: Stencil) -> ConditioningReport:
    abs_sum = sum((abs(c) for c in s.coefficients), Fraction(0))
    return ConditioningReport(
        stencil_label(s),
        abs_sum,
        float(abs_sum),
        max(abs(c) for c in s.coefficients),
        s.nodes[-1] - s.nodes[0],
        len(s.nodes),
    )


@dataclass(frozen=True)
class MethodComparison:
    order: int
    mz: ConditioningReport
    mz_nodes: tuple[Fraction, ...]
    shifts: tuple[ConditioningReport, ...]
    shift_points: tuple[Fraction, ...]
    identical: bool

    @property
    def mz_limits(self) -> int:
        return 1

    @property
    def shift_limits(self) -> int:
        return len(self.shifts)

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "mz": {
                "nodes": self.mz.node_count,
                "max_node": format_rational(self.mz_nodes[-1]),
                "span": format_rational(self.mz.span),
                "abs_sum": format_rational(self.mz.abs_sum),
                "limits": self.mz_limits,
            },
            "shifts": {
                "nodes_per_limit": self.shifts[0].node_count,
                "distinct_points": len(self.shift_points),
                "points": [format_rational(a) for a in self.shift_points],
                "span": format_rational(self.shift_points[-1] - self.shift_points[0]),
                "abs_sum_per_limit": format_rational(self.shifts[0].abs_sum),
                "limits": self.shift_limits,
            },
            "identical": self.identical,
        }


def compare_methods(order: int) -> MethodComparison:
    if order < 2:
        raise InvalidOrder(f"comparison needs order >= 2, got {order}")
    mz = mz_difference(order)[2]
    family = shift_family(order)
    points = sorted({a for s in family for a in s.nodes})
    return MethodComparison(
        order,
        conditioning_report(mz),
        mz.nodes,
        tuple(conditioning_report(s) for s in family),
        tuple(points),
        identical=len(family) == 1 and family[0] == mz,
    )
