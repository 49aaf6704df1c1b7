"""Command-line front end.

Exit codes: 0 success, 1 verification or convergence failure, 2 usage error.
Payloads go to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import elimination, numeric_lab, stencils
from .errors import PeanoDiffError
from .exact_linalg import format_rational, parse_rational
from .functions import parse_function

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt_set(xs) -> str:
    return "{" + ",".join(format_rational(x) if isinstance(x, Fraction) else str(x) for x in xs) + "}"


def _rationals(text: str) -> list[Fraction]:
    try:
        return [parse_rational(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _rational_arg(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# -- stencil / mz --------------------------------------------------------------


def cmd_stencil(args) -> tuple[int, str]:
    nodes = _rationals(args.nodes)
    try:
        s = stencils.from_nodes(nodes, args.order)
    except PeanoDiffError as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from None
    return EXIT_OK, _render_stencil(s, args.format)


def _render_stencil(s: stencils.Stencil, fmt: str) -> str:
    if fmt == "json":
        return _emit_json(s.to_json())
    if fmt == "csv":
        return _emit_csv(["node", "coefficient"], [[format_rational(a), format_rational(c)]
                                                   for a, c in zip(s.nodes, s.coefficients)])
    return (f"order {s.order}\n"
            f"nodes {', '.join(format_rational(a) for a in s.nodes)}\n"
            f"coefficients {', '.join(format_rational(c) for c in s.coefficients)}\n")


def cmd_mz(args) -> tuple[int, str]:
    if args.n < 1:
        raise UsageError(f"InvalidOrder: MZ difference needs n >= 1, got {args.n}")
    raw, lam, s = stencils.mz_difference(args.n)
    if args.format == "json":
        return EXIT_OK, _emit_json({"order": args.n, "raw": raw.to_json(), "lambda": format_rational(lam),
                                    "stencil": s.to_json()})
    if args.format == "csv":
        rows = [[format_rational(a), format_rational(r), format_rational(lam), format_rational(c)]
                for a, r, c in zip(s.nodes, raw.coefficients, s.coefficients)]
        return EXIT_OK, _emit_csv(["node", "raw", "lambda", "coefficient"], rows)
    text = (f"order {args.n}\n"
            f"nodes {', '.join(format_rational(a) for a in s.nodes)}\n"
            f"raw {', '.join(format_rational(c) for c in raw.coefficients)}\n"
            f"lambda {format_rational(lam)}\n"
            f"coefficients {', '.join(format_rational(c) for c in s.coefficients)}\n")
    return EXIT_OK, text


# -- certificates --------------------------------------------------------------


def render_grouped(d: elimination.Derivation) -> str:
    """Parallelogram arrays: equal entries share a column, intruders in **bold**, the Step-3 anchor starred."""
    out = []
    titles = {"step1": "Step 1", "step2": "Step 2", "step3": "Step 3", "step4": "Step 4"}
    for stage in d.trace:
        columns = sorted({x for row in stage.rows for x in row})
        cells = {}
        for r, row in enumerate(stage.rows):
            for x in row:
                if r == stage.asterisk_row and x == stage.asterisk:
                    cells[r, x] = f"{x}*"
                elif elimination.is_intruder(x):
                    cells[r, x] = f"**{x}**"
                else:
                    cells[r, x] = str(x)
        width = {x: max(len(cells.get((r, x), "")) for r in range(len(stage.rows))) for x in columns}
        note = ""
        if stage.label == "step4":
            note = " (top row deleted)" if stage.deleted_top else " (top row kept)"
            note += f", base 2*top = {_fmt_set(stage.base)}"
        out.append(f"{titles[stage.label]}{note}")
        for r in range(len(stage.rows)):
            line = "  ".join(cells.get((r, x), "").rjust(width[x]) for x in columns)
            out.append("  " + line.rstrip())
        out.append("")
    return "\n".join(out)


def render_primitive(d: elimination.Derivation) -> str:
    lines = []
    for i, (step, s) in enumerate(zip(d.steps, d.produced)):
        if isinstance(step, elimination.Input):
            what = f"input j={step.j}"
        elif isinstance(step, elimination.Dilate):
            what = f"dilate #{step.src}"
        else:
            what = f"eliminate {step.removed} between #{step.src1} and #{step.src2}"
        lines.append(f"{i:4d}  {what:<36} {_fmt_set(s)}")
    return "\n".join(lines) + "\n"


def cmd_derive(args) -> tuple[int, str]:
    if args.n < 2:
        raise UsageError(f"InvalidOrder: derivation needs n >= 2, got {args.n}")
    d = elimination.derive_geometric(args.n)
    cert = elimination.dump_certificate(d)
    if args.out:
        Path(args.out).write_text(cert, encoding="utf-8")
    if args.format == "json":
        return EXIT_OK, cert
    if args.format == "csv":
        rows = []
        for i, (step, s) in enumerate(zip(d.steps, d.produced)):
            j = getattr(step, "j", "")
            src1 = getattr(step, "src", getattr(step, "src1", ""))
            rows.append([i, type(step).__name__.lower(), j, src1, getattr(step, "src2", ""),
                         getattr(step, "removed", ""), " ".join(map(str, s))])
        return EXIT_OK, _emit_csv(["step", "op", "j", "src1", "src2", "removed", "produced"], rows)
    body = render_grouped(d) if args.trace == "grouped" else render_primitive(d)
    return EXIT_OK, body + f"final {_fmt_set(d.final)}\n"


def _load(path: str) -> tuple[elimination.Derivation, tuple[int, ...]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read certificate: {exc}") from None
    try:
        return elimination.load_certificate(text)
    except PeanoDiffError as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from None


def _verdict_payload(v: elimination.Verdict, fmt: str) -> str:
    if fmt == "json":
        return _emit_json({"ok": v.ok, "step": v.step, "rule": v.rule, "message": v.message})
    if fmt == "csv":
        return _emit_csv(["ok", "step", "rule", "message"],
                         [[v.ok, "" if v.step is None else v.step, v.rule or "", v.message]])
    if v.ok:
        return "ok\n"
    return f"rejected at step {v.step}: {v.rule}: {v.message}\n"


def cmd_verify(args) -> tuple[int, str]:
    d, final = _load(args.cert)
    v = elimination.verify_derivation(d.order, d, claimed_final=final)
    return (EXIT_OK if v else EXIT_FAIL), _verdict_payload(v, args.format)


def cmd_replay(args) -> tuple[int, str]:
    d, final = _load(args.cert)
    v = elimination.verify_derivation(d.order, d, claimed_final=final)
    if not v:
        return EXIT_FAIL, _verdict_payload(v, args.format)
    full = elimination.complete(d)
    try:
        chain = elimination.replay_derivation(d.order, full)
    except PeanoDiffError as exc:
        v = elimination.Verdict(False, None, type(exc).__name__, str(exc))
        return EXIT_FAIL, _verdict_payload(v, args.format)
    s = chain[-1]
    if args.format == "json":
        return EXIT_OK, _emit_json({"ok": True, "steps": len(chain), "final": s.to_json()})
    if args.format == "csv":
        return EXIT_OK, _render_stencil(s, "csv")
    return EXIT_OK, f"ok: {len(chain)} steps replayed\n" + _render_stencil(s, "text")


# -- numerics ------------------------------------------------------------------


def _pick_stencil(kind: str, order: int) -> stencils.Stencil:
    if kind == "forward":
        return stencils.forward_riemann(order)
    if kind == "symmetric":
        return stencils.symmetric_riemann(order)
    if kind == "mz":
        return stencils.mz_difference(order)[2]
    if kind.startswith("shift:"):
        j = int(kind[6:])
        if not 0 <= j <= order - 2:
            raise UsageError(f"shift index must lie in 0..{order - 2}")
        return stencils.shift_family(order)[j]
    raise UsageError(f"unknown stencil {kind!r}")


def cmd_estimate(args) -> tuple[int, str]:
    try:
        f = parse_function(args.fn)
    except PeanoDiffError as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from None
    if args.order < 1:
        raise UsageError("order must be >= 1")
    sweep = dict(h0=args.h0, ratio=args.ratio, count=args.count, tol=args.tol, mode=args.mode)
    try:
        if args.stencil:
            s = _pick_stencil(args.stencil, args.order)
            entries = [numeric_lab.ProfileEntry(args.order, *_single(s, f, args.x, sweep))]
        else:
            entries = numeric_lab.peano_profile(f, args.x, args.order, args.method, **sweep)
    except (PeanoDiffError, ValueError) as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from None
    code = EXIT_OK if all(e.ok for e in entries) else EXIT_FAIL
    return code, _render_estimates(entries, args, f.name)


def _single(s, f, x, sweep):
    r = numeric_lab.estimate_limit(s, f, x, **sweep)
    return r.limit, r.converged, (r,)


def _render_estimates(entries, args, fname: str) -> str:
    if args.format == "json":
        return _emit_json({
            "function": fname,
            "x": format_rational(args.x),
            "method": args.stencil or args.method,
            "entries": [{"order": e.order, "value": e.value, "ok": e.ok,
                         "reports": [r.to_json() for r in e.reports]} for e in entries],
        })
    if args.format == "csv":
        if len(entries) == 1 and len(entries[0].reports) == 1:
            return entries[0].reports[0].to_csv()
        rows = [[e.order, r.stencil, *row] for e in entries for r in e.reports for row in r.csv_rows()]
        return _emit_csv(["order", "stencil", "h", "quotient", "gap"], rows)
    lines = [f"function {fname} at x={format_rational(args.x)}"]
    for e in entries:
        value = "n/a" if e.value is None else repr(e.value)
        lines.append(f"order {e.order}: {value} [{'ok' if e.ok else 'FAILED'}]")
        for r in e.reports:
            limit = "n/a" if r.limit is None else repr(r.limit)
            extra = f" limit points {list(r.limit_points)}" if not r.converged and r.limit_points else ""
            lines.append(f"  {r.stencil}: {r.verdict}, limit {limit}{extra}")
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> tuple[int, str]:
    if args.order < 2:
        raise UsageError(f"InvalidOrder: comparison needs order >= 2, got {args.order}")
    c = numeric_lab.compare_methods(args.order)
    data = c.to_json()
    if args.format == "json":
        return EXIT_OK, _emit_json(data)
    mz, sh = data["mz"], data["shifts"]
    rows = [
        ["mz", mz["nodes"], mz["nodes"], mz["span"], mz["abs_sum"], mz["limits"]],
        ["shifts", sh["nodes_per_limit"], sh["distinct_points"], sh["span"], sh["abs_sum_per_limit"], sh["limits"]],
    ]
    header = ["method", "nodes_per_limit", "distinct_points", "span", "abs_sum_per_limit", "limits"]
    if args.format == "csv":
        return EXIT_OK, _emit_csv(header, rows)
    lines = [f"order {args.order}"]
    lines.append(f"  MZ:     {mz['nodes']} nodes {_fmt_set(c.mz_nodes)}, span {mz['span']}, "
                 f"sum|A| {mz['abs_sum']}, 1 limit")
    plural = "limit" if sh["limits"] == 1 else "limits"
    lines.append(f"  shifts: {sh['limits']} {plural} of {sh['nodes_per_limit']} nodes each, "
                 f"{sh['distinct_points']} distinct points {_fmt_set(c.shift_points)}, "
                 f"sum|A| {sh['abs_sum_per_limit']} per limit")
    if c.identical:
        lines.append("  both methods use the same single stencil")
    return EXIT_OK, "\n".join(lines) + "\n"


# -- wiring --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="peanodiff", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def fmt(sp):
        sp.add_argument("--format", choices=("text", "json", "csv"), default="text")

    sp = sub.add_parser("stencil", help="unique stencil on the given nodes")
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--nodes", required=True, help="comma separated rationals, e.g. 0,1,2,4 or -1/2,1/2")
    fmt(sp)
    sp.set_defaults(func=cmd_stencil)

    sp = sub.add_parser("mz", help="Marcinkiewicz-Zygmund difference and its normalization")
    sp.add_argument("n", type=int)
    fmt(sp)
    sp.set_defaults(func=cmd_mz)

    sp = sub.add_parser("derive", help="certificate deriving {0,1,2,4,...,2^(n-1)}")
    sp.add_argument("n", type=int)
    sp.add_argument("--out", help="write the certificate JSON here")
    sp.add_argument("--trace", choices=("grouped", "primitive"), default="grouped")
    fmt(sp)
    sp.set_defaults(func=cmd_derive)

    for name, func, text in (("verify", cmd_verify, "check a certificate step by step"),
                             ("replay", cmd_replay, "lift a certificate to exact stencils")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("cert")
        fmt(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("estimate", help="h-sweep estimates of generalized Riemann / Peano derivatives")
    sp.add_argument("--fn", required=True, help="poly:<expr>, group23, parity:<n>, sgn, x3sin, exp")
    sp.add_argument("--x", type=_rational_arg, default=Fraction(0))
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--method", choices=("mz", "shifts"), default="mz")
    sp.add_argument("--stencil", help="single stencil instead of a profile: forward, symmetric, mz, shift:<j>")
    sp.add_argument("--h0", type=_rational_arg, default=numeric_lab.DEFAULT_H0)
    sp.add_argument("--ratio", type=_rational_arg, default=numeric_lab.DEFAULT_RATIO)
    sp.add_argument("--count", type=int, default=numeric_lab.DEFAULT_COUNT)
    sp.add_argument("--tol", type=float, default=numeric_lab.DEFAULT_TOL)
    sp.add_argument("--mode", choices=numeric_lab.MODES, default="auto")
    fmt(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("compare", help="MZ stencil versus the shift family")
    sp.add_argument("order", type=int)
    fmt(sp)
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code, payload = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(payload)
    if code == EXIT_FAIL:
        print("check failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
