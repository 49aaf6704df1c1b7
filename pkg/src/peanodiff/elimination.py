"""Good-set calculus: derive {0,1,2,4,...,2**(n-1)} from the shifted progressions.

A derivation is a certificate made of three primitive moves on sets of n+1
nonnegative integers:

* ``Input(j)``      -> {j, j+1, ..., n+j}, for 0 <= j <= n-2
* ``Dilate(src)``   -> 2 * S
* ``Eliminate(src1, src2, removed)`` -> S | T minus {removed}, legal when
  |S & T| == n and removed lies in S & T

:func:`derive_geometric` runs the four-step row algorithm and records both
the primitive steps and a grouped trace of the intermediate arrays.
:func:`verify_derivation` re-checks a certificate from scratch and
:func:`replay_derivation` lifts it to exact stencil algebra.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence, Union

from . import stencils
from .errors import InvalidOrder, MalformedCertificate, ReplayMismatch, RowOutOfRange
from .stencils import Stencil

NodeSet = tuple[int, ...]


@dataclass(frozen=True)
class Input:
    j: int


@dataclass(frozen=True)
class Dilate:
    src: int


@dataclass(frozen=True)
class Eliminate:
    src1: int
    src2: int
    removed: int


Step = Union[Input, Dilate, Eliminate]


@dataclass(frozen=True)
class Stage:
    """One array of the grouped trace, rows listed top to bottom."""

    label: str
    rows: tuple[NodeSet, ...]
    asterisk: int | None = None
    asterisk_row: int | None = None
    base: NodeSet | None = None
    deleted_top: bool = False


@dataclass(frozen=True)
class Derivation:
    order: int
    steps: tuple[Step, ...]
    produced: tuple[NodeSet, ...]
    trace: tuple[Stage, ...] = field(default=(), compare=False)

    @property
    def final(self) -> NodeSet:
        return self.produced[-1]


@dataclass(frozen=True)
class Verdict:
    ok: bool
    step: int | None = None
    rule: str | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def is_power_of_two(x: int) -> bool:
    return x > 0 and x & (x - 1) == 0


def is_intruder(x: int) -> bool:
    return x != 0 and not is_power_of_two(x)


def intruders(row: Sequence[int]) -> list[int]:
    return [x for x in row if is_intruder(x)]


def geometric_set(n: int) -> NodeSet:
    return tuple(stencils.mz_nodes(n))


def initial_sets(n: int) -> list[NodeSet]:
    if n < 2:
        raise InvalidOrder(f"need n >= 2, got {n}")
    return [tuple(range(j, n + j + 1)) for j in range(n - 1)]


def step2_row(n: int, k: int) -> NodeSet:
    """Closed form of the kth row from the bottom after Step 2."""
    if n < 2:
        raise InvalidOrder(f"need n >= 2, got {n}")
    if not 1 <= k <= n // 2:
        raise RowOutOfRange(f"k must lie in 1..{n // 2} for n={n}, got {k}")
    return tuple(range(0, 2 * k + 1)) + tuple(2 * i for i in range(k + 1, n - k + 1))


def _combine(s: NodeSet, t: NodeSet, removed: int) -> NodeSet:
    return tuple(sorted((set(s) | set(t)) - {removed}))


class _Builder:
    def __init__(self, n: int) -> None:
        self.n = n
        self.steps: list[Step] = []
        self.sets: list[NodeSet] = []

    def _push(self, step: Step, produced: NodeSet) -> int:
        self.steps.append(step)
        self.sets.append(produced)
        return len(self.sets) - 1

    def input(self, j: int) -> int:
        return self._push(Input(j), tuple(range(j, self.n + j + 1)))

    def dilate(self, src: int) -> int:
        return self._push(Dilate(src), tuple(2 * x for x in self.sets[src]))

    def eliminate(self, i1: int, i2: int, removed: int) -> int:
        s, t = self.sets[i1], self.sets[i2]
        common = set(s) & set(t)
        # generator bugs surface here rather than as an unverifiable certificate
        if len(common) != self.n or removed not in common:
            raise AssertionError(f"illegal elimination of {removed} between {s} and {t}")
        lo, hi = sorted((i1, i2))
        return self._push(Eliminate(lo, hi, removed), _combine(s, t, removed))


def _check_array(rows: list[NodeSet], n: int, with_double: bool) -> None:
    for upper, lower in zip(rows, rows[1:]):
        if len(set(upper) & set(lower)) != n:
            raise AssertionError(f"consecutive rows not set for elimination: {upper} / {lower}")
    if with_double and len(rows) > 1:
        doubled = {2 * x for x in rows[0]}
        if len(doubled & set(rows[-1])) != n:
            raise AssertionError("twice the top row and the bottom row are not set for elimination")


def derive_geometric(n: int) -> Derivation:
    if n < 2:
        raise InvalidOrder(f"need n >= 2, got {n}")
    b = _Builder(n)
    trace: list[Stage] = []

    # Step 1
    inputs = [b.input(j) for j in range(n - 1)]
    trace.append(Stage("step1", tuple(b.sets[i] for i in inputs)))

    # Step 2: row e (ending in n+e, even) sheds its e largest odd entries.
    # The first goes against the original row above; the ith against the
    # (i-1)th intermediate of the even row two above.
    partial: dict[tuple[int, int], int] = {}
    even_rows = [e for e in range(n - 1) if (n + e) % 2 == 0]
    for e in even_rows:
        partial[e, 0] = inputs[e]
        for i in range(e):
            partner = inputs[e - 1] if i == 0 else partial[e - 2, i - 1]
            current = b.sets[partial[e, i]]
            odd = max(x for x in current if x % 2 == 1)
            partial[e, i + 1] = b.eliminate(partial[e, i], partner, odd)
    rows = [partial[e, e] for e in even_rows]
    row_sets = [b.sets[r] for r in rows]
    _check_array(row_sets, n, with_double=True)
    star = next(i for i, r in enumerate(row_sets) if is_power_of_two(r[-1]))
    trace.append(Stage("step2", tuple(row_sets), asterisk=row_sets[star][-1], asterisk_row=star))

    # Step 3: cut off the largest intruders above the asterisk row, using it as base
    for r in range(star - 1, -1, -1):
        biggest = max(intruders(b.sets[rows[r]]))
        rows[r] = b.eliminate(rows[r], rows[r + 1], biggest)
    row_sets = [b.sets[r] for r in rows]
    _check_array(row_sets, n, with_double=True)
    trace.append(Stage("step3", tuple(row_sets), asterisk=row_sets[star][-1], asterisk_row=star))

    # Step 4, repeated until a single intruder-free row remains
    while len(rows) > 1 or intruders(b.sets[rows[0]]):
        top = b.sets[rows[0]]
        top_intruders = intruders(top)
        if not top_intruders:
            raise AssertionError(f"top row {top} has no intruder while others remain")
        base = b.dilate(rows[0])
        delete_top = top_intruders[-1] % 2 == 1
        if delete_top:
            rows = rows[1:]
        prev = base
        for r in range(len(rows) - 1, -1, -1):
            biggest = max(intruders(b.sets[rows[r]]))
            rows[r] = b.eliminate(rows[r], prev, biggest)
            prev = rows[r]
        row_sets = [b.sets[r] for r in rows]
        _check_array(row_sets, n, with_double=True)
        trace.append(Stage("step4", tuple(row_sets), base=b.sets[base], deleted_top=delete_top))

    # for n = 2 the only row is an input, and it is the last step produced
    if b.sets[-1] != b.sets[rows[0]]:
        raise AssertionError("final row is not the last produced set")
    return Derivation(n, tuple(b.steps), tuple(b.sets), tuple(trace))


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def verify_derivation(n: int, d: Derivation, claimed_final: Sequence[int] | None = None) -> Verdict:
    """Replay the set operations of ``d`` from scratch and report the first illegal step.

    ``claimed_final`` defaults to ``d.produced[-1]`` when the derivation carries
    produced sets; any recorded produced sets must agree with the recomputed ones.
    """
    if not _is_int(n) or n < 2:
        return Verdict(False, None, "InvalidOrder", f"n must be an integer >= 2, got {n!r}")
    if getattr(d, "order", n) != n:
        return Verdict(False, None, "OrderMismatch", f"derivation is for n={d.order}, not {n}")
    steps = list(getattr(d, "steps", ()) or ())
    recorded = list(getattr(d, "produced", ()) or ())
    sets: list[frozenset[int]] = []
    for idx, step in enumerate(steps):
        if isinstance(step, Input):
            if not _is_int(step.j) or not 0 <= step.j <= n - 2:
                return Verdict(False, idx, "InputRange", f"input j={step.j!r} outside 0..{n - 2}")
            produced = frozenset(range(step.j, step.j + n + 1))
        elif isinstance(step, Dilate):
            if not _is_int(step.src) or not 0 <= step.src < idx:
                return Verdict(False, idx, "BadReference", f"dilate source {step.src!r} is not an earlier step")
            produced = frozenset(2 * x for x in sets[step.src])
        elif isinstance(step, Eliminate):
            for src in (step.src1, step.src2):
                if not _is_int(src) or not 0 <= src < idx:
                    return Verdict(False, idx, "BadReference", f"eliminate source {src!r} is not an earlier step")
            if not _is_int(step.removed):
                return Verdict(False, idx, "Malformed", f"removed element {step.removed!r} is not an integer")
            s, t = sets[step.src1], sets[step.src2]
            common = s & t
            if len(common) != n:
                return Verdict(False, idx, "IntersectionNotN", f"sources share {len(common)} elements, need {n}")
            if step.removed not in common:
                return Verdict(False, idx, "NodeNotShared", f"{step.removed} is not in the intersection")
            produced = (s | t) - {step.removed}
        else:
            return Verdict(False, idx, "Malformed", f"unknown step {step!r}")
        if idx < len(recorded) and frozenset(recorded[idx]) != produced:
            return Verdict(False, idx, "ProducedMismatch", "recorded set differs from the recomputed one")
        sets.append(produced)
    if not sets:
        return Verdict(False, None, "Empty", "derivation has no steps")
    if claimed_final is None and recorded:
        claimed_final = recorded[-1]
    if claimed_final is not None and frozenset(claimed_final) != sets[-1]:
        return Verdict(False, len(sets) - 1, "FinalMismatch", "final set differs from the claimed result")
    return Verdict(True)


def replay_derivation(n: int, d: Derivation) -> list[Stencil]:
    """Map every step to stencil algebra and check it against the Vandermonde solution."""
    verdict = verify_derivation(n, d)
    if not verdict:
        raise MalformedCertificate(f"derivation does not verify: step {verdict.step}: {verdict.rule}")
    base = stencils.forward_riemann(n)
    out: list[Stencil] = []
    for idx, step in enumerate(d.steps):
        if isinstance(step, Input):
            s = stencils.shift(base, step.j)
        elif isinstance(step, Dilate):
            s = stencils.dilate(out[step.src], 2)
        else:
            s = stencils.eliminate(out[step.src1], out[step.src2], step.removed)
        expected = stencils.from_nodes(d.produced[idx], n)
        if s != expected:
            raise ReplayMismatch(f"step {idx}: replayed stencil differs from the Vandermonde solution")
        out.append(s)
    return out


@dataclass(frozen=True)
class IntruderProfile:
    """Per-row intruder counts, rows listed in the order given."""

    odd: tuple[int, ...]
    even: tuple[int, ...]
    total: tuple[int, ...]
    eta: tuple[int, ...]
    row_count: int


def intruder_profile(rows: Sequence[Sequence[int]], n: int) -> IntruderProfile:
    odd, even, total, eta = [], [], [], []
    for row in rows:
        ins = intruders(row)
        odd.append(sum(1 for x in ins if x % 2))
        even.append(sum(1 for x in ins if x % 2 == 0))
        total.append(len(ins))
        eta.append(sum(1 for x in row if x >= 2 and is_power_of_two(x)))
    return IntruderProfile(tuple(odd), tuple(even), tuple(total), tuple(eta), len(rows))


# -- certificate file format -------------------------------------------------


def _step_json(step: Step) -> dict:
    if isinstance(step, Input):
        return {"op": "input", "j": step.j}
    if isinstance(step, Dilate):
        return {"op": "dilate", "src": step.src}
    return {"op": "eliminate", "src1": step.src1, "src2": step.src2, "removed": step.removed}


def dump_certificate(d: Derivation) -> str:
    lines = ["{", f'  "n": {d.order},', '  "steps": [']
    body = [f"    {json.dumps(_step_json(s))}" for s in d.steps]
    lines.append(",\n".join(body)) if body else None
    lines.append("  ],")
    lines.append(f'  "final": {json.dumps(list(d.final))}')
    lines.append("}")
    return "\n".join(lines) + "\n"


_STEP_KEYS = {"input": ("j",), "dilate": ("src",), "eliminate": ("src1", "src2", "removed")}


def load_certificate(text: str) -> tuple[Derivation, NodeSet]:
    """Parse a certificate; returns the derivation (without produced sets) and the claimed final set."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedCertificate(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict) or set(data) != {"n", "steps", "final"}:
        raise MalformedCertificate("certificate must be an object with keys n, steps, final")
    n, raw_steps, final = data["n"], data["steps"], data["final"]
    if not _is_int(n):
        raise MalformedCertificate("n must be an integer")
    if not isinstance(raw_steps, list) or not isinstance(final, list) or not all(_is_int(x) for x in final):
        raise MalformedCertificate("steps must be a list and final a list of integers")
    steps: list[Step] = []
    for i, raw in enumerate(raw_steps):
        if not isinstance(raw, dict) or raw.get("op") not in _STEP_KEYS:
            raise MalformedCertificate(f"step {i}: unknown or missing op")
        keys = _STEP_KEYS[raw["op"]]
        if set(raw) != {"op", *keys} or not all(_is_int(raw[k]) for k in keys):
            raise MalformedCertificate(f"step {i}: expected integer fields {keys}")
        if raw["op"] == "input":
            steps.append(Input(raw["j"]))
        elif raw["op"] == "dilate":
            steps.append(Dilate(raw["src"]))
        else:
            steps.append(Eliminate(raw["src1"], raw["src2"], raw["removed"]))
    return Derivation(n, tuple(steps), ()), tuple(final)


def complete(d: Derivation) -> Derivation:
    """Fill in the produced sets of a parsed, verified certificate."""
    n = d.order
    sets: list[NodeSet] = []
    for step in d.steps:
        if isinstance(step, Input):
            sets.append(tuple(range(step.j, step.j + n + 1)))
        elif isinstance(step, Dilate):
            sets.append(tuple(2 * x for x in sets[step.src]))
        else:
            sets.append(_combine(sets[step.src1], sets[step.src2], step.removed))
    return Derivation(n, d.steps, tuple(sets), d.trace)
