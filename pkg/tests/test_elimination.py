import json

import pytest

from golden import GOLDEN
from oracles import good_set_closure
from peanodiff import elimination as el
from peanodiff.errors import InvalidOrder, MalformedCertificate, RowOutOfRange


def stage_rows(d, label):
    return [[list(r) for r in s.rows] for s in d.trace if s.label == label]


@pytest.mark.parametrize("n", sorted(GOLDEN))
def test_golden_arrays(n):
    d = el.derive_geometric(n)
    g = GOLDEN[n]
    assert stage_rows(d, "step1") == [g["step1"]]
    if "step2" in g:
        assert stage_rows(d, "step2") == [g["step2"]]
    if "step3" in g:
        assert stage_rows(d, "step3") == [g["step3"]]
    if "step4" in g:
        assert stage_rows(d, "step4") == g["step4"]
    assert list(d.final) == [0] + [2**k for k in range(n)]
    assert el.verify_derivation(n, d)


def test_n3_is_a_single_elimination():
    d = el.derive_geometric(3)
    assert d.steps == (el.Input(0), el.Input(1), el.Eliminate(0, 1, 3))


def test_n2_is_a_single_input():
    d = el.derive_geometric(2)
    assert d.steps == (el.Input(0),) and d.final == (0, 1, 2)


def test_asterisk_marks_the_power_of_two_row():
    st2 = next(s for s in el.derive_geometric(10).trace if s.label == "step2")
    assert (st2.asterisk, st2.asterisk_row) == (16, 3)


def test_step4_deletion_pattern_n10():
    passes = [s.deleted_top for s in el.derive_geometric(10).trace if s.label == "step4"]
    assert passes == [True, True, False, True, True]


@pytest.mark.parametrize("n", [3, 4])
def test_every_produced_set_lies_in_the_brute_force_closure(n):
    d = el.derive_geometric(n)
    limit = max(max(s) for s in d.produced)
    closure = good_set_closure(n, limit)
    assert all(frozenset(s) in closure for s in d.produced)


@pytest.mark.parametrize("n", range(2, 40))
def test_termination_measure(n):
    # each Step 4 pass lowers the per-row intruder count or the number of rows
    d = el.derive_geometric(n)
    stages = [s for s in d.trace if s.label in ("step3", "step4")]
    for before, after in zip(stages, stages[1:]):
        b = max(len(el.intruders(r)) for r in before.rows)
        a = max(len(el.intruders(r)) for r in after.rows)
        assert a < b or len(after.rows) < len(before.rows)
    assert d.final == el.geometric_set(n)


def test_step3_equalizes_intruder_counts():
    for n in range(4, 33):
        st3 = next(s for s in el.derive_geometric(n).trace if s.label == "step3")
        assert len({len(el.intruders(r)) for r in st3.rows}) == 1


def test_step2_row_closed_form_and_range():
    assert el.step2_row(10, 1) == (0, 1, 2, 4, 6, 8, 10, 12, 14, 16, 18)
    assert el.step2_row(10, 5) == tuple(range(11))
    with pytest.raises(RowOutOfRange):
        el.step2_row(10, 6)
    with pytest.raises(RowOutOfRange):
        el.step2_row(10, 0)


def test_intruder_profile_counts():
    p = el.intruder_profile([(0, 1, 2, 3, 4, 6, 8, 10, 12, 14, 16)], 10)
    assert (p.odd, p.even, p.total, p.eta, p.row_count) == ((1,), (4,), (5,), (4,), 1)


def test_invalid_orders():
    with pytest.raises(InvalidOrder):
        el.derive_geometric(1)
    assert el.verify_derivation(1, el.derive_geometric(2)).rule == "InvalidOrder"


def test_verifier_rejects_bad_intersection():
    d = el.Derivation(4, (el.Input(0), el.Input(2), el.Eliminate(0, 1, 3)), ())
    v = el.verify_derivation(4, d)
    assert not v and v.step == 2 and v.rule == "IntersectionNotN"


def test_verifier_rejects_unshared_node():
    d = el.Derivation(3, (el.Input(0), el.Input(1), el.Eliminate(0, 1, 0)), ())
    v = el.verify_derivation(3, d)
    assert (v.ok, v.step, v.rule) == (False, 2, "NodeNotShared")


@pytest.mark.parametrize(
    "steps, rule",
    [
        ((el.Input(5),), "InputRange"),
        ((el.Input(0), el.Dilate(3)), "BadReference"),
        ((el.Input(0), el.Eliminate(0, 1, 2)), "BadReference"),
        ((), "Empty"),
    ],
)
def test_verifier_rules(steps, rule):
    assert el.verify_derivation(4, el.Derivation(4, steps, ())).rule == rule


def test_verifier_checks_final_claim():
    d = el.derive_geometric(5)
    assert el.verify_derivation(5, d, claimed_final=(0, 1, 2, 4, 8, 16))
    v = el.verify_derivation(5, d, claimed_final=(0, 1, 2, 4, 8, 32))
    assert v.rule == "FinalMismatch"
    assert el.verify_derivation(6, d).rule == "OrderMismatch"


def test_certificate_is_deterministic_and_round_trips():
    for n in (2, 3, 7, 12):
        d = el.derive_geometric(n)
        text = el.dump_certificate(d)
        assert text == el.dump_certificate(el.derive_geometric(n))
        loaded, final = el.load_certificate(text)
        assert loaded.steps == d.steps and final == d.final
        assert el.complete(loaded).produced == d.produced
        assert json.loads(text)["n"] == n


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[]",
        '{"n": 3, "steps": []}',
        '{"n": true, "steps": [], "final": []}',
        '{"n": 3, "steps": [{"op": "flip"}], "final": []}',
        '{"n": 3, "steps": [{"op": "input", "j": 0, "x": 1}], "final": []}',
        '{"n": 3, "steps": [{"op": "input", "j": "0"}], "final": []}',
    ],
)
def test_load_rejects_malformed(text):
    with pytest.raises(MalformedCertificate):
        el.load_certificate(text)


@pytest.mark.parametrize("n", [2, 3, 5, 9])
def test_replay_lands_on_mz(n):
    from peanodiff.stencils import mz_difference

    chain = el.replay_derivation(n, el.derive_geometric(n))
    assert chain[-1] == mz_difference(n)[2]
    assert len(chain) == len(el.derive_geometric(n).steps)


def test_replay_refuses_unverifiable():
    d = el.Derivation(3, (el.Input(0), el.Input(1), el.Eliminate(0, 1, 0)), ())
    with pytest.raises(MalformedCertificate):
        el.replay_derivation(3, d)

