from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import line
from railsched.derivation import build_index_sets, earliest_departures
from railsched.exact import solve_exact
from railsched.generate import random_instance
from railsched.model import (
    ModelError,
    Var,
    build,
    build_model,
    evaluate_objective,
    export_lp,
    lp_names,
    violated,
)

highspy = pytest.importorskip("highspy")


def headway_pair():
    return line(2, [("a", "stopping", 0, 1, 0), ("b", "intercity", 0, 1, 3)], delays={("a", "A0"): 2})


def test_single_train_structure():
    inst = line(3, [("a", "stopping", 0, 2, 0)])
    m = build(inst)
    assert set(m.time_vars) == {Var.t("a", "A0"), Var.t("a", "A1")}
    assert not m.binary_vars
    assert m.family_counts() == {"running": 2, "dwell": 1, "timetable": 2}
    assert m.objective == ((Var.t("a", "A1"), Fraction(1, 40)),)


def test_headway_pair_structure():
    m = build(headway_pair())
    assert m.binary_vars == (Var("yout", "a", "b", "A0"),)
    hw = [c for c in m.constraints if c.family == "headway"]
    assert len(hw) == 2
    assert {c.deactivator[1] for c in hw} == {0, 1}


def test_single_track_pair_structure(two_opposite_single):
    m = build(two_opposite_single)
    assert m.binary_vars == (Var("z", "A", "B", "A0", "A1"),)
    assert m.family_counts()["single"] == 2


def test_windows_and_big_m():
    m = build(random_instance(11))
    for v, (lo, hi) in m.time_vars.items():
        assert 0 <= hi - lo <= m.d_max
    for c in m.constraints:
        assert (c.big_m is None) == (c.deactivator is None)
        if c.big_m is not None:
            assert c.big_m >= 0


def test_empty_model_rejected():
    inst = line(2, [("a", "stopping", 0, 1, 0)])
    with pytest.raises(Exception):
        build_model(inst.replace(trains=()), earliest_departures(inst), build_index_sets(inst, earliest_departures(inst)))


def test_evaluate_objective_examples():
    inst = line(3, [("a", "stopping", 0, 2, 0), ("b", "intercity", 0, 2, 30)])
    m = build(inst)
    ups = m.derived.upsilon
    deps = {k: ups[k] for k in ups}
    assert evaluate_objective(m, deps) == 0
    deps[("a", "A1")] += 10
    assert evaluate_objective(m, deps) == Fraction(1, 4)
    deps[("a", "A1")] -= 6
    deps[("b", "A1")] += 8
    assert evaluate_objective(m, deps) == Fraction(4 + 12, 40)
    del deps[("b", "A1")]
    with pytest.raises((KeyError, ModelError)):
        evaluate_objective(m, deps)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 5000), st.integers(0, 2**31))
def test_linear_form_agrees_with_record(seed, pick):
    # big-M folding into the linear form must not change satisfaction on the box
    import random

    m = build(random_instance(seed))
    rng = random.Random(pick)
    values = {v: rng.randint(lo, hi) for v, (lo, hi) in m.time_vars.items()}
    values.update({b: rng.randint(0, 1) for b in m.binary_vars})
    for c in m.constraints:
        if c.defines is not None:
            continue
        terms, rhs = c.linear()
        lhs = sum(k * values[v] for v, k in terms.items())
        ok = lhs == rhs if c.relation == "=" else lhs >= rhs
        assert ok == c.satisfied(values)


def test_deactivated_constraints_hold_on_box():
    for seed in range(30):
        m = build(random_instance(seed))
        for c in m.constraints:
            if c.deactivator is None:
                continue
            b, off = c.deactivator
            (v1, k1), (v2, k2) = c.terms
            (l1, h1), (l2, h2) = m.time_vars[v1], m.time_vars[v2]
            for x1 in (l1, h1):
                for x2 in (l2, h2):
                    assert c.satisfied({v1: x1, v2: x2, b: off})


def test_lp_is_deterministic_and_named():
    m1, m2 = build(random_instance(3)), build(random_instance(3))
    assert export_lp(m1) == export_lp(m2)
    names = lp_names(m1)
    assert len(set(names.values())) == len(names)
    assert all(n.split("_")[0] in ("t", "yout", "yin", "z") for n in names.values())


def test_lp_golden(golden):
    text = export_lp(build(headway_pair()))
    assert text == (golden / "headway_pair.lp").read_text()
    assert text.count(">=") >= 2
    assert "\\ headway" in text


def _highs_objective(text, tmp_path):
    p = tmp_path / "m.lp"
    p.write_text(text)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    assert h.readModel(str(p)) == highspy.HighsStatus.kOk
    h.run()
    return h, h.getInfo().objective_function_value


def test_lp_single_train_round_trip(tmp_path):
    m = build(line(3, [("a", "stopping", 0, 2, 0)], delays={("a", "A0"): 4}))
    h, obj = _highs_objective(export_lp(m), tmp_path)
    assert h.getNumCol() == 2
    assert obj == pytest.approx(0.0)


def test_lp_objective_only_model(tmp_path):
    # two stations, a single train: the only constraint is a timetable bound
    m = build(line(2, [("a", "stopping", 0, 1, 0)]))
    h, obj = _highs_objective(export_lp(m), tmp_path)
    assert obj == pytest.approx(0.0)


@pytest.mark.parametrize("seed", [1, 4, 9, 17, 23, 42])
def test_lp_optimum_matches_exact(seed, tmp_path):
    m = build(random_instance(seed))
    res = solve_exact(m, 30)
    h, obj = _highs_objective(export_lp(m), tmp_path)
    status = h.getModelStatus()
    if res.solution is None:
        assert status == highspy.HighsModelStatus.kInfeasible
    else:
        assert obj == pytest.approx(float(res.objective), abs=1e-6)


def test_violated_reports_records(two_opposite_single):
    m = build(two_opposite_single)
    vals = {Var.t("A", "A0"): 0, Var.t("B", "A1"): 2, m.binary_vars[0]: 1}
    fams = {c.family for c in violated(m, vals)}
    assert fams == {"single"}
