from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import line
from railsched.exact import Status, brute_force
from railsched.generate import random_instance
from railsched.model import Var, build, evaluate_objective, violated
from railsched.penalty import bounded_binary_coefficients, export_qubo, min_penalty_weight, to_penalty_form


def small_models(limit_bits=16, count=40):
    """Seeded models whose penalty form has at most ``limit_bits`` bits."""
    out = []
    for seed in range(400):
        inst = random_instance(seed, max_trains=2, max_stations=3)
        for dm in (1, 2, 3):
            m = build(inst.replace(d_max=dm))
            pm = to_penalty_form(m, 2 * min_penalty_weight(m) + 1)
            if pm.n_bits <= limit_bits and m.binary_vars:
                out.append((m, pm))
                if len(out) == count:
                    return out
    return out


def all_states(n):
    idx = np.arange(2 ** n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.int64)


def energies(pm):
    q, off, scale = pm.integer_form()
    x = all_states(pm.n_bits)
    return x, (np.einsum("ij,jk,ik->i", x, q, x) + off)


@given(st.integers(0, 5000))
def test_encoding_covers_exactly_the_range(span):
    coefs = bounded_binary_coefficients(span)
    assert len(coefs) == (0 if span == 0 else (span).bit_length())
    assert sum(coefs) == span
    if span <= 300:
        reach = {0}
        for c in coefs:
            reach |= {r + c for r in reach}
        assert reach == set(range(span + 1))


def test_weight_must_exceed_p_min():
    m = build(line(2, [("a", "stopping", 0, 1, 0), ("b", "stopping", 0, 1, 1)]))
    p = min_penalty_weight(m)
    assert p > 0
    with pytest.raises(ValueError):
        to_penalty_form(m, p)
    to_penalty_form(m, p + Fraction(1, 100))


def test_constraint_free_model_is_encoded_objective():
    # a single two-station train has only its timetable bound, implied by the window
    m = build(line(2, [("a", "express", 0, 1, 0)], d_max=5, delays={("a", "A0"): 2}))
    pm = to_penalty_form(m, 2)
    assert all(i == k for i, k in pm.quadratic)
    for x in all_states(pm.n_bits):
        deps, _ = pm.decode(x)
        assert pm.energy(list(x)) == evaluate_objective(m, deps)


def _values(pm, row):
    deps, prec = pm.decode(row)
    vals = {Var.t(j, s): t for (j, s), t in deps.items()}
    vals.update(prec)
    return deps, prec, vals


def test_soundness_on_small_models():
    models = small_models()
    assert len(models) >= 30
    for m, pm in models:
        x, e = energies(pm)
        _, _, scale = pm.integer_form()
        ref = brute_force(m)
        any_feasible = False
        for row in x:
            deps, prec, vals = _values(pm, row)
            if not violated(m, vals):
                any_feasible = True
                # some slack setting zeroes the penalty exactly
                assert pm.energy(pm.encode(deps, prec)) == evaluate_objective(m, deps)
        assert any_feasible == (ref.status == Status.OPTIMAL)
        if ref.status == Status.OPTIMAL:
            best = int(e.min())
            assert Fraction(best, scale) == ref.objective
            for row in x[e == best]:
                deps, _, vals = _values(pm, row)
                assert not violated(m, vals)
                assert evaluate_objective(m, deps) == ref.objective


def test_infeasible_states_score_worse_than_feasible():
    for m, pm in small_models(count=15):
        x, e = energies(pm)
        _, _, scale = pm.integer_form()
        feas_obj, infeas_e = [], []
        for row, en in zip(x, e):
            deps, _, vals = _values(pm, row)
            if violated(m, vals):
                infeas_e.append(Fraction(int(en), scale))
            else:
                feas_obj.append(evaluate_objective(m, deps))
        if feas_obj and infeas_e:
            assert min(infeas_e) > max(feas_obj)


def test_qubo_export_format():
    m = build(line(2, [("a", "stopping", 0, 1, 0), ("b", "stopping", 0, 1, 1)], d_max=3))
    pm = to_penalty_form(m, 10)
    text = export_qubo(pm)
    legend = [ln for ln in text.splitlines() if ln.startswith("# ") and ln[2].isdigit()]
    assert len(legend) == pm.n_bits
    triples = [ln.split() for ln in text.splitlines() if not ln.startswith("#")]
    assert len(triples) == len(pm.quadratic)
    for i, k, c in triples:
        assert 0 <= int(i) <= int(k) < pm.n_bits
        Fraction(c)
