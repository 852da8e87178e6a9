"""Acceptance gate. Each test prints one PASS/FAIL line for its criterion."""

from __future__ import annotations

import dataclasses
import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from scipy.stats import spearmanr

from conftest import GOLDEN, line
from railsched.anneal import AnnealParams, solve_anneal, sweep_budget
from railsched.derivation import build_index_sets, earliest_departures, estimate_size
from railsched.exact import Status, brute_force, solve_exact
from railsched.generate import TrainSpec, calibration_instance, closure_instance, gen_synthetic_line, random_instance
from railsched.harness import check_feasibility, format_solution, time_distance
from railsched.model import Var, build, evaluate_objective, export_lp, violated
from railsched.penalty import min_penalty_weight, to_penalty_form
from railsched.schedule import CompiledModel


@pytest.fixture
def report(capsys):
    def emit(name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail

    return emit


def oracle(inst, sol):
    der = earliest_departures(inst)
    return check_feasibility(inst, der, build_index_sets(inst, der), sol)


# ---------------------------------------------------------------------------


def test_size_estimator(report):
    e1 = estimate_size(59, 3, Fraction(2, 3), 12, "double")
    e3 = estimate_size(21, 5, Fraction(2, 3), 6, "single")
    ok = (e1.t_count == 118 and abs(e1.constraint_count - 8731) <= 2
          and e3.t_count == 70 and e3.precedence_count == 840 and abs(e3.constraint_count - 3499) <= 2)
    report("size estimator", ok,
           f"line1 t={e1.t_count} constraints={e1.constraint_count} (8731 +-2); "
           f"line3 t={e3.t_count} prec={e3.precedence_count} constraints={e3.constraint_count} (3499 +-2)")


def test_oracle_equivalence(report):
    start = time.perf_counter()
    n, mismatch, feasible = 0, [], 0
    seed = 0
    while n < 120:
        m = build(random_instance(seed, max_trains=4, max_stations=4))
        cm = CompiledModel(m)
        if cm.n_groups <= 20:
            a, b = solve_exact(m, 30, compiled=cm), brute_force(m, 20, compiled=cm)
            if a.status != b.status or a.objective != b.objective:
                mismatch.append(seed)
            feasible += a.solution is not None
            n += 1
        seed += 1
    wall = time.perf_counter() - start
    report("oracle equivalence", not mismatch and wall < 60,
           f"{n} instances ({feasible} feasible), mismatches={mismatch}, {wall:.1f}s (< 60 s)")


def _undisturbed_lines():
    specs1 = [TrainSpec(d, "intercity" if k % 2 else "stopping", 6 * k + (3 if d < 0 else 0))
              for k in range(10) for d in (1, -1)]
    specs3 = [TrainSpec(1, "stopping", 0), TrainSpec(-1, "intercity", 9), TrainSpec(1, "express", 17),
              TrainSpec(-1, "stopping", 26), TrainSpec(1, "intercity", 34), TrainSpec(-1, "express", 43),
              TrainSpec(1, "stopping", 51)]
    yield gen_synthetic_line("double", 3, specs1, train_count=59)
    yield gen_synthetic_line("single", 5, specs3)
    for seed in range(8):
        for kind in ("double", "single"):
            specs = [TrainSpec(1, "stopping", 0), TrainSpec(-1, "express", 7), TrainSpec(1, "intercity", 20)]
            yield gen_synthetic_line(kind, 3 + seed % 4, specs, cycle=30, horizon=90, seed=seed)


def test_zero_delay_soundness(report):
    bad = []
    count = 0
    for inst in _undisturbed_lines():
        count += 1
        res = solve_exact(build(inst), 60)
        at_sigma = oracle(inst, dict(inst.timetable.sigma)).ok
        if res.status != Status.OPTIMAL or res.objective != 0 or not at_sigma:
            bad.append((inst.name, res.status.value, res.objective, at_sigma))
    report("zero-delay soundness", not bad, f"{count} undisturbed lines, optimum exactly 0 and sigma feasible; bad={bad}")


def _binding_perturbations(limit=50):
    """One-minute moves of the later event of binding constraints, with the family expected."""
    fams = ("headway", "single", "track", "switch_out", "switch_out_in", "switch_in_noMP", "switch_in_MP",
            "dwell", "turn", "timetable")
    out = []
    seen_fam: dict[str, int] = {}
    for seed in range(400):
        inst = random_instance(seed)
        m = build(inst)
        res = solve_exact(m, 10)
        if res.solution is None:
            continue
        vals = res.solution.values()
        for c in m.constraints:
            if c.family not in fams or not c.active(vals) or c.lhs(vals) != c.rhs:
                continue
            later = c.terms[0][0]
            deps = dict(res.solution.departures)
            deps[(later.j, later.s)] -= 1
            if seen_fam.get(c.family, 0) >= 12:
                continue
            seen_fam[c.family] = seen_fam.get(c.family, 0) + 1
            out.append((inst, deps, c.family, c.tag))
            break
        if len(out) >= limit:
            break
    return out


def test_two_implementation_feasibility(report):
    checked, failures = 0, []
    for seed in range(60):
        inst = random_instance(seed)
        m = build(inst)
        cm = CompiledModel(m)
        outs = []
        ex = solve_exact(m, 10, compiled=cm)
        if ex.solution is not None:
            outs.append(ex.solution)
        if cm.n_groups <= 16:
            bf = brute_force(m, 16, compiled=cm)
            if bf.solution is not None:
                outs.append(bf.solution)
        outs += solve_anneal(m, AnnealParams(budget_s=0.01, realizations=2, seed=seed, moves_per_second=20_000),
                             compiled=cm).solutions
        for s in outs:
            checked += 1
            if not oracle(inst, s).ok:
                failures.append(("solver", seed, s.meta.get("solver")))
    perturbed = _binding_perturbations()
    for inst, deps, fam, tag in perturbed:
        v = oracle(inst, deps)
        if v.ok or fam not in v.families():
            failures.append(("perturbation", fam, tag, sorted(v.families())))
    fams = sorted({p[2] for p in perturbed})
    ok = not failures and len(perturbed) == 50
    report("two-implementation feasibility", ok,
           f"{checked} solver outputs ok; {len(perturbed)} perturbations over {fams}; failures={failures[:5]}")


def test_big_m_minimality(report):
    rng = random.Random(0)
    records = []
    seed = 0
    while len(records) < 1000:
        m = build(random_instance(seed))
        cands = [c for c in m.constraints if c.deactivator is not None]
        rng.shuffle(cands)
        records += [(m, c) for c in cands[:40]]
        seed += 1
    records = records[:1000]
    bad = []
    for m, c in records:
        b, off = c.deactivator
        (v1, _), (v2, _) = c.terms
        corners = [{v1: x1, v2: x2, b: off} for x1, x2 in product(m.time_vars[v1], m.time_vars[v2])]
        tighter = dataclasses.replace(c, big_m=c.big_m - 1)
        if not all(c.satisfied(x) for x in corners) or all(tighter.satisfied(x) for x in corners):
            bad.append(c.tag)
    report("big-M minimality", not bad, f"{len(records)} constraints from {seed} models; non-minimal or unsound={bad[:5]}")


def test_penalty_soundness(report):
    start = time.perf_counter()
    models = []
    for seed in range(400):
        inst = random_instance(seed, max_trains=2, max_stations=3)
        for dm in (1, 2, 3):
            m = build(inst.replace(d_max=dm))
            pm = to_penalty_form(m, 2 * min_penalty_weight(m) + 1)
            if pm.n_bits <= 16 and m.binary_vars:
                models.append((m, pm))
        if len(models) >= 30:
            break
    bad = []
    for m, pm in models:
        q, off, scale = pm.integer_form()
        n = pm.n_bits
        x = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(np.int64)
        e = np.einsum("ij,jk,ik->i", x, q, x) + off
        ref = brute_force(m)
        best = int(e.min())
        minimizers = x[e == best]
        for row in minimizers:
            deps, prec = pm.decode(row)
            vals = {Var.t(j, s): t for (j, s), t in deps.items()}
            vals.update(prec)
            if ref.status == Status.OPTIMAL and (violated(m, vals) or evaluate_objective(m, deps) != ref.objective):
                bad.append(("minimizer", m.instance.name))
                break
        # every feasible assignment reaches zero penalty
        for row in x[:: max(1, len(x) // 512)]:
            deps, prec = pm.decode(row)
            vals = {Var.t(j, s): t for (j, s), t in deps.items()}
            vals.update(prec)
            if not violated(m, vals) and pm.energy(pm.encode(deps, prec)) != evaluate_objective(m, deps):
                bad.append(("penalty", m.instance.name))
                break
    wall = time.perf_counter() - start
    report("penalty soundness", not bad and wall < 30 and len(models) >= 30,
           f"{len(models)} models <= 16 bits enumerated; failures={bad[:5]}; {wall:.1f}s (< 30 s)")


CAL_SEEDS = 20
CAL_REALIZATIONS = 5
CAL_BUDGET = 5.0


def test_annealer_validity_and_quality(report):
    start = time.perf_counter()
    frozen = {k: Fraction(v) for k, v in json.loads((GOLDEN / "calibration_optima.json").read_text()).items()}
    passed, invalid, returned, detail = 0, 0, 0, []
    for k in range(10):
        inst = calibration_instance(k)
        m = build(inst)
        cm = CompiledModel(m)
        opt = frozen[inst.name]
        assert solve_exact(m, 60, compiled=cm).objective == opt  # fixture still matches the solver

        def run(seed):
            p = AnnealParams(budget_s=CAL_BUDGET, realizations=CAL_REALIZATIONS, seed=seed * CAL_REALIZATIONS)
            return solve_anneal(m, p, compiled=cm)

        with ThreadPoolExecutor(max_workers=CAL_SEEDS) as pool:
            samples = list(pool.map(run, range(CAL_SEEDS)))
        ratios = []
        for s in samples:
            returned += len(s.solutions)
            for sol in s.solutions:
                if not oracle(inst, sol).ok or sol.objective_value < opt:
                    invalid += 1
            ratios.append(s.best.objective_value / opt if s.best is not None else None)
        good = all(r is not None and r <= Fraction(3, 2) for r in ratios)
        passed += good
        worst = max((r for r in ratios if r is not None), default=None)
        detail.append(f"{inst.name}:{float(worst):.2f}" if worst is not None else f"{inst.name}:none")
    wall = time.perf_counter() - start
    expected = 10 * CAL_SEEDS * CAL_REALIZATIONS
    ok = invalid == 0 and returned == expected and passed >= 8 and wall <= 1200
    report("annealer validity and quality", ok,
           f"{returned}/{expected} returned, {invalid} invalid; best-of-5 <= 1.5x optimum for all seeds on "
           f"{passed}/10 instances (worst ratio {', '.join(detail)}); {wall:.0f}s")


def test_budget_sweep_monotonicity(report):
    inst = closure_instance()
    m = build(inst)
    budgets = [2, 5, 10, 20]
    rows = sweep_budget(m, budgets, 5, seed=0)
    means = [r.mean for r in rows]
    rho = spearmanr(budgets, [float(x) for x in means]).statistic
    # a flat curve (every budget already optimal) has no rank correlation
    rho = 0.0 if np.isnan(rho) else float(rho)
    report("budget sweep monotonicity", rho <= 0,
           f"mean best objective x d_max {[float(x * inst.d_max) for x in means]} over budgets {budgets}; "
           f"Spearman rho = {rho:.3f} (<= 0)")


def _golden_outputs():
    inst = line(3, [("a", "stopping", 0, 2, 0), ("b", "intercity", 2, 0, 3)], delays={("b", "A2"): 2})
    sol = solve_exact(build(inst), 10).solution
    opp = line(2, [("A", "stopping", 0, 1, 0), ("B", "stopping", 1, 0, 2)], single=True)
    hw = line(2, [("a", "stopping", 0, 1, 0), ("b", "intercity", 0, 1, 3)], delays={("a", "A0"): 2})
    return {
        "headway_pair.lp": export_lp(build(hw)),
        "two_opposite.sol": format_solution(solve_exact(build(opp), 10).solution, opp),
        "diagram.csv": time_distance(inst, sol, ["A0", "A1", "A2"]).to_csv(),
    }


def test_not_reproducible_substitution(report):
    first, second = _golden_outputs(), _golden_outputs()
    same = all(first[k] == second[k] == (GOLDEN / k).read_text() for k in first)
    report("not reproducible (stated)", same,
           "the absolute objective x d_max values of the published network scenarios and their station delay "
           "means depend on proprietary network data and a proprietary hybrid solver, so they are NOT reproduced; "
           "substituted by the property suites above and byte-identical golden outputs for "
           f"{', '.join(sorted(first))}")
