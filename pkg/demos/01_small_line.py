"""Build and solve a small delayed line, then check the result independently.

Run from the repository root:  python3 demos/01_small_line.py
"""
from railsched.derivation import build_index_sets, earliest_departures
from railsched.exact import solve_exact
from railsched.generate import calibration_instance
from railsched.harness import check_feasibility, format_solution
from railsched.model import build

inst = calibration_instance(2)
print(inst.name, "-", len(inst.trains), "trains,", len(inst.stations), "stations, d_max =", inst.d_max)

# Earliest possible departures after the initial delays propagate.
der = earliest_departures(inst)
late = {k: der.upsilon[k] - inst.timetable.sigma[k] for k in der.upsilon if der.upsilon[k] > inst.timetable.sigma[k]}
print("events pushed late by the initial delays:", len(late))

model = build(inst)
print("model size:", len(model.time_vars), "time vars,", len(model.binary_vars), "binaries,",
      len(model.constraints), "constraints")
print("per family:", model.family_counts())

res = solve_exact(model, budget=30)
print("status:", res.status.value, " objective:", res.objective, " x d_max =", res.objective * inst.d_max)

# The oracle recomputes every clause from the instance, not from the model.
sets = build_index_sets(inst, der)
verdict = check_feasibility(inst, der, sets, res.solution)
print("independent check:", "ok" if verdict.ok else verdict.violations)

print()
print(format_solution(res.solution, inst))
