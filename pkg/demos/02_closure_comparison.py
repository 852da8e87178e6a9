"""Close one track of a double-track section and compare the two solvers.

Run from the repository root:  python3 demos/02_closure_comparison.py
"""
from railsched.anneal import AnnealParams, solve_anneal
from railsched.generate import closure_instance
from railsched.harness import compare_solvers, comparison_csv, delay_stats
from railsched.model import build

inst = closure_instance()
closed = [s.id for s in inst.segments if s.tracks and len(s.tracks) == 1]
print(inst.name, "- single-track segments after the closure:", closed)

params = AnnealParams(budget_s=2.0, realizations=5, seed=0)
row = compare_solvers(inst, exact_budget=30, anneal_params=params)
print(comparison_csv([row]))

# Station means over the five annealing realizations.
sample = solve_anneal(build(inst), params)
rep = delay_stats(inst, sample)
for st, mean in rep.station_means.items():
    print(f"  {st}: mean delay {float(mean):.2f} min")
