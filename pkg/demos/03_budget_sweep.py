"""How the annealer improves as its time budget grows.

A fixed number of moves is spent per second of budget, so results do not
depend on machine speed. Takes about 20 s.

Run from the repository root:  python3 demos/03_budget_sweep.py
"""
from railsched.anneal import sweep_budget
from railsched.exact import solve_exact
from railsched.generate import closure_instance
from railsched.model import build

inst = closure_instance()
model = build(inst)
opt = solve_exact(model, 60).objective
print("exact optimum x d_max:", opt * inst.d_max)

rows = sweep_budget(model, [1, 2, 5, 10], realizations_per_budget=5, seed=0)
print("budget  best  mean  wall")
for r in rows:
    print(f"{r.budget:6}  {float(r.best * inst.d_max):4.1f}  {float(r.mean * inst.d_max):4.1f}  {r.mean_wall:4.1f}s")
