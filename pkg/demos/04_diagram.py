"""Draw scheduled (dashed) and rescheduled (solid) paths on a time-distance diagram.

Writes diagram.svg and diagram.csv into the current directory.

Run from the repository root:  python3 demos/04_diagram.py
"""
from pathlib import Path

from railsched.exact import solve_exact
from railsched.generate import calibration_instance
from railsched.harness import time_distance
from railsched.model import build

inst = calibration_instance(1)
sol = solve_exact(build(inst), 30).solution

corridor = [s.id for s in inst.stations]
doc = time_distance(inst, sol, corridor)
Path("diagram.svg").write_text(doc.to_svg())
Path("diagram.csv").write_text(doc.to_csv())

for (train, kind), pts in sorted(doc.polylines().items())[:4]:
    print(train, kind, pts[:3], "...")
print("wrote diagram.svg and diagram.csv")
