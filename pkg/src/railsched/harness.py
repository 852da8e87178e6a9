"""Feasibility oracle, delay statistics, time-distance diagrams and solver comparison.

The oracle works from the instance data and index sets alone. Arrivals are
recomputed from departures and running times, and each precedence decision is
settled by trying both orders against the realized times, so solutions
produced outside this package (an LP solver, a hand edit) can be checked too.
"""

from __future__ import annotations

import csv
import io
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .derivation import DerivedTimes, IndexSets, build_index_sets, earliest_departures
from .instance import Instance
from .model import DecisionModel, Solution, Var

# ---------------------------------------------------------------------------
# Feasibility oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    family: str
    where: tuple
    lhs: int
    rhs: int

    @property
    def slack(self) -> int:
        return self.lhs - self.rhs

    def astuple(self) -> tuple:
        return (self.family, self.where, self.lhs, self.rhs, self.slack)


@dataclass
class Verdict:
    ok: bool
    violations: list[Violation] = field(default_factory=list)

    def families(self) -> set[str]:
        return {v.family for v in self.violations}


class _Clock:
    """Event times of a solution: departures as given, arrivals recomputed."""

    def __init__(self, inst: Instance, departures: Mapping[tuple[str, str], int]):
        self.inst = inst
        self.dep = departures

    def __call__(self, j: str, s: str, kind: str) -> int:
        if kind == "dep":
            return self.dep[(j, s)]
        prev = self.inst.train_by_id[j].previous(s)
        return self.dep[(j, prev)] + self.inst.pass_time(j, prev, s)


@dataclass(frozen=True)
class _Clause:
    """``a`` first: ``b_in >= a_out + tau_ab``; ``b`` first: ``a_in >= b_out + tau_ba``.

    ``*_out`` is the event that frees the resource, ``*_in`` the event that
    claims it.
    """

    family: str
    where: tuple
    key: tuple
    a_out: tuple
    a_in: tuple
    b_out: tuple
    b_in: tuple
    tau_ab: int
    tau_ba: int

    def check(self, clock: _Clock, a_first: bool) -> Violation | None:
        if a_first:
            lhs, rhs = clock(*self.b_in), clock(*self.a_out) + self.tau_ab
        else:
            lhs, rhs = clock(*self.a_in), clock(*self.b_out) + self.tau_ba
        return None if lhs >= rhs else Violation(self.family, self.where + (("a_first",) if a_first else ("b_first",)), lhs, rhs)

    def realized_a_first(self, clock: _Clock) -> bool:
        return clock(*self.a_in) <= clock(*self.b_in)


def _pairs(pairs: Iterable, inst: Instance):
    return sorted(pairs, key=lambda p: (inst.train_index[p[0]], inst.train_index[p[1]]))


def _clauses(inst: Instance, sets: IndexSets) -> tuple[list[_Clause], list[tuple[tuple, tuple]]]:
    cl: list[_Clause] = []

    def d(j, s):
        return (j, s, "dep")

    def a(j, s):
        return (j, s, "arr")

    for x, y in _pairs(sets.headway_pairs, inst):
        for s, s2 in sets.common_legs[(x, y)]:
            cl.append(_Clause("headway", (x, y, s, s2), ("yout", x, y, s), d(x, s), d(x, s), d(y, s), d(y, s),
                              inst.headway_time(x, y, s, s2), inst.headway_time(y, x, s, s2)))
    for x, y in _pairs(sets.single_pairs, inst):
        for s, s2 in sets.common_single_legs[(x, y)]:
            cl.append(_Clause("single", (x, y, s, s2), ("z", x, y, s, s2), a(x, s2), d(x, s), a(y, s), d(y, s2), 0, 0))
    for s, pairs in sets.track_pairs.items():
        for x, y in _pairs(pairs, inst):
            cl.append(_Clause("track", (x, y, s), ("yout", x, y, s), d(x, s), a(x, s), d(y, s), a(y, s), 0, 0))
    for s, pairs in sets.switch_out_pairs.items():
        for x, y in _pairs(pairs, inst):
            cl.append(_Clause("switch_out", (x, y, s), ("yout", x, y, s), d(x, s), d(x, s), d(y, s), d(y, s),
                              inst.switch_time(x, y, s), inst.switch_time(y, x, s)))
    for (s, s_from), pairs in sets.switch_out_in_pairs.items():
        for dj, aj in _pairs(pairs, inst):
            if inst.train_index[dj] < inst.train_index[aj]:
                x, y, key = dj, aj, ("z", dj, aj, s, s_from)
                ex, ey = d(dj, s), a(aj, s)
            else:
                x, y, key = aj, dj, ("z", aj, dj, s_from, s)
                ex, ey = a(aj, s), d(dj, s)
            cl.append(_Clause("switch_out_in", (dj, aj, s, s_from), key, ex, ex, ey, ey,
                              inst.switch_time(x, y, s), inst.switch_time(y, x, s)))
    for (s, s_from), pairs in sets.switch_in_noMP_pairs.items():
        for x, y in _pairs(pairs, inst):
            cl.append(_Clause("switch_in_noMP", (x, y, s, s_from), ("yout", x, y, s_from), a(x, s), a(x, s),
                              a(y, s), a(y, s), inst.switch_time(x, y, s), inst.switch_time(y, x, s)))
    for (s, s_from), pairs in sets.switch_in_MP_pairs.items():
        for x, y in _pairs(pairs, inst):
            cl.append(_Clause("switch_in_MP", (x, y, s, s_from), ("yin", x, y, s), a(x, s), a(x, s),
                              a(y, s), a(y, s), inst.switch_time(x, y, s), inst.switch_time(y, x, s)))

    # decisions that must agree: no overtaking before a shared station track,
    # and entering a shared station track in the order of leaving it
    links = []
    for x, y in _pairs(sets.headway_pairs, inst):
        for s, s2 in sets.common_legs[(x, y)]:
            if (x, y) in sets.track_pairs.get(s2, ()):
                links.append((("yout", x, y, s), ("yout", x, y, s2)))
    for (s, _), pairs in sets.switch_in_MP_pairs.items():
        for x, y in _pairs(pairs, inst):
            if (x, y) in sets.track_pairs.get(s, ()):
                links.append((("yin", x, y, s), ("yout", x, y, s)))
    return cl, links


def check_feasibility(instance: Instance, derived: DerivedTimes, sets: IndexSets,
                      solution: Solution | Mapping[tuple[str, str], int]) -> Verdict:
    """Check a schedule against every constraint family, recomputed from the instance."""
    deps = solution.departures if isinstance(solution, Solution) else solution
    missing = [(tr.id, s) for tr in instance.trains for s in tr.decision_stations if (tr.id, s) not in deps]
    if missing:
        raise ValueError(f"solution lacks departures for {missing[:5]}")
    clock = _Clock(instance, deps)
    viol: list[Violation] = []
    tt = instance.timetable

    for tr in instance.trains:
        j = tr.id
        for s in tr.decision_stations:
            t = deps[(j, s)]
            if t < tt.sigma[(j, s)]:
                viol.append(Violation("timetable", (j, s), t, tt.sigma[(j, s)]))
            lo, hi = derived.window[(j, s)]
            if t < lo:
                viol.append(Violation("window", (j, s, "lower"), t, lo))
            if t > hi:
                viol.append(Violation("window", (j, s, "upper"), hi, t))
        for s in tr.decision_stations[1:]:
            need = clock(j, s, "arr") + instance.dwell_time(j, s)
            if deps[(j, s)] < need:
                viol.append(Violation("dwell", (j, s), deps[(j, s)], need))
    for s, items in sets.turn_pairs.items():
        for j, jp, tau in items:
            need = clock(j, s, "arr") + tau
            if deps[(jp, s)] < need:
                viol.append(Violation("turn", (j, jp, s), deps[(jp, s)], need))

    clauses, links = _clauses(instance, sets)
    parent: dict[tuple, tuple] = {}

    def find(k):
        parent.setdefault(k, k)
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    keys = {c.key for c in clauses}
    for k1, k2 in links:
        if k1 in keys and k2 in keys:
            parent[find(k1)] = find(k2)
    groups: dict[tuple, list[_Clause]] = defaultdict(list)
    for c in clauses:
        groups[find(c.key)].append(c)
    for members in groups.values():
        if any(all(c.check(clock, o) is None for c in members) for o in (True, False)):
            continue
        realized = members[0].realized_a_first(clock)
        for c in members:
            v = c.check(clock, realized)
            if v is not None:
                viol.append(v)
    return Verdict(not viol, viol)


def check_model_solution(model: DecisionModel, solution: Solution) -> Verdict:
    inst = model.instance
    der = earliest_departures(inst)
    return check_feasibility(inst, der, build_index_sets(inst, der), solution)


# ---------------------------------------------------------------------------
# Delay statistics
# ---------------------------------------------------------------------------


@dataclass
class DelayReport:
    """Secondary delays (departure minus earliest possible departure)."""

    station_means: dict[str, Fraction]
    train_delays: dict[str, Fraction]  # final decision station, mean over realizations
    objective_x_dmax: Fraction  # mean over realizations
    realizations: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["station", "mean_secondary_delay_min"])
        for s, m in self.station_means.items():
            w.writerow([s, f"{float(m):.3f}"])
        w.writerow([])
        w.writerow(["train", "final_secondary_delay_min"])
        for j, m in self.train_delays.items():
            w.writerow([j, f"{float(m):.3f}"])
        w.writerow([])
        w.writerow(["objective_x_dmax", f"{float(self.objective_x_dmax):.4f}"])
        return buf.getvalue()


def delay_stats(instance: Instance, sample, stations: Sequence[str] | None = None) -> DelayReport:
    """Means over trains and realizations; ``sample`` is a SolutionSample or a list of Solutions.

    Delays are measured against the earliest departure, so a train that keeps
    an initial delay without losing further time counts as zero. Shunting
    movements are included in the station means although they carry no
    objective weight.
    """
    sols = list(getattr(sample, "solutions", sample))
    if not sols:
        raise ValueError("empty sample")
    known = {st.id for st in instance.stations}
    if stations is None:
        stations = [st.id for st in instance.stations]
    for s in stations:
        if s not in known:
            raise ValueError(f"unknown station {s!r}")
    ups = earliest_departures(instance).upsilon
    at: dict[str, list[str]] = defaultdict(list)
    for tr in instance.trains:
        for s in tr.decision_stations:
            at[s].append(tr.id)
    means = {}
    for s in stations:
        vals = [Fraction(sol.departures[(j, s)] - ups[(j, s)]) for sol in sols for j in at[s]]
        means[s] = sum(vals, Fraction(0)) / len(vals) if vals else Fraction(0)
    trains = {}
    for tr in instance.trains:
        last = tr.decision_stations[-1]
        vals = [Fraction(sol.departures[(tr.id, last)] - ups[(tr.id, last)]) for sol in sols]
        trains[tr.id] = sum(vals, Fraction(0)) / len(vals)
    obj = Fraction(0)
    for sol in sols:
        for tr in instance.trains:
            last = tr.decision_stations[-1]
            obj += tr.weight * (sol.departures[(tr.id, last)] - ups[(tr.id, last)])
    return DelayReport(means, trains, obj / len(sols), len(sols))


# ---------------------------------------------------------------------------
# Time-distance diagrams
# ---------------------------------------------------------------------------

CO_LOCATED_OFFSET = 0.1


@dataclass(frozen=True)
class Vertex:
    train: str
    path: str  # "scheduled" or "realized"
    station: str
    event: str  # "arr" or "dep"
    time: int
    distance: float


@dataclass
class TimeDistance:
    corridor: tuple[str, ...]
    positions: dict[str, float]
    vertices: list[Vertex]

    def polylines(self) -> dict[tuple[str, str], list[tuple[int, float]]]:
        out: dict[tuple[str, str], list[tuple[int, float]]] = defaultdict(list)
        for v in self.vertices:
            out[(v.train, v.path)].append((v.time, v.distance))
        return dict(out)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["train", "path", "station", "event", "time", "distance"])
        for v in self.vertices:
            w.writerow([v.train, v.path, v.station, v.event, v.time, f"{v.distance:g}"])
        return buf.getvalue()

    def to_svg(self, width: int = 900, height: int = 500) -> str:
        pad = 60
        times = [v.time for v in self.vertices] or [0, 1]
        t0, t1 = min(times), max(times)
        t1 = t1 if t1 > t0 else t0 + 1
        d1 = max(self.positions.values()) or 1.0

        def xy(t, dist):
            return (pad + (t - t0) / (t1 - t0) * (width - 2 * pad),
                    pad + dist / d1 * (height - 2 * pad))

        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            '<rect width="100%" height="100%" fill="white"/>',
        ]
        for s, pos in self.positions.items():
            _, y = xy(t0, pos)
            parts.append(f'<line x1="{pad}" y1="{y:.1f}" x2="{width - pad}" y2="{y:.1f}" stroke="#ccc"/>')
            parts.append(f'<text x="{pad - 6}" y="{y + 4:.1f}" font-size="11" text-anchor="end">{s}</text>')
        for k in range(6):
            t = t0 + (t1 - t0) * k / 5
            x, _ = xy(t, 0)
            parts.append(f'<text x="{x:.1f}" y="{height - pad + 18}" font-size="11" text-anchor="middle">{t:.0f}</text>')
        for (train, path), pts in self.polylines().items():
            coords = " ".join(f"{x:.1f},{y:.1f}" for x, y in (xy(t, d) for t, d in pts))
            if path == "scheduled":
                style = 'stroke="#c0392b" stroke-dasharray="5,4"'
            else:
                style = 'stroke="#27ae60"'
            parts.append(f'<polyline points="{coords}" fill="none" stroke-width="1.5" {style}>'
                         f"<title>{train} {path}</title></polyline>")
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def read_time_distance(text: str) -> TimeDistance:
    rows = list(csv.DictReader(io.StringIO(text)))
    verts = [Vertex(r["train"], r["path"], r["station"], r["event"], int(r["time"]), float(r["distance"]))
             for r in rows]
    positions: dict[str, float] = {}
    for v in verts:
        positions.setdefault(v.station, v.distance)
    corridor = tuple(sorted(positions, key=positions.get))
    return TimeDistance(corridor, dict(sorted(positions.items(), key=lambda kv: kv[1])), verts)


def time_distance(instance: Instance, solution: Solution, corridor: Sequence[str]) -> TimeDistance:
    """Scheduled and realized paths of every train along ``corridor``.

    Consecutive corridor stations must be joined by a segment; a segment of
    zero length is drawn with a small artificial offset so that co-located
    stations remain distinguishable.
    """
    corridor = tuple(corridor)
    if not corridor:
        raise ValueError("empty corridor")
    positions = {corridor[0]: 0.0}
    for s, s2 in zip(corridor, corridor[1:]):
        length = instance.segment_between(s, s2).length
        positions[s2] = positions[s] + (length if length > 0 else CO_LOCATED_OFFSET)
    if not any(s in tr.route for tr in instance.trains for s in corridor):
        raise ValueError("no train visits the corridor")
    sigma = instance.timetable.sigma
    verts = []
    for tr in instance.trains:
        on = [s for s in tr.route if s in positions]
        if len(on) < 2:
            continue
        for path, dep in (("scheduled", sigma), ("realized", solution.departures)):
            clock = _Clock(instance, dep)
            for s in on:
                if tr.previous(s) is not None:
                    verts.append(Vertex(tr.id, path, s, "arr", clock(tr.id, s, "arr"), positions[s]))
                if tr.next(s) is not None:
                    verts.append(Vertex(tr.id, path, s, "dep", dep[(tr.id, s)], positions[s]))
    return TimeDistance(corridor, positions, verts)


# ---------------------------------------------------------------------------
# Solver comparison
# ---------------------------------------------------------------------------

COMPARE_HEADER = (
    "# obj_diff_pct = (exact - anneal) / exact * 100 and time_diff_pct = (exact - anneal) / exact * 100;"
    " positive values favour the annealer; values truncated to one decimal"
)


def _pct(exact, other) -> Fraction | None:
    if exact == 0:
        return Fraction(0) if other == 0 else None
    return (Fraction(exact) - Fraction(other)) / Fraction(exact) * 100


def _trunc1(x: Fraction | None) -> str:
    if x is None:
        return "n/a"
    v = math.trunc(x * 10)
    sign = "-" if v < 0 else ""
    return f"{sign}{abs(v) // 10}.{abs(v) % 10}"


@dataclass
class Comparison:
    instance: str
    d_max: int
    exact_status: str
    exact_obj: Fraction | None  # objective * d_max
    exact_time: float | None
    anneal_obj: Fraction | None  # mean over realizations, objective * d_max
    anneal_time: float | None
    anneal_best: Fraction | None

    @property
    def obj_diff_pct(self) -> Fraction | None:
        if self.exact_obj is None or self.anneal_obj is None:
            return None
        return _pct(self.exact_obj, self.anneal_obj)

    @property
    def time_diff_pct(self) -> Fraction | None:
        if self.exact_time is None or self.anneal_time is None:
            return None
        return _pct(Fraction(self.exact_time), Fraction(self.anneal_time))

    def row(self) -> list[str]:
        def f(x, nd=2):
            return "n/a" if x is None else f"{float(x):.{nd}f}"

        return [self.instance, self.exact_status, f(self.exact_obj), f(self.exact_time, 3),
                f(self.anneal_obj), f(self.anneal_best), f(self.anneal_time, 3),
                _trunc1(self.obj_diff_pct), _trunc1(self.time_diff_pct)]


COMPARE_COLUMNS = ["instance", "exact_status", "exact_obj_x_dmax", "exact_time_s", "anneal_mean_obj_x_dmax",
                   "anneal_best_obj_x_dmax", "anneal_mean_time_s", "obj_diff_pct", "time_diff_pct"]


def comparison_csv(rows: Sequence[Comparison]) -> str:
    buf = io.StringIO()
    buf.write(COMPARE_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARE_COLUMNS)
    for r in rows:
        w.writerow(r.row())
    return buf.getvalue()


def compare_solvers(instance: Instance, exact_budget: float, anneal_params) -> Comparison:
    from .anneal import solve_anneal
    from .exact import Status, solve_exact
    from .model import build

    model = build(instance)
    t = time.perf_counter()
    res = solve_exact(model, exact_budget)
    exact_time = time.perf_counter() - t
    exact_obj = None
    if res.solution is not None and res.status == Status.OPTIMAL:
        exact_obj = res.solution.objective_value * instance.d_max
    sample = solve_anneal(model, anneal_params)
    objs = [o * instance.d_max for o in sample.objectives()]
    return Comparison(
        instance=instance.name or "instance",
        d_max=instance.d_max,
        exact_status=res.status.value,
        exact_obj=exact_obj,
        exact_time=exact_time if exact_obj is not None else None,
        anneal_obj=sum(objs, Fraction(0)) / len(objs) if objs else None,
        anneal_time=sum(sample.wall_times) / len(sample.wall_times),
        anneal_best=min(objs) if objs else None,
    )


# ---------------------------------------------------------------------------
# Solution files
# ---------------------------------------------------------------------------


def format_solution(solution: Solution, instance: Instance | None = None) -> str:
    lines = [f"# objective {solution.objective_value}"]
    if instance is not None:
        order = [(tr.id, s) for tr in instance.trains for s in tr.decision_stations]
    else:
        order = sorted(solution.departures)
    for j, s in order:
        lines.append(f"{j} {s} {solution.departures[(j, s)]}")
    return "\n".join(lines) + "\n"


def write_solution(solution: Solution, path: str | Path, instance: Instance | None = None) -> None:
    Path(path).write_text(format_solution(solution, instance))


def parse_solution(text: str) -> Solution:
    deps: dict[tuple[str, str], int] = {}
    objective = Fraction(0)
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "objective":
                objective = Fraction(parts[1])
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {n}: expected 'train station minutes'")
        deps[(parts[0], parts[1])] = int(parts[2])
    return Solution(deps, {}, objective, {})


def read_solution(path: str | Path) -> Solution:
    return parse_solution(Path(path).read_text())


def solution_precedences(model: DecisionModel, solution: Solution) -> dict[Var, int]:
    """Binary values consistent with a solution's times (empty if none exist)."""
    from .schedule import CompiledModel

    cm = CompiledModel(model)
    a = cm.feasible_at(cm.times_from(solution.departures))
    return {} if a is None else {b: a[cm.group_of[b]] for b in model.binary_vars}
