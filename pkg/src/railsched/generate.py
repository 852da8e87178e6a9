"""Seeded scenario generators: cyclic synthetic lines and small random networks.

Timetables are made conflict-free by a priority dispatch: trains are ordered
by nominal start, every precedence is resolved in favour of the earlier train,
and departures are pushed to their earliest feasible times. Because every
cross-train constraint then points from an earlier to a later train, the
resulting constraint graph is acyclic and the dispatch always succeeds; it is
rejected only if some train drifts further than ``max_shift`` from its nominal
path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .instance import (
    CLASS_WEIGHTS,
    Closure,
    Disturbance,
    Instance,
    InstanceError,
    Segment,
    Station,
    SwitchGroup,
    Timetable,
    Track,
    Train,
    Turn,
    apply_disturbance,
)
from .model import build
from .schedule import CompiledModel


class GenerationError(InstanceError):
    """Requested traffic cannot be timetabled within the allowed drift."""


@dataclass(frozen=True)
class TrainSpec:
    direction: int  # +1 runs first -> last station, -1 the reverse
    cls: str = "stopping"
    offset: int = 0  # minutes into each cycle


def _dispatch(draft: Instance, nominal: dict[tuple[str, str], int], max_shift: int | None) -> dict[tuple[str, str], int]:
    model = build(draft)
    cm = CompiledModel(model)
    # all groups = 1 gives the canonical-first (earlier-starting) train priority everywhere
    d = cm.decode([1] * cm.n_groups)
    if not d.feasible:
        raise GenerationError("priority dispatch overflowed the drafting horizon")
    sigma = {(v.j, v.s): d.times[i] for i, v in enumerate(cm.vars)}
    if max_shift is not None:
        worst = max(sigma[k] - nominal[k] for k in sigma)
        if worst > max_shift:
            raise GenerationError(
                f"traffic too dense: a train would be held {worst} min beyond its nominal path "
                f"(allowed {max_shift})"
            )
    return sigma


def _nominal_sigma(trains: Sequence[Train], starts: dict[str, int], passing: dict, dwell: dict) -> dict:
    sigma = {}
    for tr in trains:
        t = starts[tr.id]
        for k, s in enumerate(tr.decision_stations):
            if k > 0:
                prev = tr.route[k - 1]
                t += passing[(tr.id, prev, s)] + dwell.get((tr.id, s), 0)
            sigma[(tr.id, s)] = t
    return sigma


def _timetabled(trains, stations, segments, passing, dwell, starts, d_max, name, turns=(), max_shift=None):
    nominal = _nominal_sigma(trains, starts, passing, dwell)
    horizon = max(nominal.values()) + 10 * len(trains) * (1 + max(passing.values())) + 100
    draft = Instance(
        trains=tuple(trains), stations=tuple(stations), segments=tuple(segments),
        timetable=Timetable(sigma=nominal, passing=passing, dwell=dwell, turns=tuple(turns)),
        d_max=horizon, name=name,
    )
    sigma = _dispatch(draft, nominal, max_shift)
    return draft.replace(timetable=Timetable(sigma=sigma, passing=passing, dwell=dwell, turns=tuple(turns)), d_max=d_max)


def gen_synthetic_line(
    kind: str,
    station_count: int,
    train_specs: Sequence[TrainSpec | tuple],
    cycle: int = 60,
    horizon: int = 180,
    *,
    train_count: int | None = None,
    seed: int = 0,
    d_max: int = 40,
    headway: int = 2,
    max_shift: int | None = None,
) -> Instance:
    """Cyclic timetable on a line of ``station_count`` decision stations.

    ``kind`` is ``double``, ``double_with_closure`` (one mid-line segment left
    with a single bidirectional track) or ``single``. ``train_specs`` lists the
    trains run every ``cycle`` minutes; ``train_count`` keeps only the first
    trains by nominal departure. Running times are fixed per segment, drawn
    from 3..8 minutes; dwell and switch times are 1 minute.
    """
    if kind not in ("double", "double_with_closure", "single"):
        raise ValueError(f"unknown line kind {kind!r}")
    if station_count < 2:
        raise ValueError("a line needs at least two stations")
    if horizon % cycle:
        raise ValueError("horizon must be a multiple of the cycle")
    specs = [s if isinstance(s, TrainSpec) else TrainSpec(*s) for s in train_specs]
    rng = np.random.default_rng(seed)
    names = [f"S{i}" for i in range(station_count)]
    run = [int(x) for x in rng.integers(3, 9, size=station_count - 1)]

    segments = []
    for i in range(station_count - 1):
        if kind == "single":
            tracks = (Track("1", "both"),)
        else:
            tracks = (Track("1", "forward"), Track("2", "backward"))
        segments.append(Segment(f"{names[i]}-{names[i + 1]}", (names[i], names[i + 1]), tracks,
                                length=float(run[i]), headway=headway))

    planned = []
    cycles = horizon // cycle
    for k in range(cycles):
        for n, sp in enumerate(specs):
            planned.append((k * cycle + sp.offset, n, k, sp))
    planned.sort(key=lambda x: (x[0], x[1]))
    if train_count is not None:
        planned = planned[:train_count]

    trains, starts, passing, dwell = [], {}, {}, {}
    for start, n, k, sp in planned:
        route = names if sp.direction > 0 else names[::-1]
        tid = f"{'U' if sp.direction > 0 else 'D'}{k}_{n}"
        trains.append(Train(tid, sp.cls, CLASS_WEIGHTS[sp.cls], tuple(route)))
        starts[tid] = start
        for s, s2 in zip(route[:-1], route[1:]):
            i = min(names.index(s), names.index(s2))
            passing[(tid, s, s2)] = run[i]
        for s in route[1:-1]:
            dwell[(tid, s)] = 1

    stations = []
    for s in names:
        plan = {}
        for tr in trains:
            if tr.route[0] != s and tr.route[-1] != s:
                plan[tr.id] = "1" if tr.route[0] == names[0] else "2"
        stations.append(Station(s, tracks=("1", "2"), planned_track=plan, switch_time=1))

    inst = _timetabled(trains, stations, segments, passing, dwell, starts, d_max,
                       name=f"{kind}-{station_count}x{len(trains)}-seed{seed}", max_shift=max_shift)
    if kind == "double_with_closure":
        mid = segments[(station_count - 1) // 2]
        inst = apply_disturbance(inst, Disturbance(closures=(Closure(mid.id, ("1",)),)))
    return inst


def with_delays(inst: Instance, delays: dict[tuple[str, str], int]) -> Instance:
    return apply_disturbance(inst, Disturbance(delays=delays))


def random_delays(inst: Instance, seed: int, fraction: float = 0.5, max_delay: int = 15) -> Instance:
    """Delay a random subset of trains at their first station."""
    rng = np.random.default_rng(seed)
    delays = {}
    for tr in inst.trains:
        if rng.random() < fraction:
            delays[(tr.id, tr.route[0])] = int(rng.integers(1, max_delay + 1))
    return with_delays(inst, delays) if delays else inst


def random_instance(seed: int, max_trains: int = 4, max_stations: int = 4) -> Instance:
    """Small random network exercising every constraint family.

    A line of 2..``max_stations`` stations with a random mix of single and
    double track, random sub-routes in both directions, station track plans,
    interlocking groups, an occasional turnaround and random initial delays.
    """
    rng = np.random.default_rng(seed)
    n_st = int(rng.integers(2, max_stations + 1))
    n_tr = int(rng.integers(2, max_trains + 1))
    names = [f"S{i}" for i in range(n_st)]
    segments = []
    for i in range(n_st - 1):
        if rng.random() < 0.5:
            tracks = (Track("1", "both"),)
        else:
            tracks = (Track("1", "forward"), Track("2", "backward"))
        segments.append(Segment(f"L{i}", (names[i], names[i + 1]), tracks,
                                length=float(rng.integers(1, 6)), headway=int(rng.integers(1, 4))))
    run = [int(x) for x in rng.integers(2, 7, size=n_st - 1)]

    trains, starts, passing, dwell = [], {}, {}, {}
    specs = []
    for k in range(n_tr):
        a, b = sorted(rng.choice(n_st, size=2, replace=False))
        route = names[a:b + 1]
        if rng.random() < 0.5:
            route = route[::-1]
        cls = str(rng.choice(["stopping", "intercity", "express", "shunting"], p=[0.5, 0.25, 0.15, 0.1]))
        specs.append((int(rng.integers(0, 25)), k, route, cls))
    specs.sort(key=lambda x: (x[0], x[1]))
    for start, k, route, cls in specs:
        tid = f"T{k}"
        trains.append(Train(tid, cls, CLASS_WEIGHTS[cls], tuple(route)))
        starts[tid] = start
        for s, s2 in zip(route[:-1], route[1:]):
            i = min(names.index(s), names.index(s2))
            passing[(tid, s, s2)] = run[i] + int(rng.integers(0, 2))
        for s in route[1:-1]:
            dwell[(tid, s)] = int(rng.integers(0, 3))

    turns = []
    for t1 in trains:
        for t2 in trains:
            if t1.route[-1] == t2.route[0] and starts[t2.id] > starts[t1.id] and rng.random() < 0.4:
                if not any(x.train == t1.id or x.next_train == t2.id for x in turns):
                    turns.append(Turn(t2.route[0], t1.id, t2.id, int(rng.integers(1, 4))))

    stations = []
    for s in names:
        plan, members = {}, []
        for tr in trains:
            if s in tr.route:
                plan[tr.id] = str(rng.choice(["1", "2"]))
                if tr.route[0] != s and rng.random() < 0.5:
                    members.append((tr.id, "in"))
                if tr.route[-1] != s and rng.random() < 0.5:
                    members.append((tr.id, "out"))
        groups = (SwitchGroup("sw", tuple(members)),) if len(members) >= 2 else ()
        stations.append(Station(s, tracks=("1", "2"), planned_track=plan, switch_groups=groups,
                                switch_time=int(rng.integers(0, 3))))

    d_max = int(rng.integers(8, 31))
    inst = _timetabled(trains, stations, segments, passing, dwell, starts, d_max, name=f"random-{seed}", turns=turns)
    delays = {}
    for tr in trains:
        if rng.random() < 0.5:
            delays[(tr.id, tr.route[0])] = int(rng.integers(1, 16))
    return with_delays(inst, delays) if delays else inst


# ---------------------------------------------------------------------------
# Frozen calibration scenarios for the annealer
# ---------------------------------------------------------------------------

CALIBRATION_SEEDS = tuple(range(10))


def calibration_instance(k: int) -> Instance:
    """Scenario ``k`` of the annealer calibration suite (6-10 trains).

    Even ``k`` are single-track lines, odd ``k`` double-track lines with a
    closed mid-line track; trains run every 30 minutes and most of them start
    late, so every scenario has a strictly positive optimum.
    """
    n_trains = 6 + (k % 5)
    kind = "single" if k % 2 == 0 else "double_with_closure"
    specs = [TrainSpec(1, "stopping", 0), TrainSpec(-1, "intercity", 4),
             TrainSpec(1, "express", 11), TrainSpec(-1, "stopping", 17)]
    inst = gen_synthetic_line(kind, 5, specs, cycle=30, horizon=90, train_count=n_trains, seed=100 + k)
    return random_delays(inst, seed=1000 + k, fraction=0.7, max_delay=15).replace(name=f"calibration-{k}")


def closure_instance(seed: int = 7, n_trains: int = 10) -> Instance:
    """A delayed double-track line with a closed mid-line track."""
    specs = [TrainSpec(1, "stopping", 0), TrainSpec(-1, "intercity", 5),
             TrainSpec(1, "express", 17), TrainSpec(-1, "stopping", 29)]
    inst = gen_synthetic_line("double_with_closure", 5, specs, cycle=40, horizon=120,
                              train_count=n_trains, seed=seed)
    return random_delays(inst, seed=seed + 1, fraction=0.7, max_delay=12).replace(name=f"closure-{seed}")


def weights_of(inst: Instance) -> dict[str, Fraction]:
    return {t.id: t.weight for t in inst.trains}
