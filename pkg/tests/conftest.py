from __future__ import annotations

from pathlib import Path

import pytest

from railsched.instance import (
    CLASS_WEIGHTS,
    Disturbance,
    Instance,
    Segment,
    Station,
    SwitchGroup,
    Timetable,
    Track,
    Train,
    apply_disturbance,
)

GOLDEN = Path(__file__).parent / "golden"


def line(
    n_stations: int,
    trains: list[tuple],
    *,
    single: bool | list[bool] = False,
    run: int = 5,
    dwell: int = 1,
    headway: int = 2,
    d_max: int = 40,
    delays: dict | None = None,
    planned: dict | None = None,
    switch_groups: dict | None = None,
    switch_time: int = 1,
    slack: dict | None = None,
) -> Instance:
    """Hand-sized line instance.

    ``trains`` holds ``(id, class, first_index, last_index, start)``; a train
    runs backwards when ``first_index > last_index``. ``slack`` adds extra
    scheduled minutes before departing a station: ``{(train, station): m}``.
    """
    names = [f"A{i}" for i in range(n_stations)]
    kinds = single if isinstance(single, list) else [single] * (n_stations - 1)
    segments = []
    for i in range(n_stations - 1):
        tracks = (Track("1", "both"),) if kinds[i] else (Track("1", "forward"), Track("2", "backward"))
        segments.append(Segment(f"{names[i]}-{names[i + 1]}", (names[i], names[i + 1]), tracks,
                                length=float(run), headway=headway))
    tr_objs, sigma, passing, dw = [], {}, {}, {}
    slack = slack or {}
    for tid, cls, a, b, start in trains:
        step = 1 if b > a else -1
        route = tuple(names[a:b + 1] if step > 0 else names[b:a + 1][::-1])
        tr_objs.append(Train(tid, cls, CLASS_WEIGHTS[cls], route))
        t = start
        for k, s in enumerate(route[:-1]):
            if k > 0:
                t += run + dwell
                dw[(tid, s)] = dwell
            t += slack.get((tid, s), 0)
            sigma[(tid, s)] = t
        for s, s2 in zip(route[:-1], route[1:]):
            passing[(tid, s, s2)] = run
    plan = planned or {}
    groups = switch_groups or {}
    stations = [
        Station(s, tracks=("1", "2"), planned_track=plan.get(s, {}),
                switch_groups=tuple(SwitchGroup(f"g{k}", tuple(m)) for k, m in enumerate(groups.get(s, []))),
                switch_time=switch_time)
        for s in names
    ]
    inst = Instance(tuple(tr_objs), tuple(stations), tuple(segments),
                    Timetable(sigma=sigma, passing=passing, dwell=dw), d_max=d_max, name="hand")
    if delays:
        inst = apply_disturbance(inst, Disturbance(delays=delays))
    return inst


@pytest.fixture
def two_opposite_single():
    """Two trains meeting head-on on one single-track segment; B is forced to wait."""
    return line(2, [("A", "stopping", 0, 1, 0), ("B", "stopping", 1, 0, 2)], single=True)


@pytest.fixture
def golden():
    return GOLDEN
