"""Derived quantities: earliest departures, index-set families, big-M constants
and the closed-form model size estimate."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .instance import Instance

Pair = tuple[str, str]
Leg = tuple[str, str]


@dataclass(frozen=True)
class DerivedTimes:
    """Earliest departures ``upsilon`` and the ``[lo, hi]`` departure windows."""

    upsilon: Mapping[tuple[str, str], int]
    window: Mapping[tuple[str, str], tuple[int, int]]
    d_max: int

    def arrival_window(self, inst: Instance, j: str, s: str) -> tuple[int, int] | None:
        prev = inst.train_by_id[j].previous(s)
        if prev is None:
            return None
        lo, hi = self.window[(j, prev)]
        p = inst.pass_time(j, prev, s)
        return lo + p, hi + p


def earliest_departures(inst: Instance) -> DerivedTimes:
    """Propagate initial delays along each route ignoring all other trains.

    At the first station the technically feasible departure is the scheduled one
    plus any delay; downstream it is the previous earliest departure plus running
    and dwell time plus any delay recorded there. ``upsilon`` is the maximum of
    that and the scheduled departure.
    """
    tt = inst.timetable
    delays = inst.disturbance.delays
    ups: dict[tuple[str, str], int] = {}
    win: dict[tuple[str, str], tuple[int, int]] = {}
    for tr in inst.trains:
        prev = None
        for s in tr.decision_stations:
            if prev is None:
                tech = tt.sigma[(tr.id, s)]
            else:
                tech = ups[(tr.id, prev)] + inst.pass_time(tr.id, prev, s) + inst.dwell_time(tr.id, s)
            tech += delays.get((tr.id, s), 0)
            u = max(tt.sigma[(tr.id, s)], tech)
            ups[(tr.id, s)] = u
            win[(tr.id, s)] = (u, u + inst.d_max)
            prev = s
    return DerivedTimes(upsilon=ups, window=win, d_max=inst.d_max)


def big_M(lo_jp: int, hi_jp: int, lo_j: int, hi_j: int, tau: int) -> int:
    """Smallest constant that deactivates ``t(j') >= t(j) + tau`` over the windows.

    ``[lo_jp, hi_jp]`` bounds the left-hand event of train j' and ``[lo_j, hi_j]``
    the right-hand event of train j. With the constant subtracted the constraint
    holds at every window corner, with equality at ``t(j') = lo_jp, t(j) = hi_j``.
    """
    return -lo_jp + hi_j + tau


@dataclass(frozen=True)
class IndexSets:
    """Pair families that drive constraint generation.

    Pairs are stored once, in canonical train order, except for the
    ``switch_out_in`` family whose pairs are ordered by role (departing train
    first, arriving train second). Station-pair keyed families use ``(s, s2)``
    with ``s`` the station whose interlocking is shared and ``s2`` the direction
    the (first) arriving train comes from.
    """

    close_pairs: frozenset[Pair]
    headway_pairs: frozenset[Pair]
    single_pairs: frozenset[Pair]
    common_legs: Mapping[Pair, tuple[Leg, ...]]
    common_single_legs: Mapping[Pair, tuple[Leg, ...]]
    route_legs: Mapping[str, tuple[Leg, ...]]
    track_pairs: Mapping[str, frozenset[Pair]]
    switch_out_pairs: Mapping[str, frozenset[Pair]]
    switch_out_in_pairs: Mapping[Leg, frozenset[Pair]]
    switch_in_noMP_pairs: Mapping[Leg, frozenset[Pair]]
    switch_in_MP_pairs: Mapping[Leg, frozenset[Pair]]
    turn_pairs: Mapping[str, tuple[tuple[str, str, int], ...]] = field(default_factory=dict)

    def families(self) -> dict[str, frozenset[Pair]]:
        """Every pair family flattened to a set of unordered-in-canonical-form pairs."""

        def flat(m: Mapping) -> frozenset[Pair]:
            return frozenset(p for v in m.values() for p in v)

        return {
            "headway": self.headway_pairs,
            "single": self.single_pairs,
            "track": flat(self.track_pairs),
            "switch_out": flat(self.switch_out_pairs),
            "switch_out_in": flat(self.switch_out_in_pairs),
            "switch_in_noMP": flat(self.switch_in_noMP_pairs),
            "switch_in_MP": flat(self.switch_in_MP_pairs),
        }


def _occupancy(inst: Instance, der: DerivedTimes) -> tuple[dict, dict]:
    """Latest-possible occupancy intervals per (train, station) and (train, segment)."""
    at_station: dict[tuple[str, str], tuple[int, int]] = {}
    on_segment: dict[tuple[str, str], tuple[int, int]] = {}
    for tr in inst.trains:
        for s in tr.route:
            spans = []
            if s in tr.decision_stations:
                spans.append(der.window[(tr.id, s)])
            arr = der.arrival_window(inst, tr.id, s)
            if arr is not None:
                spans.append(arr)
            at_station[(tr.id, s)] = (min(a for a, _ in spans), max(b for _, b in spans))
        for s, s2 in tr.legs:
            lo, hi = der.window[(tr.id, s)]
            seg = inst.segment_between(s, s2).id
            on_segment[(tr.id, seg)] = (lo, hi + inst.pass_time(tr.id, s, s2))
    return at_station, on_segment


def _margin(inst: Instance) -> int:
    """Largest separation time any pairwise constraint can demand."""
    values = [0]
    values += [st.switch_time for st in inst.stations]
    values += [seg.headway for seg in inst.segments if seg.headway is not None]
    values += list(inst.timetable.headway.values())
    values += list(inst.timetable.switch.values())
    return max(values)


def _overlap(a: tuple[int, int], b: tuple[int, int], margin: int) -> bool:
    return a[0] <= b[1] + margin and b[0] <= a[1] + margin


def close_pairs(inst: Instance, der: DerivedTimes) -> frozenset[Pair]:
    """Pairs that can meet at a shared station or on a shared segment.

    Occupancy intervals span from the earliest arrival to the latest departure
    allowed by ``d_max``; they are widened by the largest headway or switch time
    so that every pair able to violate a separation constraint is kept.
    """
    at_station, on_segment = _occupancy(inst, der)
    margin = _margin(inst)
    by_station: dict[str, list[str]] = defaultdict(list)
    by_segment: dict[str, list[str]] = defaultdict(list)
    for (j, s) in at_station:
        by_station[s].append(j)
    for (j, g) in on_segment:
        by_segment[g].append(j)
    out: set[Pair] = set()
    for table, groups in ((at_station, by_station), (on_segment, by_segment)):
        for key, trains in groups.items():
            for a_i in range(len(trains)):
                for b_i in range(a_i + 1, len(trains)):
                    a, b = trains[a_i], trains[b_i]
                    if _overlap(table[(a, key)], table[(b, key)], margin):
                        out.add(inst.canonical(a, b))
    return frozenset(out)


def mp_possible(inst: Instance, s_from: str, s: str) -> bool:
    """Whether two trains running ``s_from -> s`` can change order between the stations.

    Consecutive decision stations have no intermediate decision station, so this
    reduces to the segment offering at least two tracks in that direction.
    """
    return inst.segment_between(s_from, s).tracks_for(s_from, s) >= 2


def build_index_sets(inst: Instance, der: DerivedTimes) -> IndexSets:
    close = close_pairs(inst, der)
    trains = inst.train_by_id
    legs = {t.id: set(t.legs) for t in inst.trains}

    headway: set[Pair] = set()
    single: set[Pair] = set()
    common: dict[Pair, tuple[Leg, ...]] = {}
    common_single: dict[Pair, tuple[Leg, ...]] = {}
    for a, b in sorted(close, key=lambda p: (inst.train_index[p[0]], inst.train_index[p[1]])):
        same = tuple(l for l in trains[a].legs if l in legs[b])
        if same:
            headway.add((a, b))
            common[(a, b)] = same
        opposite = tuple(
            (s, s2)
            for s, s2 in trains[a].legs
            if (s2, s) in legs[b] and inst.segment_between(s, s2).single_track
        )
        if opposite:
            single.add((a, b))
            common_single[(a, b)] = opposite

    track: dict[str, set[Pair]] = defaultdict(set)
    for st in inst.stations:
        if st.depot:
            continue
        through = [
            j for j in st.planned_track
            if trains[j].previous(st.id) is not None and trains[j].next(st.id) is not None
        ]
        for i, a in enumerate(through):
            for b in through[i + 1:]:
                p = inst.canonical(a, b)
                if st.planned_track[a] == st.planned_track[b] and p in close:
                    track[st.id].add(p)

    sw_out: dict[str, set[Pair]] = defaultdict(set)
    sw_out_in: dict[Leg, set[Pair]] = defaultdict(set)
    sw_noMP: dict[Leg, set[Pair]] = defaultdict(set)
    sw_MP: dict[Leg, set[Pair]] = defaultdict(set)
    for st in inst.stations:
        s = st.id
        for g in st.switch_groups:
            members = list(dict.fromkeys(g.members))
            for i, (j1, k1) in enumerate(members):
                for j2, k2 in members[i + 1:]:
                    if j1 == j2:
                        continue
                    a, b = inst.canonical(j1, j2)
                    if (a, b) not in close:
                        continue
                    if k1 == "out" and k2 == "out":
                        sw_out[s].add((a, b))
                    elif k1 != k2:
                        dep, arr = (j1, j2) if k1 == "out" else (j2, j1)
                        sw_out_in[(s, trains[arr].previous(s))].add((dep, arr))
                    else:
                        fa, fb = trains[a].previous(s), trains[b].previous(s)
                        if fa == fb and not mp_possible(inst, fa, s):
                            sw_noMP[(s, fa)].add((a, b))
                        else:
                            sw_MP[(s, fa)].add((a, b))

    turns: dict[str, list[tuple[str, str, int]]] = defaultdict(list)
    for t in inst.timetable.turns:
        turns[t.station].append((t.train, t.next_train, t.minutes))

    def freeze(m: Mapping) -> dict:
        return {k: frozenset(v) for k, v in sorted(m.items()) if v}

    return IndexSets(
        close_pairs=close,
        headway_pairs=frozenset(headway),
        single_pairs=frozenset(single),
        common_legs=common,
        common_single_legs=common_single,
        route_legs={t.id: t.legs for t in inst.trains},
        track_pairs=freeze(track),
        switch_out_pairs=freeze(sw_out),
        switch_out_in_pairs=freeze(sw_out_in),
        switch_in_noMP_pairs=freeze(sw_noMP),
        switch_in_MP_pairs=freeze(sw_MP),
        turn_pairs={k: tuple(v) for k, v in turns.items()},
    )


def dump_index_sets(inst: Instance, sets: IndexSets) -> str:
    """Tab-separated listing of every family member, for inspection."""
    rows = ["family\tlocation\ttrain\tother\tdetail"]

    def key(p: Pair) -> tuple[int, int]:
        return inst.train_index[p[0]], inst.train_index[p[1]]

    for a, b in sorted(sets.close_pairs, key=key):
        rows.append(f"close\t-\t{a}\t{b}\t")
    for a, b in sorted(sets.headway_pairs, key=key):
        for s, s2 in sets.common_legs[(a, b)]:
            rows.append(f"headway\t{s}->{s2}\t{a}\t{b}\t")
    for a, b in sorted(sets.single_pairs, key=key):
        for s, s2 in sets.common_single_legs[(a, b)]:
            rows.append(f"single\t{s}->{s2}\t{a}\t{b}\t")
    for name, fam in (
        ("track", sets.track_pairs),
        ("switch_out", sets.switch_out_pairs),
        ("switch_out_in", sets.switch_out_in_pairs),
        ("switch_in_noMP", sets.switch_in_noMP_pairs),
        ("switch_in_MP", sets.switch_in_MP_pairs),
    ):
        for loc, pairs in fam.items():
            where = loc if isinstance(loc, str) else f"{loc[0]}<-{loc[1]}"
            for a, b in sorted(pairs, key=key):
                rows.append(f"{name}\t{where}\t{a}\t{b}\t")
    for s, items in sets.turn_pairs.items():
        for j, jp, tau in items:
            rows.append(f"turn\t{s}\t{j}\t{jp}\t{tau}")
    return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class SizeEstimate:
    t_count: Fraction
    precedence_count: Fraction
    constraint_count: Fraction
    alpha: Fraction
    n_meet: Fraction
    num_trains: int
    num_stations: int
    track_mode: str

    def __str__(self) -> str:
        def show(x: Fraction) -> str:
            return str(x.numerator) if x.denominator == 1 else f"{x} (~{float(x):.1f})"

        return (
            f"mode={self.track_mode} #J={self.num_trains} #S={self.num_stations} "
            f"alpha={self.alpha} N={self.n_meet}\n"
            f"time variables:       {show(self.t_count)}\n"
            f"precedence variables: {show(self.precedence_count)}\n"
            f"constraints:          {show(self.constraint_count)}"
        )


def estimate_size(
    num_trains: int,
    num_stations: int,
    alpha: Fraction | str | float,
    n_meet: Fraction | int,
    track_mode: str,
) -> SizeEstimate:
    """Closed-form variable and constraint counts, in exact rational arithmetic.

    >>> estimate_size(21, 5, Fraction(2, 3), 6, "single").precedence_count
    Fraction(840, 1)
    """
    a = Fraction(alpha) if not isinstance(alpha, str) else Fraction(alpha)
    n = Fraction(n_meet)
    if not 0 < a < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if num_trains <= 0 or num_stations <= 0 or n <= 0:
        raise ValueError("trains, stations and meet count must be positive")
    js = a * num_trains * num_stations
    if track_mode == "double":
        prec, constr = n * js, (6 * n + 2) * js
    elif track_mode == "single":
        prec, constr = 2 * n * js, (8 * n + 2) * js
    else:
        raise ValueError("track_mode must be 'double' or 'single'")
    return SizeEstimate(js, prec, constr, a, n, num_trains, num_stations, track_mode)


def iter_pairs(pairs: Iterable[Pair], inst: Instance) -> list[Pair]:
    return sorted(pairs, key=lambda p: (inst.train_index[p[0]], inst.train_index[p[1]]))
