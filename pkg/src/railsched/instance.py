"""Railway rescheduling instances: infrastructure, timetable and disturbances.

Everything is expressed in whole minutes since an instance epoch. An
:class:`Instance` validates itself on construction, so any object of that
type satisfies the referential and temporal invariants listed below.

Routes hold every decision station a train visits, including the one where it
leaves the modelled network or terminates. Departure decisions exist for all
route stations except that last one (see :attr:`Train.decision_stations`).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping

import yaml

SCHEMA_VERSION = 1

CLASS_WEIGHTS: dict[str, Fraction] = {
    "stopping": Fraction(1),
    "intercity": Fraction(3, 2),
    "express": Fraction(7, 4),
    "shunting": Fraction(0),
}

DIRECTIONS = ("both", "forward", "backward")
MOVEMENTS = ("in", "out")


class InstanceError(ValueError):
    """Base class for invalid instance data."""


class SchemaError(InstanceError):
    """A field is missing or has the wrong type."""


class InstanceReferenceError(InstanceError):
    """A train, station or segment reference does not resolve."""


class TemporalError(InstanceError):
    """Scheduled times contradict running or dwell times."""


@dataclass(frozen=True)
class Track:
    id: str
    direction: str = "both"  # forward = endpoints[0] -> endpoints[1]

    def serves(self, forward: bool) -> bool:
        if self.direction == "both":
            return True
        return (self.direction == "forward") == forward


@dataclass(frozen=True)
class Segment:
    """Line between two adjacent decision stations."""

    id: str
    endpoints: tuple[str, str]
    tracks: tuple[Track, ...]
    length: float = 1.0
    headway: int | None = None

    @property
    def single_track(self) -> bool:
        return len(self.tracks) == 1 and self.tracks[0].direction == "both"

    def is_forward(self, s: str, s2: str) -> bool:
        return (s, s2) == self.endpoints

    def tracks_for(self, s: str, s2: str) -> int:
        """Number of tracks usable when travelling from ``s`` to ``s2``."""
        fwd = self.is_forward(s, s2)
        return sum(1 for t in self.tracks if t.serves(fwd))


@dataclass(frozen=True)
class SwitchGroup:
    """Interlocking resource; ``members`` are ``(train, "in" | "out")`` movements."""

    name: str
    members: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Station:
    id: str
    tracks: tuple[str, ...] = ()
    planned_track: Mapping[str, str] = field(default_factory=dict)
    switch_groups: tuple[SwitchGroup, ...] = ()
    depot: bool = False
    switch_time: int = 1


@dataclass(frozen=True)
class Train:
    id: str
    cls: str
    weight: Fraction
    route: tuple[str, ...]

    @property
    def decision_stations(self) -> tuple[str, ...]:
        """Stations with a departure decision (the final route station is excluded)."""
        return self.route[:-1]

    @property
    def legs(self) -> tuple[tuple[str, str], ...]:
        return tuple(zip(self.route[:-1], self.route[1:]))

    def previous(self, s: str) -> str | None:
        i = self.route.index(s)
        return self.route[i - 1] if i > 0 else None

    def next(self, s: str) -> str | None:
        i = self.route.index(s)
        return self.route[i + 1] if i + 1 < len(self.route) else None


@dataclass(frozen=True)
class Turn:
    """Rolling stock of ``train`` terminating at ``station`` continues as ``next_train``."""

    station: str
    train: str
    next_train: str
    minutes: int


@dataclass(frozen=True)
class Timetable:
    sigma: Mapping[tuple[str, str], int]
    passing: Mapping[tuple[str, str, str], int]
    dwell: Mapping[tuple[str, str], int] = field(default_factory=dict)
    headway: Mapping[tuple[str, str, str, str], int] = field(default_factory=dict)
    switch: Mapping[tuple[str, str, str], int] = field(default_factory=dict)
    turns: tuple[Turn, ...] = ()


@dataclass(frozen=True)
class Closure:
    segment: str
    tracks: tuple[str, ...]  # surviving tracks


@dataclass(frozen=True)
class Disturbance:
    delays: Mapping[tuple[str, str], int] = field(default_factory=dict)
    closures: tuple[Closure, ...] = ()

    def is_empty(self) -> bool:
        return not self.delays and not self.closures


@dataclass(frozen=True)
class Instance:
    trains: tuple[Train, ...]
    stations: tuple[Station, ...]
    segments: tuple[Segment, ...]
    timetable: Timetable
    disturbance: Disturbance = field(default_factory=Disturbance)
    d_max: int = 40
    name: str = ""

    def __post_init__(self) -> None:
        _validate(self)

    @cached_property
    def train_by_id(self) -> dict[str, Train]:
        return {t.id: t for t in self.trains}

    @cached_property
    def station_by_id(self) -> dict[str, Station]:
        return {s.id: s for s in self.stations}

    @cached_property
    def segment_by_id(self) -> dict[str, Segment]:
        return {s.id: s for s in self.segments}

    @cached_property
    def train_index(self) -> dict[str, int]:
        return {t.id: i for i, t in enumerate(self.trains)}

    @cached_property
    def _segment_by_ends(self) -> dict[frozenset, Segment]:
        return {frozenset(s.endpoints): s for s in self.segments}

    def segment_between(self, s: str, s2: str) -> Segment:
        return self._segment_by_ends[frozenset((s, s2))]

    def pass_time(self, j: str, s: str, s2: str) -> int:
        return self.timetable.passing[(j, s, s2)]

    def dwell_time(self, j: str, s: str) -> int:
        return self.timetable.dwell.get((j, s), 0)

    def headway_time(self, j: str, jp: str, s: str, s2: str) -> int:
        """Minimal headway for ``jp`` following ``j`` from ``s`` to ``s2``."""
        key = (j, jp, s, s2)
        if key in self.timetable.headway:
            return self.timetable.headway[key]
        seg = self.segment_between(s, s2)
        if seg.headway is None:
            raise SchemaError(f"no headway for {key} and segment {seg.id} has no default")
        return seg.headway

    def switch_time(self, j: str, jp: str, s: str) -> int:
        return self.timetable.switch.get((j, jp, s), self.station_by_id[s].switch_time)

    def canonical(self, a: str, b: str) -> tuple[str, str]:
        """Order a train pair by position in :attr:`trains`."""
        return (a, b) if self.train_index[a] < self.train_index[b] else (b, a)

    def replace(self, **changes: Any) -> "Instance":
        return dataclasses.replace(self, **changes)


def default_weight(cls: str) -> Fraction:
    if cls not in CLASS_WEIGHTS:
        raise SchemaError(f"unknown train class {cls!r}")
    return CLASS_WEIGHTS[cls]


def _require_int(value: Any, what: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{what} must be an integer number of minutes, got {value!r}")
    if value < minimum:
        raise SchemaError(f"{what} must be >= {minimum}, got {value}")
    return value


def _validate(inst: Instance) -> None:
    _require_int(inst.d_max, "d_max", 1)
    for kind, items in (("train", inst.trains), ("station", inst.stations), ("segment", inst.segments)):
        ids = [x.id for x in items]
        if len(set(ids)) != len(ids):
            raise SchemaError(f"duplicate {kind} ids")
    stations = {s.id for s in inst.stations}
    trains = {t.id: t for t in inst.trains}
    ends: set[frozenset] = set()
    for seg in inst.segments:
        if len(seg.endpoints) != 2 or seg.endpoints[0] == seg.endpoints[1]:
            raise SchemaError(f"segment {seg.id} needs two distinct endpoints")
        for s in seg.endpoints:
            if s not in stations:
                raise InstanceReferenceError(f"segment {seg.id} references unknown station {s!r}")
        if frozenset(seg.endpoints) in ends:
            raise SchemaError(f"two segments join {seg.endpoints}")
        ends.add(frozenset(seg.endpoints))
        if not seg.tracks:
            raise SchemaError(f"segment {seg.id} has no tracks")
        for t in seg.tracks:
            if t.direction not in DIRECTIONS:
                raise SchemaError(f"segment {seg.id} track {t.id}: bad direction {t.direction!r}")
        if seg.headway is not None:
            _require_int(seg.headway, f"segment {seg.id} headway")

    tt = inst.timetable
    for tr in inst.trains:
        if tr.weight < 0:
            raise SchemaError(f"train {tr.id} has negative weight")
        if tr.cls not in CLASS_WEIGHTS:
            raise SchemaError(f"train {tr.id}: unknown class {tr.cls!r}")
        if len(tr.route) < 2:
            raise SchemaError(f"train {tr.id} route needs at least two stations")
        if len(set(tr.route)) != len(tr.route):
            raise SchemaError(f"train {tr.id} visits a station twice")
        for s in tr.route:
            if s not in stations:
                raise InstanceReferenceError(f"train {tr.id} routed through unknown station {s!r}")
        for s, s2 in tr.legs:
            if frozenset((s, s2)) not in ends:
                raise InstanceReferenceError(f"train {tr.id}: no segment between {s} and {s2}")
            seg = inst.segment_between(s, s2)
            if seg.tracks_for(s, s2) == 0:
                raise InstanceReferenceError(f"train {tr.id}: segment {seg.id} has no track towards {s2}")
            if (tr.id, s, s2) not in tt.passing:
                raise SchemaError(f"missing pass time for {tr.id} {s}->{s2}")
            _require_int(tt.passing[(tr.id, s, s2)], f"pass time {tr.id} {s}->{s2}")
        for s in tr.decision_stations:
            if (tr.id, s) not in tt.sigma:
                raise SchemaError(f"missing scheduled departure for {tr.id} at {s}")
            _require_int(tt.sigma[(tr.id, s)], f"sigma {tr.id} {s}")
        for k in range(1, len(tr.route) - 1):
            s, s2 = tr.route[k - 1], tr.route[k]
            need = tt.sigma[(tr.id, s)] + tt.passing[(tr.id, s, s2)] + tt.dwell.get((tr.id, s2), 0)
            if tt.sigma[(tr.id, s2)] < need:
                raise TemporalError(
                    f"train {tr.id}: departure {tt.sigma[(tr.id, s2)]} at {s2} precedes "
                    f"earliest possible {need} after leaving {s} at {tt.sigma[(tr.id, s)]}"
                )

    for (j, s), v in tt.sigma.items():
        if j not in trains or s not in trains[j].decision_stations:
            raise InstanceReferenceError(f"sigma entry ({j}, {s}) is not a departure of that train")
    for (j, s, s2) in tt.passing:
        if j not in trains or (s, s2) not in trains[j].legs:
            raise InstanceReferenceError(f"pass entry ({j}, {s}, {s2}) is not a leg of that train")
    for (j, s), v in tt.dwell.items():
        if j not in trains or s not in trains[j].route:
            raise InstanceReferenceError(f"dwell entry ({j}, {s}) does not match a route")
        _require_int(v, f"dwell {j} {s}")
    for (j, jp, s, s2), v in tt.headway.items():
        if j not in trains or jp not in trains or s not in stations or s2 not in stations:
            raise InstanceReferenceError(f"headway entry {(j, jp, s, s2)} references unknown ids")
        _require_int(v, "headway")
    for (j, jp, s), v in tt.switch.items():
        if j not in trains or jp not in trains or s not in stations:
            raise InstanceReferenceError(f"switch entry {(j, jp, s)} references unknown ids")
        _require_int(v, "switch time")
    for turn in tt.turns:
        if turn.station not in stations or turn.train not in trains or turn.next_train not in trains:
            raise InstanceReferenceError(f"turn {turn} references unknown ids")
        if trains[turn.train].route[-1] != turn.station:
            raise InstanceReferenceError(f"turn: {turn.train} does not terminate at {turn.station}")
        if trains[turn.next_train].route[0] != turn.station:
            raise InstanceReferenceError(f"turn: {turn.next_train} does not start at {turn.station}")
        _require_int(turn.minutes, "turn time")

    for st in inst.stations:
        _require_int(st.switch_time, f"station {st.id} switch time")
        for j, track in st.planned_track.items():
            if j not in trains or st.id not in trains[j].route:
                raise InstanceReferenceError(f"station {st.id}: planned track for train {j} not routed here")
            if track not in st.tracks:
                raise InstanceReferenceError(f"station {st.id}: unknown station track {track!r}")
        for g in st.switch_groups:
            for j, kind in g.members:
                if kind not in MOVEMENTS:
                    raise SchemaError(f"switch group {g.name}: bad movement {kind!r}")
                if j not in trains or st.id not in trains[j].route:
                    raise InstanceReferenceError(f"switch group {g.name} at {st.id}: train {j} not routed here")
                route = trains[j].route
                if kind == "in" and route[0] == st.id:
                    raise InstanceReferenceError(f"switch group {g.name}: {j} does not arrive at {st.id}")
                if kind == "out" and route[-1] == st.id:
                    raise InstanceReferenceError(f"switch group {g.name}: {j} does not depart {st.id}")

    dist = inst.disturbance
    for (j, s), v in dist.delays.items():
        if j not in trains or s not in trains[j].decision_stations:
            raise InstanceReferenceError(f"delay ({j}, {s}) is not a departure of that train")
        _require_int(v, f"delay {j} {s}")
    segs = {s.id: s for s in inst.segments}
    for c in dist.closures:
        if c.segment not in segs:
            raise InstanceReferenceError(f"closure references unknown segment {c.segment!r}")
        if not c.tracks:
            raise InstanceError(f"closure of {c.segment} leaves no track")
        known = {t.id for t in segs[c.segment].tracks}
        if not set(c.tracks) <= known:
            raise InstanceReferenceError(f"closure of {c.segment}: unknown tracks {set(c.tracks) - known}")


def _close_segment(seg: Segment, surviving: Iterable[str]) -> Segment:
    keep = set(surviving)
    # Remaining tracks are worked in both directions while the others are closed.
    tracks = tuple(Track(t.id, "both") for t in seg.tracks if t.id in keep)
    return dataclasses.replace(seg, tracks=tracks)


def apply_disturbance(base: Instance, d: Disturbance) -> Instance:
    """Return a copy of ``base`` with ``d`` recorded and closures applied.

    Delays accumulate with any already recorded on ``base``. Surviving tracks of a
    closed segment are switched to bidirectional working, so a double-track
    segment reduced to one track becomes single track.
    """
    if d.is_empty():
        return base
    segs = {s.id: s for s in base.segments}
    for c in d.closures:
        if c.segment not in segs:
            raise InstanceReferenceError(f"closure references unknown segment {c.segment!r}")
        if not c.tracks:
            raise InstanceError(f"closure of {c.segment} leaves no track")
        known = {t.id for t in segs[c.segment].tracks}
        if not set(c.tracks) <= known:
            raise InstanceReferenceError(f"closure of {c.segment}: unknown tracks {set(c.tracks) - known}")
        segs[c.segment] = _close_segment(segs[c.segment], c.tracks)
    delays = dict(base.disturbance.delays)
    for key, v in d.delays.items():
        delays[key] = delays.get(key, 0) + v
    closures = base.disturbance.closures + tuple(c for c in d.closures if c not in base.disturbance.closures)
    return base.replace(
        segments=tuple(segs[s.id] for s in base.segments),
        disturbance=Disturbance(delays=delays, closures=closures),
    )


# ---------------------------------------------------------------------------
# Instance documents (YAML)
# ---------------------------------------------------------------------------


def _get(doc: Mapping, key: str, typ: type | tuple, where: str, default: Any = ...) -> Any:
    if key not in doc:
        if default is ...:
            raise SchemaError(f"{where}: missing field {key!r}")
        return default
    value = doc[key]
    if not isinstance(value, typ):
        raise SchemaError(f"{where}: field {key!r} has wrong type {type(value).__name__}")
    return value


def _rows(value: Any, width: int, where: str) -> list[list]:
    if not isinstance(value, list):
        raise SchemaError(f"{where} must be a list")
    for row in value:
        if not isinstance(row, list) or len(row) != width:
            raise SchemaError(f"{where}: each entry must be a list of {width} values, got {row!r}")
    return [[str(x) for x in row[:-1]] + [row[-1]] for row in value]


def _nested(value: Any, where: str) -> dict[tuple[str, str], Any]:
    if not isinstance(value, dict):
        raise SchemaError(f"{where} must map train -> station -> minutes")
    out = {}
    for j, inner in value.items():
        if not isinstance(inner, dict):
            raise SchemaError(f"{where}[{j}] must map station -> minutes")
        for s, v in inner.items():
            out[(str(j), str(s))] = v
    return out


def _weight(value: Any, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise SchemaError(f"{where}: weight must be a number")
    try:
        return Fraction(str(value))
    except ValueError as exc:
        raise SchemaError(f"{where}: bad weight {value!r}") from exc


def instance_from_dict(doc: Mapping) -> Instance:
    """Build and validate an :class:`Instance` from a parsed document."""
    if not isinstance(doc, Mapping):
        raise SchemaError("instance document must be a mapping")
    version = _get(doc, "schema_version", int, "document")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version}")
    d_max = _get(doc, "d_max", int, "document")

    stations = []
    for i, sd in enumerate(_get(doc, "stations", list, "document")):
        where = f"stations[{i}]"
        if not isinstance(sd, Mapping):
            raise SchemaError(f"{where} must be a mapping")
        groups = []
        for gi, gd in enumerate(_get(sd, "switch_groups", list, where, [])):
            gwhere = f"{where}.switch_groups[{gi}]"
            if not isinstance(gd, Mapping):
                raise SchemaError(f"{gwhere} must be a mapping")
            members = tuple((str(j), str(k)) for j, k in _rows(_get(gd, "members", list, gwhere), 2, gwhere))
            groups.append(SwitchGroup(str(_get(gd, "name", str, gwhere)), members))
        planned = _get(sd, "planned_track", dict, where, {})
        stations.append(
            Station(
                id=str(_get(sd, "id", (str, int), where)),
                tracks=tuple(str(t) for t in _get(sd, "tracks", list, where, [])),
                planned_track={str(k): str(v) for k, v in planned.items()},
                switch_groups=tuple(groups),
                depot=_get(sd, "depot", bool, where, False),
                switch_time=_get(sd, "switch_time", int, where, 1),
            )
        )

    segments = []
    for i, sd in enumerate(_get(doc, "segments", list, "document")):
        where = f"segments[{i}]"
        if not isinstance(sd, Mapping):
            raise SchemaError(f"{where} must be a mapping")
        ends = _get(sd, "endpoints", list, where)
        if len(ends) != 2:
            raise SchemaError(f"{where}: endpoints must list two stations")
        tracks = []
        for ti, td in enumerate(_get(sd, "tracks", list, where)):
            if not isinstance(td, Mapping):
                raise SchemaError(f"{where}.tracks[{ti}] must be a mapping")
            tracks.append(Track(str(_get(td, "id", (str, int), where)), _get(td, "direction", str, where, "both")))
        segments.append(
            Segment(
                id=str(_get(sd, "id", (str, int), where)),
                endpoints=(str(ends[0]), str(ends[1])),
                tracks=tuple(tracks),
                length=float(_get(sd, "length", (int, float), where, 1.0)),
                headway=_get(sd, "headway", int, where, None),
            )
        )

    trains = []
    for i, td in enumerate(_get(doc, "trains", list, "document")):
        where = f"trains[{i}]"
        if not isinstance(td, Mapping):
            raise SchemaError(f"{where} must be a mapping")
        cls = _get(td, "class", str, where, "stopping")
        weight = _weight(td["weight"], where) if "weight" in td else default_weight(cls)
        trains.append(
            Train(
                id=str(_get(td, "id", (str, int), where)),
                cls=cls,
                weight=weight,
                route=tuple(str(s) for s in _get(td, "route", list, where)),
            )
        )

    ttd = _get(doc, "timetable", dict, "document")
    turns = tuple(
        Turn(s, j, jp, v) for s, j, jp, v in _rows(ttd.get("turn", []), 4, "timetable.turn")
    )
    timetable = Timetable(
        sigma=_nested(_get(ttd, "sigma", dict, "timetable"), "timetable.sigma"),
        passing={(j, s, s2): v for j, s, s2, v in _rows(_get(ttd, "pass", list, "timetable"), 4, "timetable.pass")},
        dwell=_nested(ttd.get("dwell", {}), "timetable.dwell"),
        headway={(j, jp, s, s2): v for j, jp, s, s2, v in _rows(ttd.get("headway", []), 5, "timetable.headway")},
        switch={(j, jp, s): v for j, jp, s, v in _rows(ttd.get("switch", []), 4, "timetable.switch")},
        turns=turns,
    )

    dd = doc.get("disturbance") or {}
    if not isinstance(dd, Mapping):
        raise SchemaError("disturbance must be a mapping")
    closures = []
    for i, cd in enumerate(dd.get("closures", []) or []):
        where = f"disturbance.closures[{i}]"
        if not isinstance(cd, Mapping):
            raise SchemaError(f"{where} must be a mapping")
        closures.append(
            Closure(str(_get(cd, "segment", (str, int), where)), tuple(str(t) for t in _get(cd, "tracks", list, where)))
        )
    disturbance = Disturbance(delays=_nested(dd.get("delays", {}) or {}, "disturbance.delays"), closures=tuple(closures))

    base = Instance(
        trains=tuple(trains),
        stations=tuple(stations),
        segments=tuple(segments),
        timetable=timetable,
        d_max=d_max,
        name=str(doc.get("name", "")),
    )
    return apply_disturbance(base, disturbance)


def _weight_out(w: Fraction) -> int | float | str:
    if w.denominator == 1:
        return int(w)
    f = float(w)
    return f if Fraction(str(f)) == w else str(w)


def _nest(flat: Mapping[tuple[str, str], int]) -> dict[str, dict[str, int]]:
    out: dict[str, dict[str, int]] = {}
    for (j, s), v in flat.items():
        out.setdefault(j, {})[s] = v
    return out


def instance_to_dict(inst: Instance) -> dict:
    tt = inst.timetable
    doc: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    if inst.name:
        doc["name"] = inst.name
    doc["d_max"] = inst.d_max
    doc["stations"] = []
    for st in inst.stations:
        sd: dict[str, Any] = {"id": st.id, "tracks": list(st.tracks)}
        if st.depot:
            sd["depot"] = True
        if st.switch_time != 1:
            sd["switch_time"] = st.switch_time
        if st.planned_track:
            sd["planned_track"] = dict(st.planned_track)
        if st.switch_groups:
            sd["switch_groups"] = [{"name": g.name, "members": [list(m) for m in g.members]} for g in st.switch_groups]
        doc["stations"].append(sd)
    doc["segments"] = []
    for seg in inst.segments:
        sd = {
            "id": seg.id,
            "endpoints": list(seg.endpoints),
            "length": seg.length,
            "tracks": [{"id": t.id, "direction": t.direction} for t in seg.tracks],
        }
        if seg.headway is not None:
            sd["headway"] = seg.headway
        doc["segments"].append(sd)
    doc["trains"] = []
    for tr in inst.trains:
        td: dict[str, Any] = {"id": tr.id, "class": tr.cls, "route": list(tr.route)}
        if tr.weight != CLASS_WEIGHTS[tr.cls]:
            td["weight"] = _weight_out(tr.weight)
        doc["trains"].append(td)
    ttd: dict[str, Any] = {
        "sigma": _nest(tt.sigma),
        "pass": [[j, s, s2, v] for (j, s, s2), v in tt.passing.items()],
    }
    if tt.dwell:
        ttd["dwell"] = _nest(tt.dwell)
    if tt.headway:
        ttd["headway"] = [[*k, v] for k, v in tt.headway.items()]
    if tt.switch:
        ttd["switch"] = [[*k, v] for k, v in tt.switch.items()]
    if tt.turns:
        ttd["turn"] = [[t.station, t.train, t.next_train, t.minutes] for t in tt.turns]
    doc["timetable"] = ttd
    dist = inst.disturbance
    doc["disturbance"] = {
        "delays": _nest(dist.delays),
        "closures": [{"segment": c.segment, "tracks": list(c.tracks)} for c in dist.closures],
    }
    return doc


def load_instance(document: str | Path) -> Instance:
    """Parse an instance from YAML text or from a path to a YAML file."""
    if isinstance(document, Path) or (isinstance(document, str) and "\n" not in document and Path(document).exists()):
        document = Path(document).read_text()
    try:
        doc = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        raise SchemaError(f"not a valid YAML document: {exc}") from exc
    return instance_from_dict(doc)


def dump_instance(inst: Instance) -> str:
    return yaml.safe_dump(instance_to_dict(inst), sort_keys=False, default_flow_style=None)


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dump_instance(inst))
