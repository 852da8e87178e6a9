"""Integer linear rescheduling model.

Departure times are bounded integer variables. Arrivals are never stored: an
arrival is the previous departure plus the running time, so every constraint
that mentions one is written over departures with a constant offset. Each
precedence decision has exactly one binary variable, keyed by the canonical
(instance-order) train pair; the opposite orientation is ``1 - var``.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

from .derivation import DerivedTimes, IndexSets, big_M, iter_pairs
from .instance import Instance

FAMILIES = (
    "running",
    "headway",
    "single",
    "dwell",
    "timetable",
    "track",
    "switch_out",
    "switch_out_in",
    "switch_in_noMP",
    "switch_in_MP",
    "turn",
    "order_link",
)


class ModelError(ValueError):
    pass


class Var(NamedTuple):
    """Model variable. ``kind`` is one of ``t``, ``yout``, ``yin``, ``z``.

    Time variables use ``(t, train, None, station, None)``. For binaries value 1
    means ``j`` uses the resource before ``jp``.
    """

    kind: str
    j: str
    jp: str | None
    s: str
    sp: str | None = None

    @staticmethod
    def t(j: str, s: str) -> "Var":
        return Var("t", j, None, s, None)

    @property
    def is_time(self) -> bool:
        return self.kind == "t"

    def label(self) -> str:
        parts = [self.kind, self.j] + ([self.jp] if self.jp is not None else []) + [self.s]
        if self.sp is not None:
            parts.append(self.sp)
        return "_".join(parts)


class Event(NamedTuple):
    """Departure (``offset == 0``) or arrival (``offset == running time``) of a train."""

    var: Var
    offset: int


@dataclass(frozen=True)
class ConstraintRecord:
    """``sum(terms) (>= | =) rhs``, optionally switched off by a binary.

    With a deactivator ``(b, v)`` the constraint reads
    ``sum(terms) >= rhs - big_m * [b == v]``.
    Records of family ``running`` define an arrival (``defines``) and are
    satisfied by construction.
    """

    family: str
    terms: tuple[tuple[Var, int], ...]
    relation: str
    rhs: int
    big_m: int | None = None
    deactivator: tuple[Var, int] | None = None
    tag: tuple = ()
    defines: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        if (self.big_m is None) != (self.deactivator is None):
            raise ModelError("big_m and deactivator must be given together")

    def lhs(self, values: Mapping[Var, int]) -> int:
        return sum(c * values[v] for v, c in self.terms)

    def active(self, values: Mapping[Var, int]) -> bool:
        if self.deactivator is None:
            return True
        b, off = self.deactivator
        return values[b] != off

    def satisfied(self, values: Mapping[Var, int]) -> bool:
        if self.defines is not None:
            return True
        lhs = self.lhs(values)
        if self.relation == "=":
            return lhs == self.rhs
        rhs = self.rhs
        if self.deactivator is not None and not self.active(values):
            rhs -= self.big_m
        return lhs >= rhs

    def linear(self) -> tuple[dict[Var, int], int]:
        """Terms and right-hand side with the big-M term folded in."""
        terms = dict(self.terms)
        rhs = self.rhs
        if self.deactivator is not None:
            b, off = self.deactivator
            if off == 1:
                terms[b] = terms.get(b, 0) + self.big_m
            else:
                terms[b] = terms.get(b, 0) - self.big_m
                rhs -= self.big_m
        return terms, rhs


@dataclass(frozen=True)
class DecisionModel:
    instance: Instance
    derived: DerivedTimes
    time_vars: Mapping[Var, tuple[int, int]]
    binary_vars: tuple[Var, ...]
    constraints: tuple[ConstraintRecord, ...]
    objective: tuple[tuple[Var, Fraction], ...]
    objective_constant: Fraction
    arrivals: Mapping[tuple[str, str], Event]
    d_max: int

    def family_counts(self) -> dict[str, int]:
        counts: dict[str, int] = defaultdict(int)
        for c in self.constraints:
            counts[c.family] += 1
        return dict(counts)

    def departure(self, j: str, s: str) -> Event:
        return Event(Var.t(j, s), 0)

    def arrival(self, j: str, s: str) -> Event:
        return self.arrivals[(j, s)]


@dataclass
class Solution:
    departures: dict[tuple[str, str], int]
    precedences: dict[Var, int] = field(default_factory=dict)
    objective_value: Fraction = Fraction(0)
    meta: dict = field(default_factory=dict)

    def values(self) -> dict[Var, int]:
        out: dict[Var, int] = {Var.t(j, s): v for (j, s), v in self.departures.items()}
        out.update(self.precedences)
        return out


class _Builder:
    def __init__(self, inst: Instance, der: DerivedTimes):
        self.inst = inst
        self.der = der
        self.time_vars: dict[Var, tuple[int, int]] = {}
        self.arrivals: dict[tuple[str, str], Event] = {}
        self.binaries: dict[Var, None] = {}
        self.constraints: list[ConstraintRecord] = []

    def window(self, e: Event) -> tuple[int, int]:
        lo, hi = self.time_vars[e.var]
        return lo + e.offset, hi + e.offset

    def dep(self, j: str, s: str) -> Event:
        v = Var.t(j, s)
        if v not in self.time_vars:
            raise ModelError(f"internal: no departure variable for {j} at {s}")
        return Event(v, 0)

    def arr(self, j: str, s: str) -> Event:
        if (j, s) not in self.arrivals:
            raise ModelError(f"internal: {j} does not arrive at {s}")
        return self.arrivals[(j, s)]

    def precedes(self, family: str, later: Event, earlier: Event, tau: int, tag: tuple,
                 deactivator: tuple[Var, int] | None = None) -> None:
        """``later >= earlier + tau``, disabled when ``deactivator`` holds."""
        rhs = earlier.offset + tau - later.offset
        terms = ((later.var, 1), (earlier.var, -1))
        if deactivator is None:
            self.constraints.append(ConstraintRecord(family, terms, ">=", rhs, tag=tag))
            return
        lo_l, hi_l = self.window(later)
        lo_e, hi_e = self.window(earlier)
        c = big_M(lo_l, hi_l, lo_e, hi_e, tau)
        self.binaries.setdefault(deactivator[0])
        self.constraints.append(
            ConstraintRecord(family, terms, ">=", rhs, big_m=c, deactivator=deactivator, tag=tag)
        )

    def disjunction(self, family: str, var: Var, a_events: tuple[Event, Event],
                    b_events: tuple[Event, Event], tau_ab: int, tau_ba: int, tag: tuple) -> None:
        """Either ``a`` first (``var == 1``) or ``b`` first (``var == 0``).

        ``a_events``/``b_events`` are (event used when the train goes first,
        event used when it goes second).
        """
        a_first, a_second = a_events
        b_first, b_second = b_events
        self.precedes(family, b_second, a_first, tau_ab, tag + ("a_first",), (var, 0))
        self.precedes(family, a_second, b_first, tau_ba, tag + ("b_first",), (var, 1))


def build_model(inst: Instance, der: DerivedTimes, sets: IndexSets) -> DecisionModel:
    """Assemble variables, all constraint families and the weighted-delay objective."""
    if not inst.trains:
        raise ModelError("empty model: instance has no trains")
    b = _Builder(inst, der)
    for tr in inst.trains:
        for s in tr.decision_stations:
            b.time_vars[Var.t(tr.id, s)] = der.window[(tr.id, s)]
        for s, s2 in tr.legs:
            p = inst.pass_time(tr.id, s, s2)
            b.arrivals[(tr.id, s2)] = Event(Var.t(tr.id, s), p)
            b.constraints.append(
                ConstraintRecord("running", ((Var.t(tr.id, s), 1),), "=", -p, tag=(tr.id, s, s2), defines=(tr.id, s2))
            )

    for tr in inst.trains:
        j = tr.id
        for s in tr.decision_stations[1:]:
            b.precedes("dwell", b.dep(j, s), b.arr(j, s), inst.dwell_time(j, s), (j, s))
        for s in tr.decision_stations:
            b.constraints.append(
                ConstraintRecord("timetable", ((Var.t(j, s), 1),), ">=", inst.timetable.sigma[(j, s)], tag=(j, s))
            )

    for a, bb in iter_pairs(sets.headway_pairs, inst):
        for s, s2 in sets.common_legs[(a, bb)]:
            b.disjunction(
                "headway", Var("yout", a, bb, s),
                (b.dep(a, s), b.dep(a, s)), (b.dep(bb, s), b.dep(bb, s)),
                inst.headway_time(a, bb, s, s2), inst.headway_time(bb, a, s, s2), (a, bb, s, s2),
            )

    for a, bb in iter_pairs(sets.single_pairs, inst):
        for s, s2 in sets.common_single_legs[(a, bb)]:
            # a runs s -> s2, bb runs s2 -> s
            b.disjunction(
                "single", Var("z", a, bb, s, s2),
                (b.arr(a, s2), b.dep(a, s)), (b.arr(bb, s), b.dep(bb, s2)),
                0, 0, (a, bb, s, s2),
            )

    for s, pairs in sets.track_pairs.items():
        for a, bb in iter_pairs(pairs, inst):
            b.disjunction(
                "track", Var("yout", a, bb, s),
                (b.dep(a, s), b.arr(a, s)), (b.dep(bb, s), b.arr(bb, s)),
                0, 0, (a, bb, s),
            )

    for s, pairs in sets.switch_out_pairs.items():
        for a, bb in iter_pairs(pairs, inst):
            b.disjunction(
                "switch_out", Var("yout", a, bb, s),
                (b.dep(a, s), b.dep(a, s)), (b.dep(bb, s), b.dep(bb, s)),
                inst.switch_time(a, bb, s), inst.switch_time(bb, a, s), (a, bb, s),
            )

    for (s, s_from), pairs in sets.switch_out_in_pairs.items():
        for dep_j, arr_j in sorted(pairs, key=lambda p: (inst.train_index[p[0]], inst.train_index[p[1]])):
            if inst.train_index[dep_j] < inst.train_index[arr_j]:
                var = Var("z", dep_j, arr_j, s, s_from)
                a, bb, ea, eb = dep_j, arr_j, b.dep(dep_j, s), b.arr(arr_j, s)
            else:
                var = Var("z", arr_j, dep_j, s_from, s)
                a, bb, ea, eb = arr_j, dep_j, b.arr(arr_j, s), b.dep(dep_j, s)
            b.disjunction(
                "switch_out_in", var, (ea, ea), (eb, eb),
                inst.switch_time(a, bb, s), inst.switch_time(bb, a, s), (dep_j, arr_j, s, s_from),
            )

    for (s, s_from), pairs in sets.switch_in_noMP_pairs.items():
        for a, bb in iter_pairs(pairs, inst):
            b.disjunction(
                "switch_in_noMP", Var("yout", a, bb, s_from),
                (b.arr(a, s), b.arr(a, s)), (b.arr(bb, s), b.arr(bb, s)),
                inst.switch_time(a, bb, s), inst.switch_time(bb, a, s), (a, bb, s, s_from),
            )

    for (s, s_from), pairs in sets.switch_in_MP_pairs.items():
        for a, bb in iter_pairs(pairs, inst):
            b.disjunction(
                "switch_in_MP", Var("yin", a, bb, s),
                (b.arr(a, s), b.arr(a, s)), (b.arr(bb, s), b.arr(bb, s)),
                inst.switch_time(a, bb, s), inst.switch_time(bb, a, s), (a, bb, s, s_from),
            )

    for s, items in sets.turn_pairs.items():
        for j, jp, tau in items:
            b.precedes("turn", b.dep(jp, s), b.arr(j, s), tau, (j, jp, s))

    # Order links: no overtaking where the pair shares a station track downstream,
    # and arrival order equals departure order on a shared station track.
    links: list[tuple[Var, Var, tuple]] = []
    for a, bb in iter_pairs(sets.headway_pairs, inst):
        for s, s2 in sets.common_legs[(a, bb)]:
            if (a, bb) in sets.track_pairs.get(s2, ()):
                links.append((Var("yout", a, bb, s), Var("yout", a, bb, s2), (a, bb, s, s2)))
    for (s, _), pairs in sets.switch_in_MP_pairs.items():
        for a, bb in iter_pairs(pairs, inst):
            if (a, bb) in sets.track_pairs.get(s, ()):
                links.append((Var("yin", a, bb, s), Var("yout", a, bb, s), (a, bb, s)))
    seen = set()
    for v1, v2, tag in links:
        if v1 in b.binaries and v2 in b.binaries and (v1, v2) not in seen:
            seen.add((v1, v2))
            b.constraints.append(ConstraintRecord("order_link", ((v1, 1), (v2, -1)), "=", 0, tag=tag))

    objective = []
    const = Fraction(0)
    for tr in inst.trains:
        if tr.weight == 0:
            continue
        last = tr.decision_stations[-1]
        coef = tr.weight / inst.d_max
        objective.append((Var.t(tr.id, last), coef))
        const -= coef * der.upsilon[(tr.id, last)]

    return DecisionModel(
        instance=inst,
        derived=der,
        time_vars=b.time_vars,
        binary_vars=tuple(b.binaries),
        constraints=tuple(b.constraints),
        objective=tuple(objective),
        objective_constant=const,
        arrivals=b.arrivals,
        d_max=inst.d_max,
    )


def build(inst: Instance) -> DecisionModel:
    """Derive times and index sets, then build the model."""
    from .derivation import build_index_sets, earliest_departures

    der = earliest_departures(inst)
    return build_model(inst, der, build_index_sets(inst, der))


def evaluate_objective(model: DecisionModel, departures: Mapping[tuple[str, str], int]) -> Fraction:
    """Weighted secondary delay at each train's last departure, divided by ``d_max``."""
    missing = [v for v in model.time_vars if (v.j, v.s) not in departures]
    if missing:
        raise ModelError(f"missing departure for {missing[0].j} at {missing[0].s}")
    total = model.objective_constant
    for v, c in model.objective:
        total += c * departures[(v.j, v.s)]
    return total


def violated(model: DecisionModel, values: Mapping[Var, int]) -> list[ConstraintRecord]:
    """Constraint records not satisfied by a full assignment (times and binaries)."""
    return [c for c in model.constraints if not c.satisfied(values)]


# ---------------------------------------------------------------------------
# LP export
# ---------------------------------------------------------------------------

_NAME_OK = re.compile(r"[^A-Za-z0-9_.]")


def lp_names(model: DecisionModel) -> dict[Var, str]:
    """Deterministic LP-safe names: ``t_j_s``, ``yout_j_jp_s``, ``yin_j_jp_s``, ``z_j_jp_s_sp``."""
    names: dict[Var, str] = {}
    used: set[str] = set()
    for v in list(model.time_vars) + list(model.binary_vars):
        base = _NAME_OK.sub("_", v.label())
        name, k = base, 1
        while name in used:
            k += 1
            name = f"{base}__{k}"
        used.add(name)
        names[v] = name
    return names


def _num(x: Fraction | int) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return repr(float(x))


def _expr(terms: Iterable[tuple[str, Fraction | int]]) -> str:
    out = []
    for name, c in terms:
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(Fraction(c))
        coef = "" if mag == 1 else _num(mag) + " "
        out.append(f"{sign} {coef}{name}")
    if not out:
        return "0"
    s = " ".join(out)
    return s[2:] if s.startswith("+ ") else s


def export_lp(model: DecisionModel) -> str:
    """Render the model in LP format (``Minimize`` ... ``End``)."""
    names = lp_names(model)
    lines = [f"\\ rescheduling model {model.instance.name}".rstrip(), f"\\ d_max = {model.d_max}", "Minimize"]
    obj = _expr((names[v], c) for v, c in model.objective)
    const = model.objective_constant
    if const != 0 or obj == "0":
        obj = (obj + (" + " if const >= 0 else " - ") + _num(abs(const))) if obj != "0" else _num(const)
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    counters: dict[str, int] = defaultdict(int)
    for c in model.constraints:
        counters[c.family] += 1
        cname = f"{c.family}_{counters[c.family]}"
        if c.defines is not None:
            (v, _), = c.terms
            j, s = c.defines
            lines.append(f"\\ {c.family}: arrival of {j} at {s} = {names[v]} + {-c.rhs}")
            continue
        terms, rhs = c.linear()
        body = _expr((names[v], k) for v, k in terms.items())
        op = "=" if c.relation == "=" else ">="
        note = f" C={c.big_m}" if c.big_m is not None else ""
        lines.append(f"\\ {c.family} {' '.join(map(str, c.tag))}{note}")
        lines.append(f" {cname}: {body} {op} {_num(rhs)}")
    lines.append("Bounds")
    for v, (lo, hi) in model.time_vars.items():
        lines.append(f" {lo} <= {names[v]} <= {hi}")
    if model.time_vars:
        lines.append("General")
        lines.extend(f" {names[v]}" for v in model.time_vars)
    if model.binary_vars:
        lines.append("Binary")
        lines.extend(f" {names[v]}" for v in model.binary_vars)
    lines.append("End")
    return "\n".join(lines) + "\n"
