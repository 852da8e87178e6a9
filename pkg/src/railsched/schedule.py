"""Difference-constraint view of a :class:`DecisionModel`.

Once every precedence binary is fixed, all remaining constraints have the form
``t[v] >= t[u] + w`` or ``t[v] >= c``. Earliest times then follow from a
longest-path computation, and with nonnegative objective weights the earliest
schedule is optimal for that binary assignment.

Binaries tied by order-link equalities are merged into one *group*; search
procedures branch on groups.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .model import DecisionModel, Solution, Var

Edge = tuple[int, int, int]  # t[v] >= t[u] + w  as (u, v, w)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass
class Decode:
    feasible: bool
    times: list[int]
    cost: int  # scaled objective, see CompiledModel.scale


class CompiledModel:
    """Index-based form of a model used by the exact and annealing solvers."""

    def __init__(self, model: DecisionModel):
        self.model = model
        self.vars: list[Var] = list(model.time_vars)
        self.index = {v: i for i, v in enumerate(self.vars)}
        self.lo = [model.time_vars[v][0] for v in self.vars]
        self.hi = [model.time_vars[v][1] for v in self.vars]

        uf = _UnionFind(model.binary_vars)
        for c in model.constraints:
            if c.family == "order_link":
                (v1, _), (v2, _) = c.terms
                uf.union(v1, v2)
        roots: dict[Var, int] = {}
        self.group_of: dict[Var, int] = {}
        for v in model.binary_vars:
            r = uf.find(v)
            if r not in roots:
                roots[r] = len(roots)
            self.group_of[v] = roots[r]
        self.n_groups = len(roots)
        self.group_members: list[list[Var]] = [[] for _ in range(self.n_groups)]
        for v in model.binary_vars:
            self.group_members[self.group_of[v]].append(v)

        self.static: list[Edge] = []
        # group_edges[g][val] = edges active when group g takes value val
        self.group_edges: list[tuple[list[Edge], list[Edge]]] = [([], []) for _ in range(self.n_groups)]
        for c in model.constraints:
            if c.defines is not None or c.family == "order_link":
                continue
            if len(c.terms) == 1:
                (v, k), = c.terms
                i = self.index[v]
                assert k == 1 and c.relation == ">="
                self.lo[i] = max(self.lo[i], c.rhs)
                continue
            (vl, kl), (vr, kr) = c.terms
            assert kl == 1 and kr == -1
            edge = (self.index[vr], self.index[vl], c.rhs)
            if c.deactivator is None:
                self.static.append(edge)
            else:
                b, off = c.deactivator
                self.group_edges[self.group_of[b]][1 - off].append(edge)

        # Objective scaled to integers: cost = sum(weight_i * t_i) with integer weights.
        denom = lcm(*(Fraction(c).denominator for _, c in model.objective)) if model.objective else 1
        self.scale = denom
        self.obj_idx = [self.index[v] for v, _ in model.objective]
        self.obj_w = [int(Fraction(c) * denom) for _, c in model.objective]
        self.const_scaled = model.objective_constant * denom

        n = len(self.vars)
        self.static_out: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for u, v, w in self.static:
            self.static_out[u].append((v, w))

    # -- evaluation ---------------------------------------------------------

    def cost(self, times: Sequence[int]) -> int:
        return sum(w * times[i] for i, w in zip(self.obj_idx, self.obj_w))

    def objective(self, cost: int) -> Fraction:
        return (cost + self.const_scaled) / self.scale

    def active_edges(self, assignment: Sequence[int | None]) -> list[list[tuple[int, int]]]:
        out = [list(x) for x in self.static_out]
        for g, val in enumerate(assignment):
            if val is None:
                continue
            for u, v, w in self.group_edges[g][val]:
                out[u].append((v, w))
        return out

    def propagate(self, out: list[list[tuple[int, int]]], times: list[int] | None = None,
                  sources: Sequence[int] | None = None) -> list[int] | None:
        """Longest-path earliest times; ``None`` if any window upper bound is exceeded.

        Starts from ``times`` (default: lower bounds) and only re-scans from
        ``sources`` when given. Upper bounds cap the values, so positive cycles
        are detected as window overflow.
        """
        t = list(self.lo) if times is None else list(times)
        hi = self.hi
        queue = deque(range(len(t)) if sources is None else sources)
        queued = [False] * len(t)
        for u in queue:
            queued[u] = True
        while queue:
            u = queue.popleft()
            queued[u] = False
            tu = t[u]
            for v, w in out[u]:
                if tu + w > t[v]:
                    t[v] = tu + w
                    if t[v] > hi[v]:
                        return None
                    if not queued[v]:
                        queued[v] = True
                        queue.append(v)
        return t

    def decode(self, assignment: Sequence[int | None]) -> Decode:
        times = self.propagate(self.active_edges(assignment))
        if times is None:
            return Decode(False, [], 0)
        return Decode(True, times, self.cost(times))

    def group_ok(self, g: int, val: int, times: Sequence[int]) -> bool:
        return all(times[v] >= times[u] + w for u, v, w in self.group_edges[g][val])

    def satisfiable_values(self, g: int, times: Sequence[int]) -> list[int]:
        return [val for val in (1, 0) if self.group_ok(g, val, times)]

    def feasible_at(self, times: Sequence[int]) -> list[int] | None:
        """A group assignment under which ``times`` satisfies the model, if any."""
        if any(not lo <= x <= hi for x, lo, hi in zip(times, self.lo, self.hi)):
            return None
        if any(times[v] < times[u] + w for u, v, w in self.static):
            return None
        out = []
        for g in range(self.n_groups):
            vals = self.satisfiable_values(g, times)
            if not vals:
                return None
            out.append(vals[0])
        return out

    def times_from(self, departures: dict[tuple[str, str], int]) -> list[int]:
        return [departures[(v.j, v.s)] for v in self.vars]

    def to_solution(self, times: Sequence[int], assignment: Sequence[int], **meta) -> Solution:
        deps = {(v.j, v.s): times[i] for i, v in enumerate(self.vars)}
        prec = {b: assignment[self.group_of[b]] for b in self.model.binary_vars}
        return Solution(deps, prec, self.objective(self.cost(times)), dict(meta))
