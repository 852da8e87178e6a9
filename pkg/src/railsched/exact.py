"""Exact solution by depth-first branch-and-bound over precedence groups.

Each node fixes some groups; the earliest-time schedule under the fixed
groups gives a lower bound because objective weights are nonnegative and
dropping the undecided disjunctions only relaxes the problem. A node whose
earliest schedule already satisfies some orientation of every undecided group
is a leaf: its bound is attained.
"""

from __future__ import annotations

import enum
import itertools
import time
from dataclasses import dataclass

from .model import DecisionModel, Solution
from .schedule import CompiledModel

INF = float("inf")


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TIMEOUT = "timeout"


@dataclass
class SolveResult:
    status: Status
    solution: Solution | None = None
    nodes: int = 0
    wall_time: float = 0.0

    @property
    def objective(self):
        return None if self.solution is None else self.solution.objective_value


class _Search:
    def __init__(self, cm: CompiledModel, deadline: float):
        self.cm = cm
        self.deadline = deadline
        self.best_cost: float = INF
        self.best: tuple[list[int], list[int]] | None = None
        self.nodes = 0
        self.timed_out = False

    def child(self, out, times, g: int, val: int):
        """Add group ``g = val`` edges to ``out`` (copied) and re-propagate."""
        new_out = [list(x) for x in out]
        sources = []
        for u, v, w in self.cm.group_edges[g][val]:
            new_out[u].append((v, w))
            sources.append(u)
        t = self.cm.propagate(new_out, times, sources)
        return new_out, t

    def run(self, out, times, assignment: list[int | None]) -> None:
        if self.timed_out:
            return
        if time.perf_counter() > self.deadline:
            self.timed_out = True
            return
        self.nodes += 1
        cm = self.cm
        cost = cm.cost(times)
        if cost >= self.best_cost:
            return
        conflicts = []
        for g, val in enumerate(assignment):
            if val is None and not cm.satisfiable_values(g, times):
                conflicts.append(g)
        if not conflicts:
            leaf = [val if val is not None else cm.satisfiable_values(g, times)[0] for g, val in enumerate(assignment)]
            self.best_cost = cost
            self.best = (list(times), leaf)
            return

        # Strong-branching lite: the group whose children's bounds differ most.
        choice = None
        for g in conflicts:
            kids = []
            for val in (1, 0):
                o, t = self.child(out, times, g, val)
                kids.append((val, o, t, INF if t is None else cm.cost(t)))
            if kids[0][2] is None and kids[1][2] is None:
                return  # both orientations overflow a window: dead node
            spread = abs(kids[0][3] - kids[1][3])
            if choice is None or spread > choice[0]:
                choice = (spread, g, kids)
            if spread == INF:
                break
        _, g, kids = choice
        kids.sort(key=lambda k: (k[3], -k[0]))
        for val, o, t, c in kids:
            if t is None or c >= self.best_cost:
                continue
            assignment[g] = val
            self.run(o, t, assignment)
            assignment[g] = None
            if self.timed_out:
                return


def solve_exact(model: DecisionModel, budget: float = 60.0, *, compiled: CompiledModel | None = None,
                incumbent: Solution | None = None) -> SolveResult:
    """Minimise the weighted secondary delay exactly, within ``budget`` seconds.

    A feasible ``incumbent`` (for instance an annealing result) only tightens
    pruning; the returned optimum does not depend on it.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    start = time.perf_counter()
    cm = compiled or CompiledModel(model)
    search = _Search(cm, start + budget)
    if incumbent is not None:
        t = cm.times_from(incumbent.departures)
        a = cm.feasible_at(t)
        if a is not None:
            search.best_cost, search.best = cm.cost(t), (t, a)
    out = cm.active_edges([None] * cm.n_groups)
    times = cm.propagate(out)
    if times is not None:
        search.run(out, times, [None] * cm.n_groups)
    wall = time.perf_counter() - start
    sol = None
    if search.best is not None:
        t, a = search.best
        sol = cm.to_solution(t, a, solver="exact", seed=None, wall_time=wall, nodes=search.nodes)
    if search.timed_out:
        return SolveResult(Status.TIMEOUT, sol, search.nodes, wall)
    if sol is None:
        return SolveResult(Status.INFEASIBLE, None, search.nodes, wall)
    return SolveResult(Status.OPTIMAL, sol, search.nodes, wall)


def brute_force(model: DecisionModel, max_groups: int = 20, *, compiled: CompiledModel | None = None) -> SolveResult:
    """Enumerate every group assignment and keep the cheapest feasible decode."""
    start = time.perf_counter()
    cm = compiled or CompiledModel(model)
    if cm.n_groups > max_groups:
        raise ValueError(f"{cm.n_groups} independent binaries exceed the brute-force limit {max_groups}")
    best = None
    count = 0
    for assignment in itertools.product((1, 0), repeat=cm.n_groups):
        count += 1
        d = cm.decode(assignment)
        if d.feasible and (best is None or d.cost < best[0]):
            best = (d.cost, d.times, list(assignment))
    wall = time.perf_counter() - start
    if best is None:
        return SolveResult(Status.INFEASIBLE, None, count, wall)
    return SolveResult(
        Status.OPTIMAL, cm.to_solution(best[1], best[2], solver="brute_force", seed=None, wall_time=wall), count, wall
    )
