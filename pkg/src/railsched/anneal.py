"""Simulated annealing over precedence groups, run as independent realizations.

Each realization performs a fixed number of moves, ``budget_s *
moves_per_second``, and then waits until ``budget_s`` seconds have passed. A
fixed move count keeps results reproducible for a given seed regardless of
machine load. A larger budget extends the same trajectory, so the best
objective never gets worse as the budget grows.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import mean
from typing import Sequence

import numpy as np

from .model import DecisionModel, Solution
from .schedule import CompiledModel

INF = float("inf")
PROBE_MOVES = 100
PROBE_ACCEPTANCE = 0.8


@dataclass(frozen=True)
class AnnealParams:
    budget_s: float = 5.0
    realizations: int = 5
    seed: int = 0
    initial_temperature: float | None = None  # None: calibrate on a probe
    cooling: float = 0.97
    steps_per_temperature: int = 4
    final_temperature_ratio: float = 1e-3
    restart: str = "best"  # reheat from the best state, or "dive" for a fresh start
    moves_per_second: int = 200
    on_qubo: bool = False
    parallel: bool = True

    def __post_init__(self):
        if not self.budget_s > 0:
            raise ValueError("budget_s must be positive")
        if self.realizations < 1:
            raise ValueError("realizations must be at least 1")
        if not 0 < self.cooling < 1:
            raise ValueError("cooling must lie in (0, 1)")
        if self.steps_per_temperature < 1 or self.moves_per_second < 1:
            raise ValueError("steps_per_temperature and moves_per_second must be positive")
        if self.restart not in ("best", "dive"):
            raise ValueError(f"unknown restart policy {self.restart!r}")

    @property
    def moves(self) -> int:
        return max(1, math.ceil(self.budget_s * self.moves_per_second))


@dataclass
class SolutionSample:
    """Feasible realizations (sorted by realization index) plus bookkeeping."""

    solutions: list[Solution]
    wall_times: list[float]
    discarded: list[int] = field(default_factory=list)
    params: AnnealParams | None = None

    @property
    def infeasible_evidence(self) -> bool:
        """No realization found a feasible schedule (not a proof of infeasibility)."""
        return not self.solutions

    @property
    def best_index(self) -> int | None:
        if not self.solutions:
            return None
        return min(range(len(self.solutions)), key=lambda i: (self.solutions[i].objective_value, i))

    @property
    def best(self) -> Solution | None:
        i = self.best_index
        return None if i is None else self.solutions[i]

    def objectives(self) -> list[Fraction]:
        return [s.objective_value for s in self.solutions]


class _Walker:
    """One realization on the group-assignment space."""

    def __init__(self, cm: CompiledModel, params: AnnealParams, rng: np.random.Generator):
        self.cm = cm
        self.p = params
        self.rng = rng
        self.left = params.moves
        self.best: tuple[int, list[int], list[int]] | None = None  # cost, times, assignment

    def spend(self, n: int = 1) -> bool:
        self.left -= n
        return self.left >= 0

    def offer(self, cost: int, times: list[int], assignment: list[int]) -> None:
        if self.best is None or cost < self.best[0]:
            self.best = (cost, list(times), list(assignment))

    def dive(self) -> tuple[list[int], int] | None:
        """Randomized greedy descent: resolve conflicting groups one at a time."""
        cm, rng = self.cm, self.rng
        assignment: list[int | None] = [None] * cm.n_groups
        out = cm.active_edges(assignment)
        times = cm.propagate(out)
        if times is None:
            return None
        while True:
            conflicts = [g for g, v in enumerate(assignment) if v is None and not cm.satisfiable_values(g, times)]
            if not conflicts:
                break
            g = int(rng.choice(conflicts))
            kids = []
            for val in (1, 0):
                if not self.spend():
                    return None
                new_out = [list(x) for x in out]
                srcs = []
                for u, v, w in cm.group_edges[g][val]:
                    new_out[u].append((v, w))
                    srcs.append(u)
                t = cm.propagate(new_out, times, srcs)
                if t is not None:
                    kids.append((cm.cost(t), val, new_out, t))
            if not kids:
                return None
            kids.sort(key=lambda k: (k[0], -k[1]))
            pick = kids[0] if len(kids) == 1 or rng.random() < 0.8 else kids[1]
            _, val, out, times = pick
            assignment[g] = val
        full = []
        for g, v in enumerate(assignment):
            if v is None:
                vals = cm.satisfiable_values(g, times)
                v = vals[0] if len(vals) == 1 else int(rng.integers(0, 2))
            full.append(v)
        d = cm.decode(full)
        if not d.feasible:
            return None
        self.offer(d.cost, d.times, full)
        return full, d.cost

    def start(self) -> tuple[list[int], int] | None:
        while self.left > 0:
            got = self.dive()
            if got is not None:
                return got
        return None

    def flip(self, state: list[int], g: int):
        state[g] ^= 1
        d = self.cm.decode(state)
        state[g] ^= 1
        return d

    def calibrate(self, state: list[int], energy: int) -> float:
        if self.p.initial_temperature is not None:
            return self.p.initial_temperature
        ups = []
        n = self.cm.n_groups
        for _ in range(PROBE_MOVES):
            if not self.spend():
                break
            d = self.flip(state, int(self.rng.integers(n)))
            if d.feasible and d.cost > energy:
                ups.append(d.cost - energy)
        if not ups:
            return float(max(self.cm.obj_w, default=1) or 1)
        return -mean(ups) / math.log(PROBE_ACCEPTANCE)

    def run(self) -> None:
        got = self.start()
        if got is None or self.cm.n_groups == 0:
            return
        state, energy = got
        t0 = self.calibrate(state, energy)
        temp, plateau = t0, 0
        n = self.cm.n_groups
        while self.spend():
            g = int(self.rng.integers(n))
            d = self.flip(state, g)
            if d.feasible:
                delta = d.cost - energy
                if delta <= 0 or self.rng.random() < math.exp(-delta / temp):
                    state[g] ^= 1
                    energy = d.cost
                    self.offer(energy, d.times, state)
            plateau += 1
            if plateau == self.p.steps_per_temperature:
                plateau = 0
                temp *= self.p.cooling
                if temp < t0 * self.p.final_temperature_ratio:
                    temp = t0
                    if self.p.restart == "best":
                        state, energy = list(self.best[2]), self.best[0]
                    else:
                        got = self.dive()
                        if got is not None:
                            state, energy = got


def _qubo_realization(model: DecisionModel, params: AnnealParams, rng: np.random.Generator):
    """Single-bit-flip annealing directly on the penalty form."""
    from .penalty import to_penalty_form

    pm = to_penalty_form(model, 2 * _p_min(model) + 1)
    q, offset = pm.dense()
    n = pm.n_bits
    if n == 0:
        return pm.decode([])
    diag = np.diag(q).copy()
    sym = q + q.T
    np.fill_diagonal(sym, 0.0)
    x = rng.integers(0, 2, size=n).astype(float)
    field_ = sym @ x
    energy = float(diag @ x + 0.5 * x @ field_)
    best_e, best_x = energy, x.copy()
    moves = params.moves
    # calibrate on uphill moves of the random start
    probe = [(1 - 2 * x[i]) * (diag[i] + field_[i]) for i in rng.integers(0, n, size=min(PROBE_MOVES, moves))]
    ups = [d for d in probe if d > 0]
    t0 = params.initial_temperature or (-mean(ups) / math.log(PROBE_ACCEPTANCE) if ups else 1.0)
    temp, plateau = t0, 0
    for _ in range(max(0, moves - len(probe))):
        i = int(rng.integers(n))
        delta = (1 - 2 * x[i]) * (diag[i] + field_[i])
        if delta <= 0 or rng.random() < math.exp(-delta / temp):
            step = 1 - 2 * x[i]
            x[i] += step
            field_ += sym[:, i] * step
            energy += delta
            if energy < best_e - 1e-9:
                best_e, best_x = energy, x.copy()
        plateau += 1
        if plateau == params.steps_per_temperature:
            plateau = 0
            temp *= params.cooling
            if temp < t0 * params.final_temperature_ratio:
                temp = t0
    del offset
    return pm.decode([int(b) for b in best_x])


def _p_min(model: DecisionModel) -> Fraction:
    from .penalty import min_penalty_weight

    return min_penalty_weight(model)


def _realization(model: DecisionModel, cm: CompiledModel, params: AnnealParams, index: int):
    from .harness import check_model_solution

    start = time.perf_counter()
    seed = params.seed + index
    rng = np.random.default_rng(seed)
    sol = None
    if params.on_qubo:
        deps, _ = _qubo_realization(model, params, rng)
        times = cm.times_from(deps)
        assignment = cm.feasible_at(times)
        if assignment is not None:
            sol = cm.to_solution(times, assignment)
    else:
        w = _Walker(cm, params, rng)
        w.run()
        if w.best is not None:
            _, times, assignment = w.best
            sol = cm.to_solution(times, assignment)
    elapsed = time.perf_counter() - start
    if elapsed < params.budget_s:
        time.sleep(params.budget_s - elapsed)
    wall = time.perf_counter() - start
    if sol is not None:
        sol.meta.update(solver="anneal", seed=seed, realization=index, wall_time=wall,
                        moves=params.moves, on_qubo=params.on_qubo)
        if not check_model_solution(model, sol).ok:
            sol = None
    return index, sol, wall


def solve_anneal(model: DecisionModel, params: AnnealParams | None = None, *,
                 compiled: CompiledModel | None = None) -> SolutionSample:
    """Run ``params.realizations`` independent annealing realizations."""
    params = params or AnnealParams()
    cm = compiled or CompiledModel(model)
    idx = range(params.realizations)
    if params.parallel and params.realizations > 1:
        with ThreadPoolExecutor(max_workers=params.realizations) as pool:
            results = list(pool.map(lambda i: _realization(model, cm, params, i), idx))
    else:
        results = [_realization(model, cm, params, i) for i in idx]
    results.sort(key=lambda r: r[0])
    return SolutionSample(
        solutions=[s for _, s, _ in results if s is not None],
        wall_times=[w for _, _, w in results],
        discarded=[i for i, s, _ in results if s is None],
        params=params,
    )


@dataclass
class SweepRow:
    budget: float
    best: Fraction | None
    mean: Fraction | None
    mean_wall: float
    sample: SolutionSample


def sweep_budget(model: DecisionModel, budgets: Sequence[float], realizations_per_budget: int = 5,
                 seed: int = 0, **param_overrides) -> list[SweepRow]:
    """Best and mean objective per budget; each row keeps its raw sample."""
    if not budgets:
        raise ValueError("empty budget list")
    if list(budgets) != sorted(budgets):
        raise ValueError("budgets must be sorted ascending")
    cm = CompiledModel(model)
    rows = []
    for b in budgets:
        p = AnnealParams(budget_s=b, realizations=realizations_per_budget, seed=seed, **param_overrides)
        sample = solve_anneal(model, p, compiled=cm)
        objs = sample.objectives()
        rows.append(SweepRow(
            budget=b,
            best=min(objs) if objs else None,
            mean=sum(objs, Fraction(0)) / len(objs) if objs else None,
            mean_wall=sum(sample.wall_times) / len(sample.wall_times),
            sample=sample,
        ))
    return rows
