"""Railway rescheduling with an integer linear model, an exact search and an annealer."""

from .anneal import AnnealParams, SolutionSample, solve_anneal, sweep_budget
from .derivation import (
    DerivedTimes,
    IndexSets,
    big_M,
    build_index_sets,
    close_pairs,
    earliest_departures,
    estimate_size,
    mp_possible,
)
from .exact import SolveResult, Status, brute_force, solve_exact
from .generate import calibration_instance, closure_instance, gen_synthetic_line, random_instance
from .harness import (
    DelayReport,
    Verdict,
    check_feasibility,
    compare_solvers,
    delay_stats,
    read_solution,
    time_distance,
    write_solution,
)
from .instance import Instance, apply_disturbance, load_instance, save_instance
from .model import DecisionModel, Solution, build, build_model, evaluate_objective, export_lp
from .penalty import export_qubo, to_penalty_form

__version__ = "0.1.0"

__all__ = [
    "AnnealParams", "SolutionSample", "solve_anneal", "sweep_budget",
    "DerivedTimes", "IndexSets", "big_M", "build_index_sets", "close_pairs", "earliest_departures",
    "estimate_size", "mp_possible",
    "SolveResult", "Status", "brute_force", "solve_exact",
    "calibration_instance", "closure_instance", "gen_synthetic_line", "random_instance",
    "DelayReport", "Verdict", "check_feasibility", "compare_solvers", "delay_stats", "read_solution",
    "time_distance", "write_solution",
    "Instance", "apply_disturbance", "load_instance", "save_instance",
    "DecisionModel", "Solution", "build", "build_model", "evaluate_objective", "export_lp",
    "export_qubo", "to_penalty_form",
]
