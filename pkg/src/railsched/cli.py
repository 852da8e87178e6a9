"""Command-line entry point: ``railsched <subcommand> ...``.

Exit codes: 0 ok, 2 infeasible (or a failed feasibility check), 3 timeout
without an incumbent, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .anneal import AnnealParams, solve_anneal, sweep_budget
from .derivation import build_index_sets, dump_index_sets, earliest_departures, estimate_size
from .exact import Status, solve_exact
from .harness import (
    check_feasibility,
    compare_solvers,
    comparison_csv,
    delay_stats,
    format_solution,
    read_solution,
    time_distance,
)
from .instance import InstanceError, load_instance
from .model import build, export_lp
from .penalty import export_qubo, to_penalty_form

EXIT_OK, EXIT_INFEASIBLE, EXIT_TIMEOUT, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(args):
    try:
        inst = load_instance(Path(args.instance))
    except (OSError, InstanceError) as e:
        raise UsageError(str(e)) from e
    if getattr(args, "dmax", None) is not None:
        inst = inst.replace(d_max=args.dmax)
    return inst


def _out(args, name: str | None) -> Path | None:
    if name is None:
        return None
    p = Path(name)
    if args.out_dir and not p.is_absolute():
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        p = Path(args.out_dir) / p
    return p


def _emit(args, text: str, name: str | None) -> None:
    p = _out(args, name)
    if p is None:
        sys.stdout.write(text)
    else:
        p.write_text(text)


def cmd_derive(args) -> int:
    inst = _load(args)
    der = earliest_departures(inst)
    sets = build_index_sets(inst, der)
    buf = io.StringIO()
    buf.write("train\tstation\tsigma\tupsilon\tlo\thi\n")
    for tr in inst.trains:
        for s in tr.decision_stations:
            lo, hi = der.window[(tr.id, s)]
            buf.write(f"{tr.id}\t{s}\t{inst.timetable.sigma[(tr.id, s)]}\t{der.upsilon[(tr.id, s)]}\t{lo}\t{hi}\n")
    _emit(args, buf.getvalue(), args.output)
    if args.dump_sets:
        _out(args, args.dump_sets).write_text(dump_index_sets(inst, sets))
    else:
        sys.stdout.write("\n" + dump_index_sets(inst, sets))
    return EXIT_OK


def cmd_estimate(args) -> int:
    try:
        est = estimate_size(args.trains, args.stations, Fraction(args.alpha), Fraction(args.meet), args.track)
    except ValueError as e:
        raise UsageError(str(e)) from e
    print(est)
    return EXIT_OK


def cmd_build(args) -> int:
    inst = _load(args)
    model = build(inst)
    _emit(args, export_lp(model), args.lp)
    if args.penalty:
        weight = args.weight
        if weight is None:
            raise UsageError("--penalty needs --weight")
        try:
            pm = to_penalty_form(model, Fraction(weight))
        except ValueError as e:
            raise UsageError(str(e)) from e
        _emit(args, export_qubo(pm), args.penalty)
    counts = model.family_counts()
    print(f"# {len(model.time_vars)} time variables, {len(model.binary_vars)} binaries, "
          f"{sum(counts.values())} constraints", file=sys.stderr)
    return EXIT_OK


def cmd_solve_exact(args) -> int:
    inst = _load(args)
    model = build(inst)
    incumbent = None
    if args.warm_start:
        sample = solve_anneal(model, AnnealParams(budget_s=1.0, realizations=1, seed=args.seed))
        incumbent = sample.best
    res = solve_exact(model, args.budget, incumbent=incumbent)
    print(f"# status {res.status.value} nodes {res.nodes} wall {res.wall_time:.3f}s", file=sys.stderr)
    if res.solution is not None:
        _emit(args, format_solution(res.solution, inst), args.solution)
    if res.status == Status.INFEASIBLE:
        return EXIT_INFEASIBLE
    if res.status == Status.TIMEOUT and res.solution is None:
        return EXIT_TIMEOUT
    return EXIT_OK


def _sample_json(sample, inst) -> str:
    doc = {
        "params": {k: v for k, v in vars(sample.params).items()},
        "wall_times": sample.wall_times,
        "discarded": sample.discarded,
        "best_index": sample.best_index,
        "solutions": [
            {
                "realization": s.meta["realization"],
                "seed": s.meta["seed"],
                "objective": str(s.objective_value),
                "objective_x_dmax": str(s.objective_value * inst.d_max),
                "wall_time": s.meta["wall_time"],
                "departures": [[j, st, t] for (j, st), t in s.departures.items()],
            }
            for s in sample.solutions
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def cmd_solve_anneal(args) -> int:
    inst = _load(args)
    model = build(inst)
    try:
        params = AnnealParams(budget_s=args.budget, realizations=args.realizations, seed=args.seed,
                              on_qubo=args.on_qubo)
    except ValueError as e:
        raise UsageError(str(e)) from e
    sample = solve_anneal(model, params)
    for s in sample.solutions:
        print(f"realization {s.meta['realization']} objective_x_dmax {float(s.objective_value * inst.d_max):.4f} "
              f"wall {s.meta['wall_time']:.2f}s")
    for i in sample.discarded:
        print(f"realization {i} no feasible schedule found")
    if args.sample:
        _out(args, args.sample).write_text(_sample_json(sample, inst))
    if args.solution and sample.best is not None:
        _out(args, args.solution).write_text(format_solution(sample.best, inst))
    return EXIT_INFEASIBLE if sample.infeasible_evidence else EXIT_OK


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(f"bad number list {text!r}") from e


def cmd_sweep(args) -> int:
    inst = _load(args)
    model = build(inst)
    try:
        rows = sweep_budget(model, _floats(args.budgets), args.reps, seed=args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from e
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["budget_s", "best_obj_x_dmax", "mean_obj_x_dmax", "mean_wall_s", "per_realization_obj_x_dmax"])

    def f(x):
        return "n/a" if x is None else f"{float(x * inst.d_max):.4f}"

    for r in rows:
        raw = ";".join(f"{float(o * inst.d_max):.4f}" for o in r.sample.objectives())
        w.writerow([r.budget, f(r.best), f(r.mean), f"{r.mean_wall:.3f}", raw])
    _emit(args, buf.getvalue(), args.csv)
    return EXIT_OK


def cmd_check(args) -> int:
    inst = _load(args)
    der = earliest_departures(inst)
    sol = read_solution(args.solution)
    try:
        verdict = check_feasibility(inst, der, build_index_sets(inst, der), sol)
    except ValueError as e:
        raise UsageError(str(e)) from e
    if verdict.ok:
        print("ok")
        return EXIT_OK
    for v in verdict.violations:
        print(f"{v.family}\t{' '.join(map(str, v.where))}\tlhs={v.lhs}\trhs={v.rhs}\tslack={v.slack}")
    return EXIT_INFEASIBLE


def cmd_stats(args) -> int:
    inst = _load(args)
    sols = [read_solution(p) for p in args.solutions]
    stations = args.stations.split(",") if args.stations else None
    try:
        report = delay_stats(inst, sols, stations)
    except ValueError as e:
        raise UsageError(str(e)) from e
    _emit(args, report.to_csv(), args.csv)
    return EXIT_OK


def cmd_diagram(args) -> int:
    inst = _load(args)
    sol = read_solution(args.solution)
    corridor = args.corridor.split(",") if args.corridor else None
    if corridor is None:
        corridor = list(max(inst.trains, key=lambda t: len(t.route)).route)
    try:
        doc = time_distance(inst, sol, corridor)
    except (ValueError, KeyError) as e:
        raise UsageError(str(e)) from e
    if args.csv:
        _out(args, args.csv).write_text(doc.to_csv())
    _emit(args, doc.to_svg(), args.svg)
    return EXIT_OK


def cmd_compare(args) -> int:
    rows = []
    for path in args.instances:
        args.instance = path
        inst = _load(args)
        params = AnnealParams(budget_s=args.budget, realizations=args.realizations, seed=args.seed)
        rows.append(compare_solvers(inst, args.exact_budget, params))
    _emit(args, comparison_csv(rows), args.csv)
    return EXIT_OK


def cmd_batch(args) -> int:
    """Solve several instances exactly, each in isolation, writing one solution file per instance."""

    def one(path: str):
        inst = load_instance(Path(path))
        if args.dmax is not None:
            inst = inst.replace(d_max=args.dmax)
        res = solve_exact(build(inst), args.budget)
        text = format_solution(res.solution, inst) if res.solution is not None else None
        return path, inst, res, text

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(one, args.instances))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["instance", "status", "obj_x_dmax", "nodes", "wall_s"])
    worst = EXIT_OK
    for path, inst, res, text in results:
        if text is not None:
            _out(args, Path(path).stem + ".sol").write_text(text)
        obj = "n/a" if res.solution is None else f"{float(res.objective * inst.d_max):.4f}"
        w.writerow([path, res.status.value, obj, res.nodes, f"{res.wall_time:.3f}"])
        if res.status == Status.INFEASIBLE:
            worst = max(worst, EXIT_INFEASIBLE)
        elif res.status == Status.TIMEOUT and res.solution is None:
            worst = max(worst, EXIT_TIMEOUT)
    _emit(args, buf.getvalue(), args.csv)
    return worst


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--dmax", type=int, default=None,
                        help="maximal secondary delay in minutes (default: the instance value, 40 unless set)")
    common.add_argument("--out-dir", default=None, help="directory for relative output paths")

    p = _Parser(prog="railsched", description="Railway rescheduling by integer programming.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_, description=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("derive", cmd_derive, "earliest departures, windows and constraint index sets")
    sp.add_argument("instance")
    sp.add_argument("-o", "--output", help="windows table (default: stdout)")
    sp.add_argument("--dump-sets", help="write the index sets here instead of stdout")

    sp = add("estimate", cmd_estimate, "closed-form model size estimate")
    sp.add_argument("--trains", type=int, required=True)
    sp.add_argument("--stations", type=int, required=True)
    sp.add_argument("--alpha", default="2/3")
    sp.add_argument("--meet", default="0")
    sp.add_argument("--mode", "--track", dest="track", choices=["single", "double"], default="double")

    sp = add("build", cmd_build, "write the model as an LP file and optionally its penalty form")
    sp.add_argument("instance")
    sp.add_argument("--lp")
    sp.add_argument("--penalty")
    sp.add_argument("--weight")

    sp = add("solve-exact", cmd_solve_exact, "exact branch-and-bound")
    sp.add_argument("instance")
    sp.add_argument("--budget", type=float, default=60.0)
    sp.add_argument("--solution")
    sp.add_argument("--warm-start", action="store_true", help="seed the search with a 1 s annealing run")

    sp = add("solve-anneal", cmd_solve_anneal, "simulated annealing realizations")
    sp.add_argument("instance")
    sp.add_argument("--budget", type=float, default=5.0)
    sp.add_argument("--realizations", type=int, default=5)
    sp.add_argument("--on-qubo", action="store_true")
    sp.add_argument("--sample")
    sp.add_argument("--solution")

    sp = add("sweep", cmd_sweep, "annealing quality over a list of time budgets")
    sp.add_argument("instance")
    sp.add_argument("--budgets", default="5,10,20,40")
    sp.add_argument("--reps", type=int, default=5)
    sp.add_argument("--csv")

    sp = add("check", cmd_check, "independent feasibility check of a solution file")
    sp.add_argument("instance")
    sp.add_argument("solution")

    sp = add("stats", cmd_stats, "secondary delay statistics over solution files")
    sp.add_argument("instance")
    sp.add_argument("solutions", nargs="+")
    sp.add_argument("--stations")
    sp.add_argument("--csv")

    sp = add("diagram", cmd_diagram, "time-distance diagram (SVG, optional CSV)")
    sp.add_argument("instance")
    sp.add_argument("solution")
    sp.add_argument("--corridor")
    sp.add_argument("--svg")
    sp.add_argument("--csv")

    sp = add("compare", cmd_compare, "exact versus annealing comparison table")
    sp.add_argument("instances", nargs="+")
    sp.add_argument("--exact-budget", type=float, default=60.0)
    sp.add_argument("--budget", type=float, default=5.0)
    sp.add_argument("--realizations", type=int, default=5)
    sp.add_argument("--csv")

    sp = add("batch", cmd_batch, "solve many instances exactly, concurrently")
    sp.add_argument("instances", nargs="+")
    sp.add_argument("--budget", type=float, default=60.0)
    sp.add_argument("--jobs", type=int, default=2)
    sp.add_argument("--csv")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"railsched: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
