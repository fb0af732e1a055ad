"""Command line interface: ``bddsched <command> ...``."""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .bench import brute_force_opt, performance_profile
from .branch import SolverConfig, solve
from .colgen import MODES, NO_CONSECUTIVE, REPEATS, CgConfig, CgState, integer_bound, run_colgen
from .diagram import build_diagram, diagram_stats
from .formulations import build_atif, build_bddf, build_tif
from .horizon import refine_partition
from .instance import (RESULT_COLUMNS, generate_instance, read_instance, write_instance)
from .lp import solve_lp

TIME_LIMIT_ENV = "BDDSCHED_TIME_LIMIT"
TIMING_COLUMNS = ("time_lp_s", "time_total_s")


def default_time_limit() -> float:
    return float(os.environ.get(TIME_LIMIT_ENV, "60"))


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.6g}"
    return str(x)


def solve_row(path, time_limit: float, mode: str = NO_CONSECUTIVE, seed: int = 0) -> dict:
    instance = read_instance(path)
    res = solve(instance, SolverConfig(time_limit_s=time_limit, mode=mode, seed=seed))
    return {
        "instance_id": Path(path).stem,
        "n": instance.n,
        "m": instance.m,
        "ub": res.ub,
        "lb": integer_bound(res.stats["lb"]),
        "nodes": res.stats["nodes"],
        "cg_iters": res.stats["cg_iters"],
        "time_lp_s": f"{res.stats['time_lp']:.4f}",
        "time_total_s": f"{res.stats['time_total']:.4f}",
    }


def _write_rows(out, rows, header=True):
    writer = csv.DictWriter(out, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    if header:
        writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(v) for k, v in row.items()})


def cmd_generate(args) -> int:
    inst = generate_instance(args.n, args.m, args.rdd, args.tf, args.seed, p_max=args.p_max)
    text = write_instance(inst)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_solve(args) -> int:
    row = solve_row(args.instance, args.time_limit, args.mode, args.seed)
    _write_rows(sys.stdout, [row], header=not args.no_header)
    return 0


def bounds_row(instance) -> dict:
    partition = refine_partition(instance)
    diagram = build_diagram(instance, partition)
    tif, atif = build_tif(instance), build_atif(instance)
    nodes, hi_edges, lo_edges, _ = diagram_stats(diagram)
    cg = CgState(instance, diagram.restricted())
    run_colgen(cg, CgConfig(mode=NO_CONSECUTIVE, fixing=False))
    return {
        "tif": solve_lp(tif.lp).objective,
        "atif": solve_lp(atif.lp).objective,
        "bddf_repeats": solve_lp(build_bddf(instance, diagram).lp).objective,
        "bddf_no_consecutive": cg.lb,
        "tif_vars": tif.lp.num_vars,
        "atif_vars": atif.lp.num_vars,
        "bdd_nodes": nodes,
        "bdd_hi_edges": hi_edges,
        "bdd_lo_edges": lo_edges,
    }


def cmd_bounds(args) -> int:
    row = bounds_row(read_instance(args.instance))
    writer = csv.DictWriter(sys.stdout, fieldnames=list(row), lineterminator="\n")
    writer.writeheader()
    writer.writerow({k: _fmt(v) for k, v in row.items()})
    return 0


def cmd_oracle(args) -> int:
    cost, schedule = brute_force_opt(read_instance(args.instance))
    print(f"opt {cost}")
    for k, seq in enumerate(schedule.machine_sequences, start=1):
        print(f"machine {k}: {' '.join(map(str, seq))}")
    return 0


def cmd_profile(args) -> int:
    """Input rows ``instance_id,method,time_s``; empty or ``inf`` time means unsolved."""
    with open(args.results, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError("results file has no rows")
    methods = sorted({r["method"] for r in rows})
    instances = sorted({r["instance_id"] for r in rows})
    table = {(r["instance_id"], r["method"]): r["time_s"] for r in rows}

    def value(i, s):
        raw = (table.get((i, s)) or "inf").strip()
        return float(raw) if raw else math.inf

    times = {s: [value(i, s) for i in instances] for s in methods}
    taus = [float(t) for t in args.taus.split(",")]
    rho = performance_profile(times, taus)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["tau"] + methods)
    for k, tau in enumerate(taus):
        writer.writerow([_fmt(tau)] + [_fmt(rho[s][k]) for s in methods])
    return 0


def _suite_job(task):
    path, time_limit, mode, seed = task
    return solve_row(path, time_limit, mode, seed)


def cmd_suite(args) -> int:
    files = sorted(p for p in Path(args.directory).iterdir() if p.suffix == args.suffix)
    out = Path(args.output)
    done = set()
    if out.exists() and out.stat().st_size:
        with open(out, newline="") as fh:
            done = {r["instance_id"] for r in csv.DictReader(fh)}
    todo = [(str(p), args.time_limit, args.mode, args.seed) for p in files if p.stem not in done]
    header = not (out.exists() and out.stat().st_size)
    with open(out, "a", newline="") as fh:
        if header:
            _write_rows(fh, [], header=True)
        if args.workers > 1:
            with ProcessPoolExecutor(args.workers) as pool:
                results = pool.map(_suite_job, todo)
                for row in results:
                    _write_rows(fh, [row], header=False)
                    fh.flush()
        else:
            for task in todo:
                _write_rows(fh, [_suite_job(task)], header=False)
                fh.flush()
    print(f"{len(todo)} solved, {len(done)} skipped")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bddsched", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--rdd", type=float, required=True)
    g.add_argument("--tf", type=float, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--p-max", type=int, default=100)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    def solver_flags(p):
        p.add_argument("--time-limit", type=float, default=default_time_limit())
        p.add_argument("--mode", choices=MODES, default=NO_CONSECUTIVE)
        p.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("solve", help="branch-and-price on one instance file")
    s.add_argument("instance")
    s.add_argument("--no-header", action="store_true")
    solver_flags(s)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bounds", help="LP bounds and model sizes")
    b.add_argument("instance")
    b.set_defaults(func=cmd_bounds)

    o = sub.add_parser("oracle", help="brute-force optimum (n <= 10)")
    o.add_argument("instance")
    o.set_defaults(func=cmd_oracle)

    pr = sub.add_parser("profile", help="performance profile from instance_id,method,time_s rows")
    pr.add_argument("results")
    pr.add_argument("--taus", default="1,1.5,2,3,5,10")
    pr.set_defaults(func=cmd_profile)

    su = sub.add_parser("suite", help="solve every instance file in a directory")
    su.add_argument("directory")
    su.add_argument("-o", "--output", required=True)
    su.add_argument("--suffix", default=".txt")
    su.add_argument("--workers", type=int, default=1)
    solver_flags(su)
    su.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # report every failure as a non-zero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
