"""Command-line harness: simulate | fprate | throughput | costmodel | groundtruth.

Exit codes: 0 success, 2 configuration error, 3 filter capacity error.
WS_PRIVDB_SEED overrides --seed everywhere.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import fields, replace

from .protocols import CapacityError
from .scenario import Scenario, parse_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsprivdb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run seeded protocol trials, emit one CSV row each")
    sim.add_argument("--config", help="scenario file (key=value lines); flags override")
    for f in fields(Scenario):
        flag = "--" + f.name.replace("_", "-")
        sim.add_argument(flag, type={"int": int, "float": float, "str": str}[f.type],
                         default=None, help=f"scenario field (default {f.default})")
    sim.add_argument("--out", help="output CSV path (default stdout)")

    fpr = sub.add_parser("fprate", help="observed false-positive rate per target epsilon")
    fpr.add_argument("--epsilons", type=_float_list, default=[0.05, 0.01, 0.001])
    fpr.add_argument("--beta", type=int, default=4)
    fpr.add_argument("--alpha", type=float, default=0.95)
    fpr.add_argument("--members", type=int, default=30000)
    fpr.add_argument("--probes", type=int, default=1_000_000)
    fpr.add_argument("--seed", type=int, default=0)
    fpr.add_argument("--out", help="output CSV path (default stdout)")

    thr = sub.add_parser("throughput", help="filter MOPS benchmark (jitted kernels)")
    thr.add_argument("--mode", choices=["lookup", "insert"], default="lookup")
    thr.add_argument("--size-mb", type=float, default=112.0,
                     help="serialized filter payload size to benchmark")
    thr.add_argument("--fp-fractions", type=_float_list, default=[0.0, 0.25, 0.5, 0.75, 1.0])
    thr.add_argument("--alphas", type=_float_list, default=[0.1, 0.3, 0.5, 0.7, 0.9])
    thr.add_argument("--duration", type=float, default=1.0, help="seconds per point (>= 1)")
    thr.add_argument("--threads", type=int, default=1)
    thr.add_argument("--repeats", type=int, default=1)
    thr.add_argument("--epsilon", type=float, default=1e-8)
    thr.add_argument("--beta", type=int, default=4)
    thr.add_argument("--alpha", type=float, default=0.95, help="fill level for lookup mode")
    thr.add_argument("--seed", type=int, default=0)
    thr.add_argument("--out", help="output CSV path (default stdout)")

    cm = sub.add_parser("costmodel", help="closed-form cost curves as CSV")
    cm.add_argument("--figure", required=True,
                    choices=["fig3", "fig4", "fig5a", "fig5b", "fig6", "table2"])
    cm.add_argument("--m", type=int, default=4096, help="grid cells for table2")
    cm.add_argument("--m-list", type=_int_list, default=None)
    cm.add_argument("--rho-list", type=_float_list, default=None)
    cm.add_argument("--k", type=int, default=5)
    cm.add_argument("--r", type=int, default=10)
    cm.add_argument("--out", help="output CSV path (default stdout)")

    gt = sub.add_parser("groundtruth", help="dump or load synthesized ground truth")
    gt_sub = gt.add_subparsers(dest="gt_command", required=True)
    dump = gt_sub.add_parser("dump")
    dump.add_argument("--side", type=int, default=64)
    dump.add_argument("--n-ch", type=int, default=31)
    dump.add_argument("--rho", type=float, default=0.068)
    dump.add_argument("--seed", type=int, default=0)
    dump.add_argument("--ts", type=int, default=0)
    dump.add_argument("--out", help="output CSV path (default stdout)")
    load = gt_sub.add_parser("load")
    load.add_argument("--infile", "--in", dest="infile", required=True)

    return parser


def _apply_env_seed(args) -> None:
    env = os.environ.get("WS_PRIVDB_SEED")
    if env is not None and hasattr(args, "seed"):
        args.seed = int(env)


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _write_csv(path, header, rows, preamble=()):
    out = _open_out(path)
    try:
        for line in preamble:
            out.write(f"# {line}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if path:
            out.close()


def cmd_simulate(args) -> int:
    from .harness import run_scenario

    if args.config:
        with open(args.config) as f:
            scenario = parse_scenario(f.read())
    else:
        scenario = Scenario()
    overrides = {
        f.name: getattr(args, f.name)
        for f in fields(Scenario)
        if getattr(args, f.name) is not None
    }
    scenario = replace(scenario, **overrides)
    if os.environ.get("WS_PRIVDB_SEED") is not None:
        scenario = replace(scenario, seed=int(os.environ["WS_PRIVDB_SEED"]))
    header, rows = run_scenario(scenario)
    _write_csv(args.out, header, rows)
    return EXIT_OK


def cmd_fprate(args) -> int:
    from .harness import FPRATE_COLUMNS, fprate_experiment

    rows = fprate_experiment(args.epsilons, args.beta, args.alpha, args.members,
                             args.probes, args.seed)
    _write_csv(args.out, FPRATE_COLUMNS, rows)
    return EXIT_OK


def cmd_throughput(args) -> int:
    from .bench import run_insert_sweep, run_lookup_sweep

    if args.mode == "lookup":
        results = run_lookup_sweep(
            size_mb=args.size_mb, fp_fractions=args.fp_fractions,
            duration=args.duration, threads=args.threads, seed=args.seed,
            epsilon=args.epsilon, beta=args.beta, alpha=args.alpha,
            repeats=args.repeats,
        )
    else:
        results = run_insert_sweep(
            size_mb=args.size_mb, alpha_targets=args.alphas, duration=args.duration,
            seed=args.seed, epsilon=args.epsilon, beta=args.beta, repeats=args.repeats,
        )
    meta = [
        f"mode={args.mode}", f"size_mb={args.size_mb}", f"duration={args.duration}",
        f"threads={args.threads}", f"seed={args.seed}", f"epsilon={args.epsilon}",
        f"beta={args.beta}",
    ]
    rows = [[r.metric, r.x, f"{r.value:.4f}", r.trials, r.machine] for r in results]
    _write_csv(args.out, ("metric", "x", "value_mops", "trials", "machine"), rows, meta)
    return EXIT_OK


def cmd_costmodel(args) -> int:
    from . import costmodel

    out = _open_out(args.out)
    try:
        if args.figure == "fig3":
            costmodel.emit_fig3(out)
        elif args.figure == "fig4":
            costmodel.emit_fig4(out, m_list=args.m_list)
        elif args.figure == "fig5a":
            costmodel.emit_fig5(out, "db", m_list=args.m_list)
        elif args.figure == "fig5b":
            costmodel.emit_fig5(out, "su", m_list=args.m_list)
        elif args.figure == "fig6":
            costmodel.emit_fig6(out, rho_list=args.rho_list)
        else:
            costmodel.emit_table2(out, costmodel.CostParams(m=args.m, k=args.k, r=args.r))
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_groundtruth(args) -> int:
    from .spectrum import GridSpec, dump_csv, generate_ground_truth, load_csv

    if args.gt_command == "dump":
        grid = GridSpec(side=args.side, n_ch=args.n_ch)
        db = generate_ground_truth(grid, args.rho, args.seed)
        out = _open_out(args.out)
        try:
            dump_csv(db, out, ts=args.ts)
        finally:
            if args.out:
                out.close()
    else:
        with open(args.infile) as f:
            db, ts = load_csv(f)
        print(
            f"side={db.grid.side} n_ch={db.grid.n_ch} ts={ts} "
            f"rows={db.grid.m * db.grid.n_ch} "
            f"available_fraction={db.availability_fraction():.6f}"
        )
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_env_seed(args)
    handlers = {
        "simulate": cmd_simulate,
        "fprate": cmd_fprate,
        "throughput": cmd_throughput,
        "costmodel": cmd_costmodel,
        "groundtruth": cmd_groundtruth,
    }
    try:
        return handlers[args.command](args)
    except CapacityError as e:
        print(f"error: filter capacity: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
