#!/usr/bin/env python3
"""Filter throughput sweeps: lookup MOPS vs f_p and insert MOPS vs load.

Defaults to a memory-resident 112 MB filter; pass a smaller --size-mb on
constrained machines.  Output is CSV on stdout or
--out, one row per measured point, tagged with a machine fingerprint.
"""

import argparse
import sys

from wsprivdb.bench import run_insert_sweep, run_lookup_sweep


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size-mb", type=float, default=112.0)
    parser.add_argument("--duration", type=float, default=2.0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    results = run_lookup_sweep(
        size_mb=args.size_mb, duration=args.duration, threads=args.threads,
        seed=args.seed, repeats=args.repeats,
    )
    results += run_insert_sweep(
        size_mb=args.size_mb, duration=args.duration, seed=args.seed,
        repeats=args.repeats,
    )

    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write(f"# size_mb={args.size_mb} duration={args.duration} "
                  f"threads={args.threads} repeats={args.repeats} seed={args.seed}\n")
        out.write("metric,x,value_mops,trials,machine\n")
        for r in results:
            out.write(f"{r.metric},{r.x},{r.value:.4f},{r.trials},{r.machine}\n")
    finally:
        if args.out:
            out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
