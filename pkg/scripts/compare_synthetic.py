#!/usr/bin/env python3
"""Side-by-side comparison of every policy on a synthetic pool set.

Prints a table with relative deltas against SC and optionally writes the CSV.
Pass --pool to use a real pool file instead of the synthetic one.
"""

import argparse
import time

from probectl.policies import PolicySpec
from probectl.pool import load_pools
from probectl.sim import SimConfig, compare
from probectl.synth import mixed_poolset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pool", help="pool file (default: synthetic mixed pools)")
    ap.add_argument("--problems", type=int, default=30)
    ap.add_argument("--pool-width", type=int, default=128)
    ap.add_argument("--width", type=int, default=64)
    ap.add_argument("--repeats", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--csv", help="write the table here")
    args = ap.parse_args()

    pools = load_pools(args.pool) if args.pool else mixed_poolset(args.seed, args.problems, args.pool_width)
    specs = [
        PolicySpec("sc", label=f"SC@{args.width}"),
        PolicySpec("asc", label="ASC"),
        PolicySpec("esc", label="ESC"),
        PolicySpec("sac", label="SC+SAC"),
        PolicySpec("parallel-probe", label="Parallel-Probe"),
    ]
    configs = [SimConfig(s, repeats=args.repeats, width=args.width, base_seed=args.seed) for s in specs]
    t0 = time.perf_counter()
    table = compare(configs, pools, jobs=args.jobs)
    print(table.to_text(), end="")
    print(f"({len(pools)} problems, {args.repeats} repeats, {time.perf_counter() - t0:.1f}s)")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(table.to_csv())


if __name__ == "__main__":
    main()
