#!/usr/bin/env python3
"""Text histogram of convergence-onset ratios for a pool file (or a planted synthetic set)."""

import argparse

import numpy as np

from probectl.analysis import onset_distribution
from probectl.pool import load_pools
from probectl.synth import planted_onset_poolset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pool")
    ap.add_argument("--bins", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if args.pool:
        pools, planted = load_pools(args.pool), None
    else:
        pools, planted = planted_onset_poolset(args.seed)
    records, mean = onset_distribution(pools)
    counts, edges = np.histogram([r.ratio for r in records], bins=args.bins, range=(0, 1))
    width = max(counts.max(), 1)
    for c, lo, hi in zip(counts, edges, edges[1:]):
        print(f"{lo:4.2f}-{hi:4.2f} {'#' * round(40 * c / width):<40} {c}")
    print(f"mean ratio {mean:.4f} over {len(records)} problems")
    if planted is not None:
        print(f"planted mean {np.mean(planted):.4f}")


if __name__ == "__main__":
    main()
