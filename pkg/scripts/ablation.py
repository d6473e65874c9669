#!/usr/bin/env python3
"""Turn each controller component off in turn and report the change vs the full controller."""

import argparse

from probectl.policies import PolicySpec
from probectl.pool import load_pools
from probectl.sim import SimConfig, compare
from probectl.synth import mixed_poolset

VARIANTS = [
    ("full", {}),
    ("w/o pruning", {"prune": False}),
    ("w/o early stopping", {"stop": False}),
    ("w/o warmup", {"use_warmup": False}),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pool")
    ap.add_argument("--width", type=int, default=64)
    ap.add_argument("--repeats", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--u", type=int, default=10)
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--warmup", type=int, default=12)
    args = ap.parse_args()

    pools = load_pools(args.pool) if args.pool else mixed_poolset(args.seed)
    base = {"u": args.u, "k": args.k, "warmup": args.warmup}
    configs = [SimConfig(PolicySpec("parallel-probe", {**base, **extra}, label), repeats=args.repeats,
                         width=args.width, base_seed=args.seed)
               for label, extra in VARIANTS]
    print(compare(configs, pools).to_text(), end="")


if __name__ == "__main__":
    main()
