"""Deterministic fuzz corpus of (pool, matrix, config) triples."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from probectl.matrix import build_matrix
from probectl.policies import PolicyConfig
from probectl.synth import random_pool


def random_config(rng: np.random.Generator, width: int) -> PolicyConfig:
    warm = bool(rng.random() < 0.7)
    return PolicyConfig(
        width=int(rng.integers(1, width + 1)) if rng.random() < 0.3 else width,
        stability_window=int(rng.integers(1, 9)),
        prune_lookback=int(rng.integers(1, 7)),
        warmup_steps=int(rng.integers(1, 10)) if warm else 0,
        max_steps=int(rng.integers(1, 60)) if rng.random() < 0.2 else None,
        enable_pruning=bool(rng.random() < 0.85),
        enable_stopping=bool(rng.random() < 0.7),
        enable_warmup=warm,
    )


@lru_cache(maxsize=None)
def corpus(n: int = 1000, seed: int = 20240611):
    rng = np.random.default_rng(seed)
    out = []
    for c in range(n):
        width = int(rng.integers(2, 65))
        horizon = int(rng.integers(2, 201))
        vocab = int(rng.integers(2, 7))
        pool = random_pool(rng, width, horizon, vocab, delta=int(rng.choice([7, 100, 500])),
                           problem_id=f"fuzz-{c}", stickiness=float(rng.uniform(0.5, 0.97)))
        out.append((pool, build_matrix(pool), random_config(rng, width)))
    return tuple(out)
