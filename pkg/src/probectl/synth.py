"""Synthetic candidate pools with known structure.

Used for fuzzing the controllers, for planted-statistic recovery checks and
for desk-scale throughput runs. Nothing here talks to a model.
"""

from __future__ import annotations

import math

import numpy as np

from .answers import canonicalize
from .pool import BranchTrace, PoolSet, ProblemPool


def _branch(i: int, answers: list[str], final: str, nat: int, delta: int,
            overhead: int | None = None) -> BranchTrace:
    n = math.ceil(nat / delta) - 1
    answers = answers[:n]
    return BranchTrace(
        branch_id=i,
        probe_answers=tuple(canonicalize(a) for a in answers),
        cumulative_tokens=tuple(t * delta for t in range(1, n + 1)),
        final_answer=canonicalize(final),
        natural_length_tokens=nat,
        probe_overhead_tokens=overhead,
    )


def random_pool(
    rng: np.random.Generator,
    width: int,
    horizon: int,
    vocab: int,
    delta: int = 500,
    problem_id: str = "fuzz",
    stickiness: float = 0.8,
    abstain_rate: float = 0.05,
) -> ProblemPool:
    """Unstructured pool: sticky random answer walks over a small vocabulary.

    Branch 0 always runs the full ``horizon`` so the matrix has exactly that
    many steps; other lengths are uniform.
    """
    labels = [str(v) for v in range(vocab)]
    branches = []
    for i in range(width):
        steps = horizon if i == 0 else int(rng.integers(1, horizon + 1))
        nat = int(rng.integers((steps - 1) * delta + 1, steps * delta + 1))
        seq = []
        cur = labels[int(rng.integers(vocab))]
        for _ in range(steps):
            if rng.random() > stickiness:
                cur = labels[int(rng.integers(vocab))]
            seq.append("" if rng.random() < abstain_rate else cur)
        branches.append(_branch(i, seq, cur, nat, delta, int(rng.integers(0, 40 * steps))))
    gold = labels[int(rng.integers(vocab))]
    return ProblemPool(problem_id, canonicalize(gold), delta, tuple(branches))


def planted_onset_pool(
    rng: np.random.Generator,
    problem_id: str,
    ratio: float,
    horizon: int,
    width: int = 128,
    delta: int = 500,
    noise: float = 0.15,
    lead: float = 0.75,
) -> tuple[ProblemPool, float]:
    """Pool whose all-branch consensus switches to the gold answer at a planted step.

    A ``lead`` fraction of branches moves from a decoy answer to gold at the
    planted step; the rest move later or never. Cells are replaced by
    distractors with probability ``noise``. Returns the pool and the exact
    planted ratio (onset step * delta / longest branch).
    """
    onset = max(2, round(ratio * horizon))
    gold, decoy = "117", "101"
    distractors = ["7", "12", "33", "58", "96"]
    branches = []
    for i in range(width):
        nat = horizon * delta if i == 0 else int(rng.integers(onset * delta, horizon * delta + 1))
        steps = math.ceil(nat / delta)
        if i == 0 or rng.random() < lead:
            switch = onset
        else:
            switch = int(rng.integers(onset + 1, horizon + 2))
        seq = []
        for t in range(1, steps + 1):
            a = gold if t >= switch else decoy
            if rng.random() < noise:
                a = distractors[int(rng.integers(len(distractors)))]
            seq.append(a)
        final = gold if steps >= switch else decoy
        branches.append(_branch(i, seq, final, nat, delta))
    pool = ProblemPool(problem_id, canonicalize(gold), delta, tuple(branches))
    return pool, onset / horizon


def planted_onset_poolset(seed: int, problems: int = 30, ratio_range=(0.28, 0.32),
                          horizons=(20, 60), width: int = 128, delta: int = 500):
    """PoolSet with planted onset ratios drawn from ``ratio_range``.

    Returns the pool set and the list of exact planted ratios.
    """
    rng = np.random.default_rng(seed)
    pools, planted = [], []
    for j in range(problems):
        T = int(rng.integers(horizons[0], horizons[1] + 1))
        r = float(rng.uniform(*ratio_range))
        pool, exact = planted_onset_pool(rng, f"planted-{j:03d}", r, T, width, delta)
        pools.append(pool)
        planted.append(exact)
    return PoolSet(tuple(pools), {"generator": "planted_onset", "seed": seed}), planted


def mixed_poolset(seed: int, problems: int = 30, width: int = 128, delta: int = 500,
                  mean_steps: float = 30.0) -> PoolSet:
    """Benchmark-like pools: per-problem difficulty, long-tailed lengths,
    early noisy answers that settle on each branch's eventual answer."""
    rng = np.random.default_rng(seed)
    pools = []
    for j in range(problems):
        gold = str(100 + j)
        wrong = [str(200 + 10 * j + w) for w in range(4)]
        p_right = float(rng.beta(1.2, 1.0))
        branches = []
        for i in range(width):
            steps = max(2, int(rng.lognormal(math.log(mean_steps), 0.45)))
            nat = int(rng.integers((steps - 1) * delta + 1, steps * delta + 1))
            target = gold if rng.random() < p_right else wrong[int(rng.integers(len(wrong)))]
            settle = int(rng.integers(1, steps + 1))
            seq = []
            for t in range(1, steps + 1):
                if t >= settle and rng.random() < 0.9:
                    seq.append(target)
                elif rng.random() < 0.03:
                    seq.append("")
                else:
                    seq.append(wrong[int(rng.integers(len(wrong)))] if rng.random() < 0.7 else gold)
            branches.append(_branch(i, seq, target, nat, delta, int(12 * steps)))
        pools.append(ProblemPool(f"mixed-{j:03d}", canonicalize(gold), delta, tuple(branches)))
    return PoolSet(tuple(pools), {"generator": "mixed", "seed": seed})


def flip_poolset(problems: int = 5, width: int = 4, delta: int = 500) -> PoolSet:
    """Problem j: every branch answers wrong until step j+1, right afterwards.

    Majority accuracy at depth k*delta over all branches is then exactly
    min(k - 1, problems) / problems, strictly increasing in depth.
    """
    pools = []
    steps = problems + 2
    for j in range(problems):
        flip = j + 2
        branches = []
        for i in range(width):
            seq = ["0" if t < flip else "1" for t in range(1, steps + 1)]
            branches.append(_branch(i, seq, "1", steps * delta, delta))
        pools.append(ProblemPool(f"flip-{j}", canonicalize("1"), delta, tuple(branches)))
    return PoolSet(tuple(pools))
