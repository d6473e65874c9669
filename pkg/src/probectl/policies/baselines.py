"""Baselines: SC, SC+SAC (parallel), ESC (chunked hybrid), ASC (sequential)."""

from __future__ import annotations

import numpy as np
from scipy import stats

from ..matrix import ABSTAIN_CODE, ProbeMatrix, vote_codes
from .base import ALL_FINISHED, CONSENSUS_STABLE, RunOutcome, consumed_tokens, leading, parallel_outcome


def run_sc(matrix: ProbeMatrix, width: int, include_probe_overhead: bool = False) -> RunOutcome:
    """Majority vote over ``width`` complete trajectories."""
    m = leading(matrix, width)
    predicted = m.decode(vote_codes(m.final_codes, len(m.answers)))
    return parallel_outcome(
        m, predicted, m.horizon, ALL_FINISHED, m.finish_steps, include_probe_overhead
    )


def sac_exit(row: np.ndarray, n_probes: int, window: int) -> int | None:
    """First step at which ``window`` consecutive probe answers agree, if any."""
    run = 0
    prev = None
    for t in range(1, n_probes + 1):
        code = int(row[t - 1])
        run = run + 1 if code == prev else 1
        prev = code
        if run >= window and code != ABSTAIN_CODE:
            return t
    return None


def run_sac(
    matrix: ProbeMatrix, width: int, local_window: int = 16, include_probe_overhead: bool = False
) -> RunOutcome:
    """SC where each branch exits once its own answer is stable for ``local_window`` probes."""
    if local_window < 2:
        raise ValueError("local_window must be >= 2")
    m = leading(matrix, width)
    exits = m.finish_steps.copy()
    votes = m.final_codes.copy()
    for i in range(m.width):
        t = sac_exit(m.codes[i], int(m.n_probes[i]), local_window)
        if t is not None:
            exits[i] = t
            votes[i] = m.codes[i, t - 1]
    predicted = m.decode(vote_codes(votes, len(m.answers)))
    return parallel_outcome(
        m, predicted, int(exits.max()), ALL_FINISHED, exits, include_probe_overhead
    )


def run_esc(
    matrix: ProbeMatrix, chunk_size: int = 8, max_width: int = 64, include_probe_overhead: bool = False
) -> RunOutcome:
    """Rounds of ``chunk_size`` full trajectories; stop after a unanimous round.

    ``stop_step`` counts rounds. SeqTokens is the sum of per-round maxima.
    """
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    m = leading(matrix, max_width)
    full = consumed_tokens(m, m.finish_steps, include_probe_overhead)
    used = np.zeros(m.width, dtype=np.int64)
    seq = 0
    rounds = 0
    reason = ALL_FINISHED
    for start in range(0, m.width, chunk_size):
        idx = np.arange(start, min(start + chunk_size, m.width))
        used[idx] = full[idx]
        seq += int(full[idx].max())
        rounds += 1
        codes = m.final_codes[idx]
        if codes[0] != ABSTAIN_CODE and np.all(codes == codes[0]):
            reason = CONSENSUS_STABLE
            break
    seen = used > 0
    predicted = m.decode(vote_codes(m.final_codes[seen], len(m.answers)))
    return RunOutcome(
        predicted=predicted,
        stop_step=rounds,
        stop_reason=reason,
        consumed_tokens=tuple(int(x) for x in used),
        seq_tokens=seq,
        total_tokens=int(used.sum()),
    )


def _posterior_alpha(counts: np.ndarray) -> np.ndarray:
    # unit prior; a lone observed class gets a zero-count rival
    alpha = counts.astype(float) + 1.0
    if alpha.size < 2:
        alpha = np.append(alpha, np.ones(2 - alpha.size))
    return alpha


def majority_probability_mc(counts, leader: int, draws: int, rng: np.random.Generator) -> float:
    """P(leader has the largest share) under Dirichlet(counts + 1), Monte Carlo."""
    alpha = _posterior_alpha(np.asarray(counts))
    samples = rng.dirichlet(alpha, size=draws)
    return float(np.mean(samples.argmax(axis=1) == leader))


def majority_probability_exact(counts) -> float:
    """Closed form for at most two classes: P(X > 1/2), X ~ Beta(a + 1, b + 1)."""
    counts = list(counts)
    if len(counts) > 2:
        raise ValueError("closed form only covers two classes")
    a = counts[0]
    b = counts[1] if len(counts) == 2 else 0
    return float(stats.beta.sf(0.5, a + 1, b + 1))


def run_asc(
    matrix: ProbeMatrix,
    max_width: int = 64,
    threshold: float = 0.95,
    mc_draws: int = 1000,
    rng_seed: int = 0,
    include_probe_overhead: bool = False,
) -> RunOutcome:
    """Consume trajectories one at a time until the leader is confidently the mode.

    ``stop_step`` is the number of trajectories consumed; the method is fully
    sequential so SeqTokens equals total tokens.
    """
    if not 0.5 < threshold < 1:
        raise ValueError("threshold must lie in (0.5, 1)")
    if mc_draws < 1000:
        raise ValueError("mc_draws must be >= 1000")
    m = leading(matrix, max_width)
    rng = np.random.default_rng(rng_seed & 0xFFFFFFFFFFFFFFFF)
    full = consumed_tokens(m, m.finish_steps, include_probe_overhead)
    counts = np.zeros(len(m.answers), dtype=np.int64)
    used = np.zeros(m.width, dtype=np.int64)
    reason = ALL_FINISHED
    n = 0
    for i in range(m.width):
        n = i + 1
        used[i] = full[i]
        code = int(m.final_codes[i])
        if code != ABSTAIN_CODE:
            counts[code] += 1
        observed = np.flatnonzero(counts)
        if observed.size == 0:
            continue
        obs_counts = counts[observed]
        leader = int(np.argmax(obs_counts))
        if majority_probability_mc(obs_counts, leader, mc_draws, rng) >= threshold:
            reason = CONSENSUS_STABLE
            break
    predicted = m.decode(vote_codes(m.final_codes[:n], len(m.answers)))
    total = int(used.sum())
    return RunOutcome(
        predicted=predicted,
        stop_step=n,
        stop_reason=reason,
        consumed_tokens=tuple(int(x) for x in used),
        seq_tokens=total,
        total_tokens=total,
    )
