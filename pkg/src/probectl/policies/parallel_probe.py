"""Consensus-based early stopping plus deviation-based pruning."""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np

from ..answers import Answer
from ..matrix import ProbeMatrix, vote_codes
from .base import (
    ALL_FINISHED,
    BUDGET_EXHAUSTED,
    CONSENSUS_STABLE,
    PolicyConfig,
    RunOutcome,
    StepAction,
    leading,
    parallel_outcome,
)

log = logging.getLogger(__name__)


class ProbeController:
    """Step-wise controller state.

    Feed one column of answer codes (all branches, carry-forward applied) per
    probe step via :meth:`step`. Rows of pruned branches are ignored.
    ``vote`` maps an array of codes to the winning code.
    """

    def __init__(self, cfg: PolicyConfig, width: int, vote: Callable[[np.ndarray], int],
                 decode: Callable[[int], Answer]):
        self.cfg = cfg
        self.vote = vote
        self.decode = decode
        self.active = np.ones(width, dtype=bool)
        self.streak = np.zeros(width, dtype=np.int64)
        self.history: list[int] = []
        self.pruned_at: dict[int, int] = {}
        self.warnings: list[str] = []
        self.t = 0

    @property
    def gate_open(self) -> bool:
        cfg = self.cfg
        return not cfg.enable_warmup or self.t >= cfg.warmup_steps

    def step(self, column: np.ndarray) -> StepAction:
        cfg = self.cfg
        self.t += 1
        t = self.t
        d = self.vote(column[self.active])
        self.history.append(d)
        # consecutive-deviation counters; pruned rows are frozen and never read
        self.streak = np.where(column != d, self.streak + 1, 0)

        prune = frozenset()
        if self.gate_open and cfg.enable_pruning and t >= cfg.prune_lookback:
            hits = np.flatnonzero(self.active & (self.streak >= cfg.prune_lookback))
            if hits.size and hits.size == int(self.active.sum()):
                keep = int(hits[0])
                msg = f"step {t}: pruning would empty the active set; kept branch {keep}"
                log.warning(msg)
                self.warnings.append(msg)
                hits = hits[1:]
            if hits.size:
                self.active[hits] = False
                for i in hits:
                    self.pruned_at[int(i)] = t
                prune = frozenset(int(i) for i in hits)

        if self.gate_open and cfg.enable_stopping and t >= cfg.stability_window:
            window = self.history[-cfg.stability_window:]
            if all(x == d for x in window):
                return StepAction(prune, True, self.decode(d))
        return StepAction(prune)


def run_parallel_probe(
    matrix: ProbeMatrix, cfg: PolicyConfig, include_probe_overhead: bool = False
) -> RunOutcome:
    m = leading(matrix, cfg.width)
    n_labels = len(m.answers)
    ctl = ProbeController(cfg, m.width, lambda col: vote_codes(col, n_labels), m.decode)
    finish = m.finish_steps
    last = m.horizon if cfg.max_steps is None else min(cfg.max_steps, m.horizon)

    reason = BUDGET_EXHAUSTED
    predicted = None
    end = last
    for t in range(1, last + 1):
        action = ctl.step(m.column(t))
        if action.stop:
            reason, predicted, end = CONSENSUS_STABLE, action.predicted, t
            break
        if finish[ctl.active].max() <= t:
            reason, end = ALL_FINISHED, t
            break

    if predicted is None:
        survivors = np.flatnonzero(ctl.active)
        done = finish[survivors] <= end
        # unfinished survivors answer with their forced answer at the budget
        final = np.where(done, m.final_codes[survivors], m.codes[survivors, end - 1])
        predicted = m.decode(vote_codes(final, n_labels))

    exit_steps = np.full(m.width, end, dtype=np.int64)
    for i, s in ctl.pruned_at.items():
        exit_steps[i] = s
    return parallel_outcome(
        m, predicted, end, reason, exit_steps, include_probe_overhead,
        ctl.pruned_at, tuple(ctl.warnings),
    )

