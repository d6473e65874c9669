from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..answers import Answer
from ..errors import ConfigError
from ..matrix import ProbeMatrix

CONSENSUS_STABLE = "consensus_stable"
BUDGET_EXHAUSTED = "budget_exhausted"
ALL_FINISHED = "all_branches_finished"
STOP_REASONS = (CONSENSUS_STABLE, BUDGET_EXHAUSTED, ALL_FINISHED)


@dataclass(frozen=True)
class PolicyConfig:
    """Parallel-Probe knobs.

    ``max_steps=None`` means no cap beyond the matrix horizon. The three
    ``enable_*`` flags are the ablation switches.
    """

    width: int = 64
    stability_window: int = 10
    prune_lookback: int = 10
    warmup_steps: int = 12
    max_steps: int | None = None
    enable_pruning: bool = True
    enable_stopping: bool = True
    enable_warmup: bool = True

    def __post_init__(self):
        if self.width < 1:
            raise ConfigError("width must be >= 1")
        if self.stability_window < 1:
            raise ConfigError("stability_window (u) must be >= 1")
        if self.prune_lookback < 1:
            raise ConfigError("prune_lookback (k) must be >= 1")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if self.warmup_steps < 0:
            raise ConfigError("warmup_steps must be >= 0")
        if self.enable_warmup and self.warmup_steps < 1:
            raise ConfigError("warmup enabled requires warmup_steps >= 1")


@dataclass(frozen=True)
class StepAction:
    prune_set: frozenset[int] = frozenset()
    stop: bool = False
    predicted: Answer | None = None


@dataclass(frozen=True)
class RunOutcome:
    predicted: Answer
    stop_step: int
    stop_reason: str
    consumed_tokens: tuple[int, ...]
    seq_tokens: int
    total_tokens: int
    pruned_at: dict[int, int] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()


def consumed_tokens(
    matrix: ProbeMatrix, exit_steps: np.ndarray, include_probe_overhead: bool = False
) -> np.ndarray:
    """Per-branch tokens after each branch ran ``exit_steps`` probe steps.

    Probe overhead, when included, is charged pro rata to the fraction of the
    branch's steps that actually ran.
    """
    exit_steps = np.asarray(exit_steps, dtype=np.int64)
    used = matrix.tokens_at(exit_steps)
    if include_probe_overhead:
        finish = matrix.finish_steps
        used = used + matrix.overhead * np.minimum(exit_steps, finish) // finish
    return used


def parallel_outcome(
    matrix: ProbeMatrix,
    predicted: Answer,
    stop_step: int,
    reason: str,
    exit_steps: np.ndarray,
    include_probe_overhead: bool = False,
    pruned_at: dict[int, int] | None = None,
    warnings: tuple[str, ...] = (),
) -> RunOutcome:
    used = consumed_tokens(matrix, exit_steps, include_probe_overhead)
    return RunOutcome(
        predicted=predicted,
        stop_step=int(stop_step),
        stop_reason=reason,
        consumed_tokens=tuple(int(x) for x in used),
        seq_tokens=int(used.max()),
        total_tokens=int(used.sum()),
        pruned_at=dict(pruned_at or {}),
        warnings=warnings,
    )


def leading(matrix: ProbeMatrix, width: int) -> ProbeMatrix:
    if width > matrix.width:
        raise ConfigError(f"width {width} exceeds matrix width {matrix.width}")
    if width < 1:
        raise ConfigError("width must be >= 1")
    return matrix if width == matrix.width else matrix.select(range(width))
