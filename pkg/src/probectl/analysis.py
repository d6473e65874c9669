"""Width-depth accuracy surface, coverage, convergence onset and scaling curves."""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .answers import Answer
from .errors import ConfigError, DepthBelowInterval, WidthExceedsPool
from .matrix import ABSTAIN_CODE, build_matrix, convergence_onset, vote_codes
from .pool import BranchTrace, PoolSet, draw_indices
from .sim import SimConfig, simulate


def answer_at_depth(branch: BranchTrace, depth_tokens: int, delta: int) -> Answer:
    """The branch's answer if it were cut off after ``depth_tokens`` tokens."""
    if depth_tokens < delta:
        raise DepthBelowInterval(f"depth {depth_tokens} is below the probe interval {delta}")
    if depth_tokens >= branch.natural_length_tokens:
        return branch.final_answer
    return branch.probe_answers[depth_tokens // delta - 1]


@dataclass(frozen=True)
class GridSpec:
    widths: tuple[int, ...]
    depths: tuple[int, ...]
    repeats: int = 16
    base_seed: int = 0
    coverage_threshold: int = 1

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(sorted(self.widths)))
        object.__setattr__(self, "depths", tuple(sorted(self.depths)))
        if not self.widths or min(self.widths) < 1:
            raise ConfigError("widths must be >= 1")
        if not self.depths:
            raise ConfigError("at least one depth is required")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")


@dataclass(frozen=True)
class SurfaceCell:
    width: int
    depth_tokens: int
    accuracy: float | None
    coverage_count: int
    stable: bool

    @property
    def budget(self) -> int:
        return self.width * self.depth_tokens


def _cell_seed(base_seed: int, problem_id: str, width: int, depth: int, repeat: int) -> int:
    key = f"surface\x1f{base_seed}\x1f{problem_id}\x1f{width}\x1f{depth}\x1f{repeat}"
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "little")


def _depth_codes(m, depth: int) -> np.ndarray:
    """Answer code of every branch truncated at ``depth`` tokens."""
    step = depth // m.delta
    done = m.natural <= depth
    col = m.codes[:, min(step, m.horizon) - 1]
    return np.where(done, m.final_codes, col)


def width_depth_surface(pools: PoolSet, spec: GridSpec) -> list[SurfaceCell]:
    cells = []
    mats = [build_matrix(p) for p in pools.pools]
    for p in pools.pools:
        if spec.widths[-1] > p.size:
            raise WidthExceedsPool(
                f"problem {p.problem_id!r}: width {spec.widths[-1]} exceeds pool of {p.size}"
            )
        if spec.depths[0] < p.probe_interval_tokens:
            raise DepthBelowInterval(
                f"depth {spec.depths[0]} is below the probe interval {p.probe_interval_tokens}"
            )
    for w in spec.widths:
        for L in spec.depths:
            accs = []
            coverage = 0
            for p, m in zip(pools.pools, mats):
                if int((m.natural >= L).sum()) >= w:
                    coverage += 1
                if p.gold_answer is None:
                    continue
                gold = m.encode(p.gold_answer) if p.gold_answer.canonical in m.labels else None
                codes = _depth_codes(m, L)
                hits = 0
                for r in range(spec.repeats):
                    idx = draw_indices(m.width, w, _cell_seed(spec.base_seed, p.problem_id, w, L, r))
                    win = vote_codes(codes[idx], len(m.answers))
                    hits += gold is not None and win != ABSTAIN_CODE and win == gold
                accs.append(hits / spec.repeats)
            cells.append(SurfaceCell(
                width=w,
                depth_tokens=L,
                accuracy=float(np.mean(accs)) if accs else None,
                coverage_count=coverage,
                stable=coverage >= spec.coverage_threshold,
            ))
    return cells


def surface_csv(cells: Sequence[SurfaceCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["width", "depth_tokens", "accuracy", "coverage", "budget", "stable"])
    for c in cells:
        acc = "" if c.accuracy is None else f"{c.accuracy:.6f}"
        w.writerow([c.width, c.depth_tokens, acc, c.coverage_count, c.budget, int(c.stable)])
    return buf.getvalue()


@dataclass(frozen=True)
class OnsetRecord:
    problem_id: str
    onset_step: int
    ratio: float


def onset_distribution(pools: PoolSet) -> tuple[list[OnsetRecord], float]:
    if not len(pools):
        raise ConfigError("no pools to analyze")
    recs = []
    for p in pools.pools:
        step, ratio = convergence_onset(build_matrix(p))
        recs.append(OnsetRecord(p.problem_id, step, ratio))
    return recs, float(np.mean([r.ratio for r in recs]))


def onset_csv(records: Sequence[OnsetRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["problem_id", "onset_step", "ratio"])
    for r in records:
        w.writerow([r.problem_id, r.onset_step, f"{r.ratio:.6f}"])
    return buf.getvalue()


@dataclass(frozen=True)
class CurvePoint:
    label: str
    width: int
    tokens: float
    seq_tokens: float
    accuracy_pct: float | None


def scaling_curve(pools: PoolSet, sweep: Sequence[SimConfig], jobs: int = 1) -> list[CurvePoint]:
    """One (mean total tokens, accuracy) point per config, sorted by tokens."""
    seeds = {c.base_seed for c in sweep}
    if len(seeds) > 1:
        raise ConfigError("scaling sweep configs must share base_seed")
    points = []
    for c in sweep:
        rep = simulate(c, pools, jobs)
        a = rep.aggregate
        points.append(CurvePoint(c.policy.display, c.width, a.mean_total_tokens,
                                 a.mean_seq_tokens, a.accuracy_pct))
    return sorted(points, key=lambda p: p.tokens)


def curve_csv(points: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["policy", "width", "total_tokens_mean", "seq_tokens_mean", "accuracy_pct"])
    for p in points:
        acc = "" if p.accuracy_pct is None else f"{p.accuracy_pct:.2f}"
        w.writerow([p.label, p.width, f"{p.tokens:.1f}", f"{p.seq_tokens:.1f}", acc])
    return buf.getvalue()
