"""Offline replay of policies over candidate pools with seeded resampling.

Every (problem, repeat) pair gets its own seed derived from the base seed and
the problem id, so results do not depend on iteration order or on how the
work is split across processes. Policies compared together see the exact
same branch subsets.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .errors import ConfigError, ConfigMismatch, WidthExceedsPool
from .matrix import build_matrix
from .policies import PolicySpec, run_policy
from .pool import PoolSet, ProblemPool, draw_indices, file_digest, pool_to_record


@dataclass(frozen=True)
class SimConfig:
    policy: PolicySpec
    repeats: int = 64
    width: int = 64
    base_seed: int = 0
    pool_path: str | None = None
    include_probe_overhead: bool = False
    exhaustive: bool = False
    exhaustive_cap: int = 10_000

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.width < 1:
            raise ConfigError("width must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["policy"] = self.policy.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        d["policy"] = PolicySpec.from_dict(d["policy"])
        return cls(**d)


@dataclass(frozen=True)
class ProblemResult:
    problem_id: str
    mean_accuracy: float | None
    mean_seq_tokens: float
    mean_total_tokens: float
    repeats: int


@dataclass(frozen=True)
class Aggregate:
    accuracy_pct: float | None
    mean_seq_tokens: float
    mean_total_tokens: float
    problems: int
    scored_problems: int


@dataclass(frozen=True)
class SimReport:
    per_problem: tuple[ProblemResult, ...]
    aggregate: Aggregate
    provenance: dict = field(default_factory=dict)

    def records(self) -> list[dict]:
        out = [{"type": "problem", **asdict(p)} for p in self.per_problem]
        out.append({"type": "aggregate", **asdict(self.aggregate), "provenance": self.provenance})
        return out

    def dumps(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


def repeat_seed(base_seed: int, problem_id: str, repeat: int) -> int:
    h = hashlib.blake2b(f"{base_seed}\x1f{problem_id}\x1f{repeat}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def subsample_plan(pool_size: int, problem_id: str, width: int, repeats: int, base_seed: int,
                   exhaustive: bool = False, cap: int = 10_000) -> list[tuple[int, np.ndarray]]:
    """(seed, branch indices) for every repeat of one problem."""
    if width > pool_size:
        raise WidthExceedsPool(
            f"problem {problem_id!r}: width {width} exceeds pool of {pool_size} branches"
        )
    if exhaustive and math.comb(pool_size, width) <= cap:
        return [
            (repeat_seed(base_seed, problem_id, r), np.array(c))
            for r, c in enumerate(itertools.combinations(range(pool_size), width))
        ]
    plan = []
    for r in range(repeats):
        seed = repeat_seed(base_seed, problem_id, r)
        plan.append((seed, draw_indices(pool_size, width, seed)))
    return plan


def _run_problem(pool: ProblemPool, specs: Sequence[PolicySpec], cfg: SimConfig):
    full = build_matrix(pool)
    plan = subsample_plan(pool.size, pool.problem_id, cfg.width, cfg.repeats, cfg.base_seed,
                          cfg.exhaustive, cfg.exhaustive_cap)
    gold = pool.gold_answer
    per_spec = []
    trace = []
    for j, spec in enumerate(specs):
        rows = np.empty((len(plan), 3), dtype=float)
        for r, (seed, idx) in enumerate(plan):
            m = full.select(idx)
            trace.append((r, j, tuple(int(i) for i in idx)))
            out = run_policy(spec, m, cfg.width, seed, cfg.include_probe_overhead)
            correct = gold is not None and out.predicted == gold
            rows[r] = (correct, out.seq_tokens, out.total_tokens)
        per_spec.append(rows)
    return pool.problem_id, gold is not None, per_spec, trace


def _run_problem_star(args):
    return _run_problem(*args)


def _pool_digest(cfg: SimConfig, pools: PoolSet) -> str:
    if cfg.pool_path and Path(cfg.pool_path).exists():
        return file_digest(cfg.pool_path)
    h = hashlib.sha256()
    for p in pools.pools:
        h.update(json.dumps(pool_to_record(p), sort_keys=True).encode())
    return "sha256:" + h.hexdigest()


def _report(rows_by_problem, cfg: SimConfig, digest: str) -> SimReport:
    per = []
    for pid, scored, rows in rows_by_problem:
        per.append(ProblemResult(
            problem_id=pid,
            mean_accuracy=float(rows[:, 0].mean()) if scored else None,
            mean_seq_tokens=float(rows[:, 1].mean()),
            mean_total_tokens=float(rows[:, 2].mean()),
            repeats=int(rows.shape[0]),
        ))
    scored = [p.mean_accuracy for p in per if p.mean_accuracy is not None]
    agg = Aggregate(
        accuracy_pct=100.0 * float(np.mean(scored)) if scored else None,
        mean_seq_tokens=float(np.mean([p.mean_seq_tokens for p in per])) if per else 0.0,
        mean_total_tokens=float(np.mean([p.mean_total_tokens for p in per])) if per else 0.0,
        problems=len(per),
        scored_problems=len(scored),
    )
    prov = {"config": cfg.to_dict(), "seed": cfg.base_seed, "pool_digest": digest}
    return SimReport(tuple(per), agg, prov)


def _execute(pools: PoolSet, specs, cfg: SimConfig, jobs: int):
    tasks = [(p, specs, cfg) for p in pools.pools]
    for p in pools.pools:
        if cfg.width > p.size:
            raise WidthExceedsPool(
                f"problem {p.problem_id!r}: width {cfg.width} exceeds pool of {p.size} branches"
            )
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_run_problem_star, tasks, chunksize=1))
    return [_run_problem(*t) for t in tasks]


def simulate(cfg: SimConfig, pools: PoolSet, jobs: int = 1) -> SimReport:
    results = _execute(pools, [cfg.policy], cfg, jobs)
    rows = [(pid, scored, per[0]) for pid, scored, per, _ in results]
    return _report(rows, cfg, _pool_digest(cfg, pools))


# -- comparisons --------------------------------------------------------------

TABLE_COLUMNS = (
    "policy", "accuracy_pct", "seq_tokens_mean", "total_tokens_mean",
    "seq_delta_pct", "total_delta_pct",
)
SHARED_FIELDS = ("pool_path", "width", "repeats", "base_seed", "include_probe_overhead",
                 "exhaustive", "exhaustive_cap")


def format_k(tokens: float) -> str:
    return f"{tokens / 1000:.1f}k"


def format_delta(baseline: float, value: float) -> str:
    if baseline == 0:
        return ""
    return f"{(value - baseline) / baseline * 100:+.1f}%"


@dataclass(frozen=True)
class Comparison:
    labels: tuple[str, ...]
    reports: tuple[SimReport, ...]
    baseline: int = 0

    def rows(self) -> list[dict[str, Any]]:
        base = self.reports[self.baseline].aggregate
        out = []
        for i, (label, rep) in enumerate(zip(self.labels, self.reports)):
            a = rep.aggregate
            out.append({
                "policy": label,
                "accuracy_pct": a.accuracy_pct,
                "seq_tokens_mean": a.mean_seq_tokens,
                "total_tokens_mean": a.mean_total_tokens,
                "seq_delta_pct": "" if i == self.baseline else format_delta(base.mean_seq_tokens, a.mean_seq_tokens),
                "total_delta_pct": "" if i == self.baseline else format_delta(base.mean_total_tokens, a.mean_total_tokens),
            })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for r in self.rows():
            acc = "" if r["accuracy_pct"] is None else f"{r['accuracy_pct']:.2f}"
            w.writerow([r["policy"], acc, f"{r['seq_tokens_mean']:.1f}",
                        f"{r['total_tokens_mean']:.1f}", r["seq_delta_pct"], r["total_delta_pct"]])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"{'policy':<24} {'acc':>6} {'seq':>16} {'total':>18}"]
        for r in self.rows():
            acc = "n/a" if r["accuracy_pct"] is None else f"{r['accuracy_pct']:.1f}"
            seq = format_k(r["seq_tokens_mean"])
            tot = format_k(r["total_tokens_mean"])
            if r["seq_delta_pct"]:
                seq += f" ({r['seq_delta_pct']})"
                tot += f" ({r['total_delta_pct']})"
            lines.append(f"{r['policy']:<24} {acc:>6} {seq:>16} {tot:>18}")
        return "\n".join(lines) + "\n"


def compare(
    configs: Sequence[SimConfig],
    pools: PoolSet,
    baseline: int = 0,
    jobs: int = 1,
    on_subsample: Callable[[str, int, str, tuple[int, ...]], None] | None = None,
) -> Comparison:
    """Run several policies over identical per-(problem, repeat) subsamples.

    ``on_subsample(problem_id, repeat, policy_label, pool_indices)`` is called
    once per policy run, for instrumentation.
    """
    if not configs:
        raise ConfigError("compare needs at least one config")
    first = configs[0]
    for c in configs[1:]:
        for f in SHARED_FIELDS:
            if getattr(c, f) != getattr(first, f):
                raise ConfigMismatch(f"configs disagree on {f}: {getattr(first, f)!r} vs {getattr(c, f)!r}")
    labels = tuple(c.policy.display for c in configs)
    if len(set(labels)) != len(labels):
        labels = tuple(f"{lab}#{i}" for i, lab in enumerate(labels))
    specs = [c.policy for c in configs]
    results = _execute(pools, specs, first, jobs)
    digest = _pool_digest(first, pools)
    reports = []
    for j, cfg in enumerate(configs):
        rows = [(pid, scored, per[j]) for pid, scored, per, _ in results]
        reports.append(_report(rows, cfg, digest))
    if on_subsample is not None:
        for pid, _, _, trace in results:
            for r, j, idx in trace:
                on_subsample(pid, r, labels[j], idx)
    return Comparison(labels, tuple(reports), baseline)
