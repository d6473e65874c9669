"""Candidate pools: frozen per-problem probed trajectories.

One pool file holds one problem per line::

    {"problem_id": "p0", "gold_answer": "42", "probe_interval_tokens": 500,
     "branches": [{"branch_id": 0, "probe_answers": ["41"],
                   "cumulative_tokens": [500], "final_answer": "42",
                   "natural_length_tokens": 730, "probe_overhead_tokens": 12}]}

Answers are stored raw and canonicalized on load.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .answers import Answer, canonicalize
from .errors import ParseError, ValidationError, WidthExceedsPool


@dataclass(frozen=True)
class BranchTrace:
    branch_id: int
    probe_answers: tuple[Answer, ...]
    cumulative_tokens: tuple[int, ...]
    final_answer: Answer
    natural_length_tokens: int
    probe_overhead_tokens: int | None = None

    @property
    def n_probes(self) -> int:
        return len(self.probe_answers)

    def finish_step(self, delta: int) -> int:
        """Probe step during which the branch reaches its natural end."""
        return math.ceil(self.natural_length_tokens / delta)

    def reindexed(self, branch_id: int) -> "BranchTrace":
        return BranchTrace(
            branch_id,
            self.probe_answers,
            self.cumulative_tokens,
            self.final_answer,
            self.natural_length_tokens,
            self.probe_overhead_tokens,
        )


@dataclass(frozen=True)
class ProblemPool:
    problem_id: str
    gold_answer: Answer | None
    probe_interval_tokens: int
    branches: tuple[BranchTrace, ...]

    @property
    def size(self) -> int:
        return len(self.branches)


@dataclass(frozen=True)
class PoolSet:
    pools: tuple[ProblemPool, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.pools)

    def __iter__(self):
        return iter(self.pools)

    def by_id(self, problem_id: str) -> ProblemPool:
        for p in self.pools:
            if p.problem_id == problem_id:
                return p
        raise KeyError(problem_id)


# -- validation ---------------------------------------------------------------


def branch_violations(branch: BranchTrace, delta: int) -> list[str]:
    """List every invariant the branch breaks (empty when valid)."""
    out = []
    probes, cum = branch.probe_answers, branch.cumulative_tokens
    nat = branch.natural_length_tokens
    if not isinstance(nat, int) or nat <= 0:
        out.append("natural_length_tokens must be a positive integer")
        return out
    if len(probes) != len(cum):
        out.append("probe_answers and cumulative_tokens differ in length")
    if any(not isinstance(c, int) or c < 0 for c in cum):
        out.append("negative or non-integer cumulative tokens")
    if any(b <= a for a, b in zip(cum, cum[1:])):
        out.append("non-increasing tokens")
    if cum and cum[-1] > nat:
        out.append("cumulative tokens exceed natural length")
    for t, c in enumerate(cum, start=1):
        if c != min(t * delta, nat):
            out.append(f"cumulative_tokens[{t - 1}]={c} is not min({t}*{delta}, {nat})")
            break
    # every interval boundary strictly before the natural end must be probed
    if len(probes) < math.ceil(nat / delta) - 1:
        out.append("missing probes before natural termination")
    if branch.probe_overhead_tokens is not None and branch.probe_overhead_tokens < 0:
        out.append("negative probe_overhead_tokens")
    return out


def validate_pool(pool: ProblemPool) -> None:
    pid = pool.problem_id
    if not isinstance(pool.probe_interval_tokens, int) or pool.probe_interval_tokens <= 0:
        raise ValidationError(pid, None, "probe_interval_tokens must be a positive integer")
    if not pool.branches:
        raise ValidationError(pid, None, "pool has no branches")
    ids = [b.branch_id for b in pool.branches]
    if ids != list(range(len(ids))):
        raise ValidationError(pid, None, "branch_ids must be unique and contiguous from 0")
    for b in pool.branches:
        problems = branch_violations(b, pool.probe_interval_tokens)
        if problems:
            raise ValidationError(pid, b.branch_id, problems[0])


def validate_poolset(pools: PoolSet) -> None:
    seen = set()
    for p in pools.pools:
        if p.problem_id in seen:
            raise ValidationError(p.problem_id, None, "duplicate problem_id")
        seen.add(p.problem_id)
        validate_pool(p)


# -- persistence --------------------------------------------------------------


def _branch_from_record(rec: dict) -> BranchTrace:
    return BranchTrace(
        branch_id=rec["branch_id"],
        probe_answers=tuple(canonicalize(a) for a in rec["probe_answers"]),
        cumulative_tokens=tuple(rec["cumulative_tokens"]),
        final_answer=canonicalize(rec["final_answer"]),
        natural_length_tokens=rec["natural_length_tokens"],
        probe_overhead_tokens=rec.get("probe_overhead_tokens"),
    )


def pool_from_record(rec: dict) -> ProblemPool:
    gold = rec.get("gold_answer")
    return ProblemPool(
        problem_id=str(rec["problem_id"]),
        gold_answer=None if gold is None else canonicalize(gold),
        probe_interval_tokens=rec["probe_interval_tokens"],
        branches=tuple(_branch_from_record(b) for b in rec["branches"]),
    )


def pool_to_record(pool: ProblemPool) -> dict:
    rec: dict[str, Any] = {"problem_id": pool.problem_id}
    if pool.gold_answer is not None:
        rec["gold_answer"] = pool.gold_answer.raw
    rec["probe_interval_tokens"] = pool.probe_interval_tokens
    rec["branches"] = [
        {
            "branch_id": b.branch_id,
            "probe_answers": [a.raw for a in b.probe_answers],
            "cumulative_tokens": list(b.cumulative_tokens),
            "final_answer": b.final_answer.raw,
            "natural_length_tokens": b.natural_length_tokens,
            "probe_overhead_tokens": b.probe_overhead_tokens,
        }
        for b in pool.branches
    ]
    return rec


def parse_pool_lines(lines: Iterable[str]) -> PoolSet:
    pools = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise ParseError(lineno, "record is not an object")
        try:
            pool = pool_from_record(rec)
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(lineno, f"malformed record ({exc!r})") from None
        pools.append(pool)
    ps = PoolSet(tuple(pools))
    validate_poolset(ps)
    return ps


def pool_violations(pool: ProblemPool) -> list[str]:
    pid = pool.problem_id
    out = []
    if not isinstance(pool.probe_interval_tokens, int) or pool.probe_interval_tokens <= 0:
        return [f"problem {pid!r}: probe_interval_tokens must be a positive integer"]
    if not pool.branches:
        out.append(f"problem {pid!r}: pool has no branches")
    if [b.branch_id for b in pool.branches] != list(range(len(pool.branches))):
        out.append(f"problem {pid!r}: branch_ids must be unique and contiguous from 0")
    for b in pool.branches:
        for v in branch_violations(b, pool.probe_interval_tokens):
            out.append(f"problem {pid!r}, branch {b.branch_id}: {v}")
    return out


def scan_pool_file(path: str | Path) -> tuple[int, int, list[str]]:
    """Check a pool file without stopping at the first problem.

    Returns (pool count, branch count, violation messages).
    """
    n_pools = n_branches = 0
    problems: list[str] = []
    seen: set[str] = set()
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise TypeError("record is not an object")
                pool = pool_from_record(rec)
            except json.JSONDecodeError as exc:
                problems.append(f"line {lineno}: invalid JSON ({exc.msg})")
                continue
            except (KeyError, TypeError, AttributeError) as exc:
                problems.append(f"line {lineno}: malformed record ({exc!r})")
                continue
            n_pools += 1
            n_branches += pool.size
            if pool.problem_id in seen:
                problems.append(f"line {lineno}: duplicate problem_id {pool.problem_id!r}")
            seen.add(pool.problem_id)
            problems.extend(f"line {lineno}: {v}" for v in pool_violations(pool))
    return n_pools, n_branches, problems


def load_pools(path: str | Path) -> PoolSet:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        ps = parse_pool_lines(fh)
    return PoolSet(ps.pools, {"source": str(path)})


def save_pools(pools: PoolSet, path: str | Path) -> None:
    validate_poolset(pools)
    with Path(path).open("w", encoding="utf-8") as fh:
        for p in pools.pools:
            fh.write(json.dumps(pool_to_record(p), ensure_ascii=False))
            fh.write("\n")


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


# -- resampling ---------------------------------------------------------------


def draw_indices(pool_size: int, width: int, rng_seed: int) -> np.ndarray:
    """Indices of ``width`` distinct branches, in draw order."""
    if width < 1:
        raise ValueError("width must be positive")
    if width > pool_size:
        raise WidthExceedsPool(f"width {width} exceeds pool of {pool_size} branches")
    rng = np.random.default_rng(rng_seed & 0xFFFFFFFFFFFFFFFF)
    return rng.permutation(pool_size)[:width]


def take_branches(pool: ProblemPool, indices: Sequence[int]) -> ProblemPool:
    branches = tuple(pool.branches[int(j)].reindexed(i) for i, j in enumerate(indices))
    return ProblemPool(pool.problem_id, pool.gold_answer, pool.probe_interval_tokens, branches)


def subsample(pool: ProblemPool, width: int, rng_seed: int) -> ProblemPool:
    """Uniform draw of ``width`` branches without replacement, re-indexed from 0."""
    return take_branches(pool, draw_indices(pool.size, width, rng_seed))
