"""Branch x probe-step answer matrix with carry-forward after termination.

Answers are interned to integer codes in lexicographic order of their
canonical text, so "smallest code among the most frequent" is exactly the
vote tie-break used by :func:`probectl.answers.mode`. ABSTAIN is code -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .answers import ABSTAIN, Answer, mode
from .pool import ProblemPool

ABSTAIN_CODE = -1


def vote_codes(codes: np.ndarray, n_labels: int) -> int:
    """Most frequent non-abstain code (smallest code on ties), or -1."""
    valid = codes[codes >= 0]
    if valid.size == 0:
        return ABSTAIN_CODE
    return int(np.argmax(np.bincount(valid, minlength=n_labels)))


@dataclass(frozen=True, eq=False)
class ProbeMatrix:
    delta: int
    codes: np.ndarray  # (width, horizon), carry-forward applied
    final_codes: np.ndarray  # (width,)
    n_probes: np.ndarray  # (width,)
    natural: np.ndarray  # (width,) natural length in tokens
    overhead: np.ndarray  # (width,) probe overhead tokens, 0 when unknown
    answers: tuple[Answer, ...]  # code -> Answer
    problem_id: str = ""
    gold: Answer | None = None

    @property
    def width(self) -> int:
        return self.codes.shape[0]

    @property
    def horizon(self) -> int:
        return self.codes.shape[1]

    @property
    def labels(self) -> list[str]:
        return [a.canonical for a in self.answers]

    @property
    def finish_steps(self) -> np.ndarray:
        return -(-self.natural // self.delta)

    def decode(self, code: int) -> Answer:
        return ABSTAIN if code < 0 else self.answers[code]

    def encode(self, answer: Answer) -> int:
        if answer.is_abstain:
            return ABSTAIN_CODE
        lo, hi = 0, len(self.answers)
        key = answer.canonical
        while lo < hi:
            mid = (lo + hi) // 2
            if self.answers[mid].canonical < key:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(self.answers) and self.answers[lo].canonical == key:
            return lo
        raise KeyError(key)

    def code(self, i: int, t: int) -> int:
        if t < 1:
            raise IndexError("probe steps start at 1")
        if t > self.horizon:
            return int(self.final_codes[i])
        return int(self.codes[i, t - 1])

    def cell(self, i: int, t: int) -> Answer:
        return self.decode(self.code(i, t))

    def alive(self, i: int, t: int) -> bool:
        return 1 <= t <= int(self.n_probes[i])

    def column(self, t: int) -> np.ndarray:
        if t > self.horizon:
            return self.final_codes
        return self.codes[:, t - 1]

    def tokens_at(self, steps) -> np.ndarray:
        """Tokens generated by each branch after running ``steps`` probe steps."""
        return np.minimum(self.natural, np.asarray(steps, dtype=np.int64) * self.delta)

    def snapshot(self, t: int, active: Iterable[int] | None = None) -> list[Answer]:
        rows = range(self.width) if active is None else sorted(active)
        return [self.cell(i, t) for i in rows]

    def select(self, rows: Sequence[int]) -> "ProbeMatrix":
        """Sub-matrix of the given rows (re-indexed 0..len-1), horizon recomputed."""
        rows = np.asarray(rows, dtype=np.intp)
        natural = self.natural[rows]
        horizon = int((-(-natural // self.delta)).max())
        return ProbeMatrix(
            self.delta,
            self.codes[rows, :horizon],
            self.final_codes[rows],
            self.n_probes[rows],
            natural,
            self.overhead[rows],
            self.answers,
            self.problem_id,
            self.gold,
        )


def build_matrix(pool: ProblemPool) -> ProbeMatrix:
    delta = pool.probe_interval_tokens
    raw_for: dict[str, str] = {}
    for b in pool.branches:
        for a in (*b.probe_answers, b.final_answer):
            if not a.is_abstain:
                prev = raw_for.get(a.canonical)
                if prev is None or a.raw < prev:
                    raw_for[a.canonical] = a.raw
    labels = sorted(raw_for)
    index = {k: i for i, k in enumerate(labels)}
    answers = tuple(Answer(k, raw_for[k]) for k in labels)

    def enc(a: Answer) -> int:
        return ABSTAIN_CODE if a.is_abstain else index[a.canonical]

    width = len(pool.branches)
    natural = np.array([b.natural_length_tokens for b in pool.branches], dtype=np.int64)
    horizon = int((-(-natural // delta)).max())
    codes = np.empty((width, horizon), dtype=np.int32)
    final_codes = np.empty(width, dtype=np.int32)
    n_probes = np.empty(width, dtype=np.int64)
    overhead = np.zeros(width, dtype=np.int64)
    for i, b in enumerate(pool.branches):
        n = len(b.probe_answers)
        f = enc(b.final_answer)
        codes[i, :n] = [enc(a) for a in b.probe_answers]
        codes[i, n:] = f
        final_codes[i] = f
        n_probes[i] = n
        overhead[i] = b.probe_overhead_tokens or 0
    return ProbeMatrix(
        delta, codes, final_codes, n_probes, natural, overhead, answers,
        pool.problem_id, pool.gold_answer,
    )


def _active_for_step(active, t: int):
    if active is None:
        return None
    if isinstance(active, (set, frozenset)):
        return active
    return active[t - 1]


def consensus_series(matrix: ProbeMatrix, active=None, horizon: int | None = None) -> list[Answer]:
    """Per-step majority answer d_1..d_T.

    ``active`` is None (all branches), one index set used at every step, or a
    sequence with one index set per step (whose length then sets the default
    horizon).
    """
    per_step = active is not None and not isinstance(active, (set, frozenset))
    if horizon is not None:
        T = horizon
    else:
        T = len(active) if per_step else matrix.horizon
    out = []
    for t in range(1, T + 1):
        rows = _active_for_step(active, t)
        if rows is None:
            col = matrix.column(t)
        else:
            col = matrix.column(t)[sorted(rows)]
        if col.size == 0:
            # let answers.mode raise the canonical error
            mode([])
        out.append(matrix.decode(vote_codes(col, len(matrix.answers))))
    return out


def consensus_codes(matrix: ProbeMatrix) -> np.ndarray:
    """All-branch consensus codes for every step, vectorized."""
    n = len(matrix.answers)
    if n == 0:
        return np.full(matrix.horizon, ABSTAIN_CODE, dtype=np.int64)
    counts = np.zeros((matrix.horizon, n), dtype=np.int64)
    steps = np.broadcast_to(np.arange(matrix.horizon), matrix.codes.shape)
    mask = matrix.codes >= 0
    np.add.at(counts, (steps[mask], matrix.codes[mask]), 1)
    out = counts.argmax(axis=1)
    out[counts.max(axis=1) == 0] = ABSTAIN_CODE
    return out


def onset_from_series(series: Sequence) -> int:
    """Earliest 1-based step from which the series equals its last value."""
    last = series[-1]
    onset = len(series)
    while onset > 1 and series[onset - 2] == last:
        onset -= 1
    return onset


def convergence_onset(matrix: ProbeMatrix) -> tuple[int, float]:
    """Consensus onset step over all branches and its ratio to the longest branch."""
    onset = onset_from_series(list(consensus_codes(matrix)))
    ratio = onset * matrix.delta / int(matrix.natural.max())
    return onset, min(1.0, max(0.0, ratio))
