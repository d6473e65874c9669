"""Live 2D probing: pool collection and on-line Parallel-Probe control.

Each branch alternates between generating up to the next probe boundary and
a side request that appends the answer-forcing suffix to a copy of the
prefix. Probe output never enters the reasoning prefix.
"""

from __future__ import annotations

import asyncio
import logging
import re
import time
from dataclasses import dataclass, field
from typing import Awaitable, Callable

import numpy as np

from ..answers import ABSTAIN, Answer, canonicalize
from ..errors import ConfigError
from ..policies import (
    ALL_FINISHED,
    BUDGET_EXHAUSTED,
    CONSENSUS_STABLE,
    PolicyConfig,
    ProbeController,
    RunOutcome,
)
from ..pool import BranchTrace, PoolSet, ProblemPool, validate_pool
from .transport import (
    EndpointConfig,
    GenRequest,
    ProbeProtocolConfig,
    Transport,
    TransportError,
    with_retry,
)

log = logging.getLogger(__name__)

_BOXED = re.compile(r"\\boxed\{([^{}]*)\}")


@dataclass(frozen=True)
class Problem:
    problem_id: str
    prompt: str
    gold: str | None = None


def extract_answer(text: str) -> Answer:
    """Answer from a forced-answer reply: last \\boxed{} if any, else first line."""
    boxed = _BOXED.findall(text)
    if boxed:
        return canonicalize(boxed[-1])
    line = text.strip().split("\n", 1)[0].strip()
    line = line.rstrip(".").strip()
    return canonicalize(line)


@dataclass
class _Branch:
    branch_id: int
    prefix: str
    tokens: int = 0
    overhead: int = 0
    probes: list = field(default_factory=list)
    cumulative: list = field(default_factory=list)
    final: Answer | None = None
    closed: bool = False
    error: str | None = None

    @property
    def last_answer(self) -> Answer:
        if self.final is not None:
            return self.final
        return self.probes[-1] if self.probes else ABSTAIN

    def trace(self) -> BranchTrace:
        return BranchTrace(
            branch_id=self.branch_id,
            probe_answers=tuple(self.probes),
            cumulative_tokens=tuple(self.cumulative),
            final_answer=self.final if self.final is not None else ABSTAIN,
            natural_length_tokens=max(self.tokens, 1),
            probe_overhead_tokens=self.overhead,
        )


class _Session:
    def __init__(self, transport: Transport, endpoint: EndpointConfig,
                 protocol: ProbeProtocolConfig, seed: int | None = 0,
                 sleep: Callable[[float], Awaitable[None]] = asyncio.sleep):
        self.transport = transport
        self.endpoint = endpoint
        self.protocol = protocol
        self.seed = seed
        self.sleep = sleep
        self.sem = asyncio.Semaphore(endpoint.max_concurrent_requests)
        self.retry_trace: list[str] = []
        self.approximate = False

    async def call(self, req: GenRequest):
        ep = self.endpoint

        async def once():
            async with self.sem:
                return await self.transport.generate(req)

        comp = await with_retry(once, ep.max_attempts, ep.backoff_base, ep.backoff_max,
                                self.sleep, self.retry_trace)
        self.approximate |= comp.approximate
        return comp

    def _seed(self, b: _Branch):
        return None if self.seed is None else self.seed + b.branch_id

    async def probe(self, b: _Branch, step: int) -> Answer:
        p = self.protocol
        req = GenRequest(
            prompt=b.prefix + p.answer_forcing_suffix,
            max_tokens=p.answer_max_tokens,
            kind="probe",
            branch_id=b.branch_id,
            step=step,
            stop=tuple(p.stop_sequences),
            seed=self._seed(b),
        )
        comp = await self.call(req)
        b.overhead += comp.n_tokens
        return extract_answer(comp.text)

    async def advance(self, b: _Branch, step: int) -> Answer:
        """Run branch ``b`` through probe step ``step``; return its answer there."""
        delta = self.protocol.probe_interval_tokens
        ceiling = self.endpoint.sampling.max_new_tokens
        target = min(step * delta, ceiling)
        finished = False
        while b.tokens < target and not finished:
            req = GenRequest(
                prompt=b.prefix,
                max_tokens=target - b.tokens,
                kind="generate",
                branch_id=b.branch_id,
                step=step,
                seed=self._seed(b),
            )
            comp = await self.call(req)
            b.prefix += comp.text
            b.tokens += comp.n_tokens
            finished = comp.finished or comp.n_tokens == 0
        if finished or b.tokens >= ceiling:
            b.final = await self.probe(b, step)
            b.closed = True
            return b.final
        ans = await self.probe(b, step)
        b.probes.append(ans)
        b.cumulative.append(b.tokens)
        return ans


def _pool(problem: Problem, protocol: ProbeProtocolConfig, branches: list[_Branch]) -> ProblemPool:
    pool = ProblemPool(
        problem_id=problem.problem_id,
        gold_answer=None if problem.gold is None else canonicalize(problem.gold),
        probe_interval_tokens=protocol.probe_interval_tokens,
        branches=tuple(b.trace() for b in branches),
    )
    validate_pool(pool)
    return pool


async def collect_pool_async(problem: Problem, endpoint: EndpointConfig,
                             protocol: ProbeProtocolConfig, transport: Transport,
                             seed: int | None = 0, sleep=asyncio.sleep,
                             session: _Session | None = None) -> ProblemPool:
    s = session or _Session(transport, endpoint, protocol, seed, sleep)
    branches = [_Branch(i, problem.prompt) for i in range(protocol.branches)]

    async def run(b: _Branch):
        step = 0
        while not b.closed:
            step += 1
            await s.advance(b, step)

    tasks = [asyncio.ensure_future(run(b)) for b in branches]
    try:
        await asyncio.gather(*tasks)
    except BaseException:
        for t in tasks:
            t.cancel()
        await asyncio.gather(*tasks, return_exceptions=True)
        raise
    return _pool(problem, protocol, branches)


def collect_pool(problem: Problem, endpoint: EndpointConfig, protocol: ProbeProtocolConfig,
                 transport: Transport, seed: int | None = 0) -> ProblemPool:
    return asyncio.run(collect_pool_async(problem, endpoint, protocol, transport, seed))


async def collect_pools_async(problems, endpoint, protocol, transport, seed=0) -> PoolSet:
    s = _Session(transport, endpoint, protocol, seed)
    pools = []
    for p in problems:
        pools.append(await collect_pool_async(p, endpoint, protocol, transport, seed, session=s))
    meta = {
        "model": endpoint.model_name,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "approximate_token_counts": s.approximate,
    }
    return PoolSet(tuple(pools), meta)


@dataclass(frozen=True)
class FailedRun:
    reason: str
    steps_completed: int
    consumed_tokens: tuple[int, ...]
    errors: tuple[str, ...]
    retry_trace: tuple[str, ...] = ()


class _Interner:
    """Codes in first-seen order; votes break ties on the canonical text."""

    def __init__(self):
        self.answers: list[Answer] = []
        self.index: dict[str, int] = {}

    def code(self, a: Answer) -> int:
        if a.is_abstain:
            return -1
        c = self.index.get(a.canonical)
        if c is None:
            c = self.index[a.canonical] = len(self.answers)
            self.answers.append(a)
        return c

    def decode(self, c: int) -> Answer:
        return ABSTAIN if c < 0 else self.answers[c]

    def vote(self, codes: np.ndarray) -> int:
        valid = codes[codes >= 0]
        if valid.size == 0:
            return -1
        counts = np.bincount(valid, minlength=len(self.answers))
        tied = np.flatnonzero(counts == counts.max())
        return int(min(tied, key=lambda c: self.answers[c].canonical))


async def run_live_async(problem: Problem, endpoint: EndpointConfig,
                         protocol: ProbeProtocolConfig, cfg: PolicyConfig,
                         transport: Transport, seed: int | None = 0,
                         sleep=asyncio.sleep) -> RunOutcome | FailedRun:
    if cfg.width != protocol.branches:
        raise ConfigError(f"policy width {cfg.width} != protocol branches {protocol.branches}")
    s = _Session(transport, endpoint, protocol, seed, sleep)
    n = protocol.branches
    branches = [_Branch(i, problem.prompt) for i in range(n)]
    names = _Interner()
    ctl = ProbeController(cfg, n, names.vote, names.decode)
    column = np.full(n, -1, dtype=np.int64)
    errors: list[str] = []

    async def step_one(b: _Branch, t: int):
        try:
            return await s.advance(b, t)
        except TransportError as exc:
            b.error = str(exc)
            b.closed = True
            b.final = b.last_answer
            errors.append(f"branch {b.branch_id}: {exc}")
            return b.final

    t = 0
    reason = BUDGET_EXHAUSTED
    predicted = None
    while cfg.max_steps is None or t < cfg.max_steps:
        t += 1
        todo = [b for b in branches if ctl.active[b.branch_id] and not b.closed]
        tasks = [asyncio.ensure_future(step_one(b, t)) for b in todo]
        try:
            answers = await asyncio.gather(*tasks)
        except BaseException:
            for task in tasks:
                task.cancel()
            await asyncio.gather(*tasks, return_exceptions=True)
            raise
        for b, a in zip(todo, answers):
            column[b.branch_id] = names.code(a)
        if all(b.error is not None for b in branches):
            return FailedRun("all branches failed", t - 1,
                             tuple(b.tokens for b in branches), tuple(errors),
                             tuple(s.retry_trace))
        action = ctl.step(column)
        if action.stop:
            reason, predicted = CONSENSUS_STABLE, action.predicted
            break
        if all(branches[i].closed for i in np.flatnonzero(ctl.active)):
            reason = ALL_FINISHED
            break

    if predicted is None:
        survivors = np.flatnonzero(ctl.active)
        codes = np.array([names.code(branches[i].last_answer) for i in survivors])
        predicted = names.decode(names.vote(codes))
    used = np.array([b.tokens for b in branches], dtype=np.int64)
    return RunOutcome(
        predicted=predicted,
        stop_step=t,
        stop_reason=reason,
        consumed_tokens=tuple(int(x) for x in used),
        seq_tokens=int(used.max()),
        total_tokens=int(used.sum()),
        pruned_at=dict(ctl.pruned_at),
        warnings=tuple(ctl.warnings) + tuple(errors),
    )


def run_live(problem: Problem, endpoint: EndpointConfig, protocol: ProbeProtocolConfig,
             cfg: PolicyConfig, transport: Transport, seed: int | None = 0):
    return asyncio.run(run_live_async(problem, endpoint, protocol, cfg, transport, seed))
