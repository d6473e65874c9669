from __future__ import annotations

import asyncio
import logging
import os
from dataclasses import dataclass, field
from typing import Awaitable, Callable, Protocol

from ..errors import ConfigError, ProbeError

log = logging.getLogger(__name__)

API_KEY_ENV = "PROBE_API_KEY"


class TransportError(ProbeError):
    def __init__(self, message: str, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


@dataclass(frozen=True)
class GenRequest:
    """One text-generation call.

    ``kind`` is "generate" for reasoning continuations and "probe" for forced
    answers. ``branch_id`` and ``step`` are bookkeeping; the HTTP transport
    only forwards ``seed``.
    """

    prompt: str
    max_tokens: int
    kind: str = "generate"
    branch_id: int = 0
    step: int = 0
    stop: tuple[str, ...] = ()
    seed: int | None = None


@dataclass(frozen=True)
class Completion:
    text: str
    n_tokens: int
    finished: bool  # the model ended on its own rather than hitting max_tokens
    approximate: bool = False


class Transport(Protocol):
    async def generate(self, req: GenRequest) -> Completion: ...


@dataclass(frozen=True)
class SamplingConfig:
    temperature: float = 0.6
    top_p: float = 0.95
    max_new_tokens: int = 32768  # per-branch reasoning ceiling


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model_name: str
    api_key: str = field(default="", repr=False)
    max_concurrent_requests: int = 16
    request_timeout: float = 120.0
    sampling: SamplingConfig = SamplingConfig()
    max_attempts: int = 4
    backoff_base: float = 0.5
    backoff_max: float = 8.0

    def __post_init__(self):
        if self.max_concurrent_requests < 1:
            raise ConfigError("max_concurrent_requests must be >= 1")
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")

    @classmethod
    def from_env(cls, base_url: str, model_name: str, env=None, **kw) -> "EndpointConfig":
        env = os.environ if env is None else env
        key = env.get(API_KEY_ENV)
        if not key:
            raise ConfigError(f"environment variable {API_KEY_ENV} is not set")
        return cls(base_url, model_name, key, **kw)


@dataclass(frozen=True)
class ProbeProtocolConfig:
    probe_interval_tokens: int = 500
    branches: int = 128
    answer_forcing_suffix: str = "</think> The final answer is"
    answer_max_tokens: int = 32
    stop_sequences: tuple[str, ...] = ("\n",)

    def __post_init__(self):
        if self.probe_interval_tokens < 1:
            raise ConfigError("probe_interval_tokens must be >= 1")
        if self.branches < 1:
            raise ConfigError("branches must be >= 1")
        if self.answer_max_tokens < 1:
            raise ConfigError("answer_max_tokens must be >= 1")


async def with_retry(
    call: Callable[[], Awaitable[Completion]],
    max_attempts: int,
    base: float,
    cap: float,
    sleep: Callable[[float], Awaitable[None]] = asyncio.sleep,
    trace: list[str] | None = None,
) -> Completion:
    """Retry retryable transport errors with capped exponential backoff."""
    for attempt in range(1, max_attempts + 1):
        try:
            return await call()
        except TransportError as exc:
            note = f"attempt {attempt}/{max_attempts} failed: {exc}"
            log.warning(note)
            if trace is not None:
                trace.append(note)
            if not exc.retryable or attempt == max_attempts:
                raise
            await sleep(min(cap, base * 2 ** (attempt - 1)))
    raise AssertionError("unreachable")
