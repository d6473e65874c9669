"""Step-wise policies over a probe matrix and a name-based registry."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any

from ..errors import ConfigError
from ..matrix import ProbeMatrix
from .base import (
    ALL_FINISHED,
    BUDGET_EXHAUSTED,
    CONSENSUS_STABLE,
    STOP_REASONS,
    PolicyConfig,
    RunOutcome,
    StepAction,
)
from .baselines import (
    majority_probability_exact,
    majority_probability_mc,
    run_asc,
    run_esc,
    run_sac,
    run_sc,
)
from .parallel_probe import ProbeController, run_parallel_probe

# name -> {param: default}; defaults mirror the published settings where given
POLICY_PARAMS: dict[str, dict[str, Any]] = {
    "parallel-probe": {
        "u": 10,
        "k": 10,
        "warmup": 12,
        "max_steps": None,
        "prune": True,
        "stop": True,
        "use_warmup": True,
    },
    "sc": {},
    "asc": {"threshold": 0.95, "draws": 1000},
    "esc": {"chunk": 8},
    "sac": {"window": 16},
}


@dataclass(frozen=True)
class PolicySpec:
    name: str
    params: dict[str, Any] = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self):
        if self.name not in POLICY_PARAMS:
            raise ConfigError(f"unknown policy {self.name!r}")
        allowed = POLICY_PARAMS[self.name]
        unknown = set(self.params) - set(allowed)
        if unknown:
            raise ConfigError(f"policy {self.name} does not take {sorted(unknown)}")
        # materialize defaults so configs echo completely
        object.__setattr__(self, "params", {**allowed, **self.params})
        self._validate()

    def _validate(self):
        p = self.params
        if self.name == "parallel-probe":
            self.config(1)
        elif self.name == "asc":
            if not 0.5 < p["threshold"] < 1:
                raise ConfigError("asc threshold must lie in (0.5, 1)")
            if p["draws"] < 1000:
                raise ConfigError("asc draws must be >= 1000")
        elif self.name == "esc" and p["chunk"] < 1:
            raise ConfigError("esc chunk must be >= 1")
        elif self.name == "sac" and p["window"] < 2:
            raise ConfigError("sac window must be >= 2")

    @property
    def display(self) -> str:
        return self.label or self.name

    def config(self, width: int) -> PolicyConfig:
        p = self.params
        return PolicyConfig(
            width=width,
            stability_window=p["u"],
            prune_lookback=p["k"],
            warmup_steps=p["warmup"],
            max_steps=p["max_steps"],
            enable_pruning=p["prune"],
            enable_stopping=p["stop"],
            enable_warmup=p["use_warmup"],
        )

    def to_dict(self) -> dict:
        return {"name": self.name, "label": self.label, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "PolicySpec":
        return cls(d["name"], dict(d.get("params", {})), d.get("label"))


def _policy_seed(seed: int) -> int:
    h = hashlib.blake2b(f"policy:{seed}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def run_policy(
    spec: PolicySpec,
    matrix: ProbeMatrix,
    width: int,
    rng_seed: int = 0,
    include_probe_overhead: bool = False,
) -> RunOutcome:
    p = spec.params
    ov = include_probe_overhead
    if spec.name == "parallel-probe":
        return run_parallel_probe(matrix, spec.config(width), ov)
    if spec.name == "sc":
        return run_sc(matrix, width, ov)
    if spec.name == "sac":
        return run_sac(matrix, width, p["window"], ov)
    if spec.name == "esc":
        return run_esc(matrix, p["chunk"], width, ov)
    if spec.name == "asc":
        return run_asc(matrix, width, p["threshold"], p["draws"], _policy_seed(rng_seed), ov)
    raise ConfigError(f"unknown policy {spec.name!r}")


__all__ = [
    "ALL_FINISHED",
    "BUDGET_EXHAUSTED",
    "CONSENSUS_STABLE",
    "STOP_REASONS",
    "POLICY_PARAMS",
    "PolicyConfig",
    "PolicySpec",
    "ProbeController",
    "RunOutcome",
    "StepAction",
    "majority_probability_exact",
    "majority_probability_mc",
    "run_asc",
    "run_esc",
    "run_parallel_probe",
    "run_policy",
    "run_sac",
    "run_sc",
]
