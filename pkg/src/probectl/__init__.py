"""Consensus-driven control of parallel reasoning branches, with an offline
replay testbed over pre-sampled probed trajectories."""

from .answers import ABSTAIN, Answer, VoteTally, canonicalize, mode
from .errors import (
    ConfigError,
    ConfigMismatch,
    DepthBelowInterval,
    EmptyVote,
    ParseError,
    ProbeError,
    ValidationError,
    WidthExceedsPool,
)
from .matrix import ProbeMatrix, build_matrix, consensus_series, convergence_onset
from .policies import (
    PolicyConfig,
    PolicySpec,
    RunOutcome,
    StepAction,
    run_asc,
    run_esc,
    run_parallel_probe,
    run_policy,
    run_sac,
    run_sc,
)
from .pool import BranchTrace, PoolSet, ProblemPool, load_pools, save_pools, subsample
from .sim import Comparison, SimConfig, SimReport, compare, simulate

__version__ = "0.1.0"

__all__ = [
    "ABSTAIN",
    "Answer",
    "BranchTrace",
    "Comparison",
    "ConfigError",
    "ConfigMismatch",
    "DepthBelowInterval",
    "EmptyVote",
    "ParseError",
    "PolicyConfig",
    "PolicySpec",
    "PoolSet",
    "ProbeError",
    "ProbeMatrix",
    "ProblemPool",
    "RunOutcome",
    "SimConfig",
    "SimReport",
    "StepAction",
    "ValidationError",
    "VoteTally",
    "WidthExceedsPool",
    "build_matrix",
    "canonicalize",
    "compare",
    "consensus_series",
    "convergence_onset",
    "load_pools",
    "mode",
    "run_asc",
    "run_esc",
    "run_parallel_probe",
    "run_policy",
    "run_sac",
    "run_sc",
    "save_pools",
    "simulate",
    "subsample",
]
