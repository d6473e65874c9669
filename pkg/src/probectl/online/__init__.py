from .driver import (
    FailedRun,
    Problem,
    collect_pool,
    collect_pool_async,
    collect_pools_async,
    extract_answer,
    run_live,
    run_live_async,
)
from .http import HttpTransport
from .transport import (
    API_KEY_ENV,
    Completion,
    EndpointConfig,
    GenRequest,
    ProbeProtocolConfig,
    SamplingConfig,
    Transport,
    TransportError,
)

__all__ = [
    "API_KEY_ENV",
    "Completion",
    "EndpointConfig",
    "FailedRun",
    "GenRequest",
    "HttpTransport",
    "Problem",
    "ProbeProtocolConfig",
    "SamplingConfig",
    "Transport",
    "TransportError",
    "collect_pool",
    "collect_pool_async",
    "collect_pools_async",
    "extract_answer",
    "run_live",
    "run_live_async",
]
