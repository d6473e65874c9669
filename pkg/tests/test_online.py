import asyncio
import json

import pytest
from hypothesis import given, settings, strategies as st

from probectl.errors import ConfigError
from probectl.matrix import build_matrix
from probectl.online import (
    EndpointConfig,
    FailedRun,
    HttpTransport,
    Problem,
    ProbeProtocolConfig,
    TransportError,
    collect_pool,
    collect_pool_async,
    extract_answer,
    run_live,
    run_live_async,
)
from probectl.online.http import completions_url
from probectl.online.stub import BranchScript, serve_stub
from probectl.online.transport import with_retry
from probectl.policies import PolicyConfig, run_parallel_probe
from probectl.pool import validate_pool

from stubs import PROMPT, random_scripts, stub

EP = EndpointConfig("http://stub", "stub-model", "k", max_concurrent_requests=4)
PROBLEM = Problem("s", PROMPT, "1")


async def no_sleep(_):
    return None


def proto(n, delta=50):
    return ProbeProtocolConfig(probe_interval_tokens=delta, branches=n)


def test_extract_answer():
    assert extract_answer(" 42.\nmore").canonical == "42"
    assert extract_answer("so \\boxed{7} or \\boxed{8}").canonical == "8"
    assert extract_answer("   ").is_abstain


def test_collect_example_branch():
    tr = stub({0: BranchScript(1200, ("41", "42", "42"))}, 500)
    pool = collect_pool(PROBLEM, EP, ProbeProtocolConfig(500, 1), tr)
    b = pool.branches[0]
    assert [a.canonical for a in b.probe_answers] == ["41", "42"]
    assert b.final_answer.canonical == "42"
    assert b.natural_length_tokens == 1200 and b.cumulative_tokens == (500, 1000)
    assert b.probe_overhead_tokens == 3


def test_empty_probe_reply_is_abstain():
    tr = stub({0: BranchScript(160, ("", "5", "5", "5"))}, 50)
    b = collect_pool(PROBLEM, EP, proto(1), tr).branches[0]
    assert b.probe_answers[0].is_abstain and b.probe_answers[1].canonical == "5"


def test_probe_isolation_and_concurrency_cap():
    tr = stub(random_scripts(4, 6, 50), 50)
    ep = EndpointConfig("http://stub", "m", "k", max_concurrent_requests=2)
    collect_pool(PROBLEM, ep, proto(6), tr)
    suffix = proto(1).answer_forcing_suffix
    for e in tr.requests("generate"):
        assert suffix not in e.prompt and "." not in e.prompt[len(PROMPT):]
    assert 1 <= tr.max_in_flight <= 2


def test_serialized_with_one_slot():
    tr = stub(random_scripts(5, 2, 50), 50)
    collect_pool(PROBLEM, EndpointConfig("http://stub", "m", "k", max_concurrent_requests=1), proto(2), tr)
    assert tr.max_in_flight == 1


def test_ceiling_closes_branch():
    tr = stub({0: BranchScript(1000, ("1",) * 20)}, 50)
    ep = EndpointConfig("http://stub", "m", "k", sampling=EP.sampling.__class__(max_new_tokens=120))
    b = collect_pool(PROBLEM, ep, proto(1), tr).branches[0]
    assert b.natural_length_tokens == 120 and b.cumulative_tokens == (50, 100)


def test_retry_then_success():
    tr = stub({0: BranchScript(120, ("1", "1", "1"))}, 50, fail_plan={(0, "generate", 0): 2})
    slept = []

    async def sleep(s):
        slept.append(s)

    pool = asyncio.run(collect_pool_async(PROBLEM, EP, proto(1), tr, sleep=sleep))
    assert pool.branches[0].natural_length_tokens == 120
    assert slept == [0.5, 1.0]


def test_retry_gives_up():
    trace = []

    async def boom():
        raise TransportError("down")

    with pytest.raises(TransportError):
        asyncio.run(with_retry(boom, 3, 0.1, 0.15, no_sleep, trace))
    assert len(trace) == 3


def test_all_branches_fail_returns_failed_run():
    scripts = {i: BranchScript(100, ("1", "1")) for i in range(2)}
    plan = {(i, "generate", 0): 99 for i in range(2)}
    tr = stub(scripts, 50, fail_plan=plan)
    cfg = PolicyConfig(width=2, stability_window=1, warmup_steps=1)
    res = asyncio.run(run_live_async(PROBLEM, EP, proto(2), cfg, tr, sleep=no_sleep))
    assert isinstance(res, FailedRun) and len(res.errors) == 2 and res.retry_trace


def test_width_must_match_branches():
    with pytest.raises(ConfigError):
        run_live(PROBLEM, EP, proto(3), PolicyConfig(width=2), stub(random_scripts(0, 3, 50), 50))


def test_credential_from_env():
    with pytest.raises(ConfigError, match="PROBE_API_KEY"):
        EndpointConfig.from_env("http://x", "m", env={})
    assert EndpointConfig.from_env("http://x", "m", env={"PROBE_API_KEY": "s"}).api_key == "s"
    assert "sekrit-9" not in repr(EndpointConfig("http://x", "m", "sekrit-9"))


def test_completions_url():
    assert completions_url("http://h:1") == "http://h:1/v1/completions"
    assert completions_url("http://h:1/v1/") == "http://h:1/v1/completions"


def _replay_case(seed, n, cfg_kw):
    scripts = random_scripts(seed, n, 50)
    pool = collect_pool(PROBLEM, EP, proto(n), stub(scripts, 50))
    validate_pool(pool)
    cfg = PolicyConfig(width=n, **cfg_kw)
    offline = run_parallel_probe(build_matrix(pool), cfg)
    live_tr = stub(scripts, 50)
    live = run_live(PROBLEM, EP, proto(n), cfg, live_tr)
    return pool, offline, live, live_tr


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 9), st.integers(1, 4), st.integers(1, 4),
       st.integers(0, 4), st.booleans())
def test_live_matches_offline(seed, n, u, k, w, prune):
    kw = dict(stability_window=u, prune_lookback=k, warmup_steps=w, enable_warmup=w > 0,
              enable_pruning=prune)
    _, offline, live, tr = _replay_case(seed, n, kw)
    assert (live.predicted, live.stop_step, live.consumed_tokens, live.pruned_at) == \
        (offline.predicted, offline.stop_step, offline.consumed_tokens, offline.pruned_at)
    for e in tr.requests("generate"):
        assert e.step <= live.stop_step
        assert e.step <= live.pruned_at.get(e.branch_id, live.stop_step)


def test_live_without_control_equals_collection():
    scripts = random_scripts(11, 5, 50)
    coll = stub(scripts, 50)
    collect_pool(PROBLEM, EP, proto(5), coll)
    live = stub(scripts, 50)
    cfg = PolicyConfig(width=5, enable_pruning=False, enable_stopping=False, enable_warmup=False,
                       warmup_steps=0)
    out = run_live(PROBLEM, EP, proto(5), cfg, live)
    for i in range(5):
        assert len(live.requests(branch_id=i)) == len(coll.requests(branch_id=i))
    assert out.stop_reason == "all_branches_finished"


def test_live_stop_issues_no_later_requests():
    scripts = {i: BranchScript(2000, ("7",) * 40) for i in range(4)}
    tr = stub(scripts, 50)
    cfg = PolicyConfig(width=4, stability_window=2, warmup_steps=3)
    out = run_live(PROBLEM, EP, proto(4), cfg, tr)
    assert (out.stop_step, out.predicted.canonical) == (3, "7")
    assert max(e.step for e in tr.log) == 3
    assert out.consumed_tokens == (150,) * 4


def test_live_prune_ends_branch_stream():
    scripts = {i: BranchScript(1000, ("7",) * 20) for i in range(3)}
    scripts[3] = BranchScript(1000, ("7", "7") + ("9",) * 18)
    tr = stub(scripts, 50)
    cfg = PolicyConfig(width=4, prune_lookback=3, warmup_steps=1, enable_stopping=False)
    out = run_live(PROBLEM, EP, proto(4), cfg, tr)
    assert out.pruned_at == {3: 5}
    assert max(e.step for e in tr.requests(branch_id=3)) == 5
    assert out.consumed_tokens[3] == 250


def test_http_transport_against_stub_server():
    scripts = random_scripts(21, 3, 50)
    direct = collect_pool(PROBLEM, EP, proto(3), stub(scripts, 50))
    server = serve_stub(stub(scripts, 50))
    try:
        ep = EndpointConfig(f"http://127.0.0.1:{server.server_port}", "m", "k", max_concurrent_requests=3)

        async def go():
            tr = HttpTransport(ep)
            try:
                return await collect_pool_async(PROBLEM, ep, proto(3), tr)
            finally:
                await tr.aclose()

        assert asyncio.run(go()) == direct
    finally:
        server.shutdown()


def test_http_errors_are_retryable():
    import httpx

    def handler(request):
        return httpx.Response(503, text="busy")

    ep = EndpointConfig("http://x", "m", "k")
    tr = HttpTransport(ep, httpx.AsyncClient(transport=httpx.MockTransport(handler)))
    from probectl.online import GenRequest

    with pytest.raises(TransportError) as exc:
        asyncio.run(tr.generate(GenRequest("p", 5)))
    assert exc.value.retryable


def test_http_token_fallback_is_flagged():
    import httpx

    def handler(request):
        if request.url.path.endswith("/tokenize"):
            return httpx.Response(404)
        body = "data: " + json.dumps({"choices": [{"text": "a b c", "finish_reason": "stop"}]}) + "\n\n"
        return httpx.Response(200, text=body + "data: [DONE]\n\n")

    ep = EndpointConfig("http://x", "m", "k")
    tr = HttpTransport(ep, httpx.AsyncClient(transport=httpx.MockTransport(handler)))
    from probectl.online import GenRequest

    comp = asyncio.run(tr.generate(GenRequest("p", 5)))
    assert (comp.n_tokens, comp.approximate, comp.finished) == (3, True, True)
