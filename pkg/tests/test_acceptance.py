"""Acceptance criteria. Each test prints one PASS/FAIL line, and the full list
is repeated in the terminal summary."""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from probectl.analysis import onset_distribution
from probectl.cli import main as cli_main
from probectl.matrix import build_matrix, convergence_onset
from probectl.policies import PolicyConfig, PolicySpec, run_asc, run_esc, run_parallel_probe, run_sc
from probectl.pool import PoolSet
from probectl.sim import SimConfig, compare, simulate
from probectl.synth import mixed_poolset, planted_onset_poolset, random_pool

import oracles
from conftest import ACCEPTANCE
from fuzzing import corpus
from test_matrix import make_pool
from test_online import _replay_case
from test_policies import pp, three
from test_sim import five_branch_pool


@contextmanager
def criterion(name, capsys=None):
    note = {}
    try:
        yield note
    except BaseException:
        ACCEPTANCE.append((name, False, note.get("note", "")))
        _say(capsys, f"FAIL  {name}")
        raise
    ACCEPTANCE.append((name, True, note.get("note", "")))
    _say(capsys, f"PASS  {name}  {note.get('note', '')}".rstrip())


def _say(capsys, line):
    if capsys is None:
        print(line)
        return
    with capsys.disabled():
        print(f"\n{line}")


def test_oracle_equivalence(capsys):
    with criterion("1 oracle equivalence on 1000 fuzz matrices", capsys) as note:
        t0 = time.perf_counter()
        cases = corpus()
        assert len(cases) == 1000
        mismatches = [pool.problem_id for pool, m, cfg in cases
                      if run_parallel_probe(m, cfg) != oracles.reference_parallel_probe(pool, cfg)]
        elapsed = time.perf_counter() - t0
        note["note"] = f"{elapsed:.1f}s"
        assert not mismatches, mismatches[:5]
        assert elapsed < 30
        widths = {m.width for _, m, _ in cases}
        horizons = {m.horizon for _, m, _ in cases}
        assert min(widths) >= 2 and max(widths) <= 64 and min(horizons) >= 2 and max(horizons) <= 200


def test_reduction_to_sc(capsys):
    with criterion("2 reduction to SC", capsys):
        for pool, m, cfg in corpus():
            off = PolicyConfig(width=cfg.width, enable_pruning=False, enable_stopping=False,
                               enable_warmup=False, warmup_steps=0)
            a, b = run_parallel_probe(m, off), run_sc(m, cfg.width)
            assert (a.predicted, a.seq_tokens, a.total_tokens) == (b.predicted, b.seq_tokens, b.total_tokens), \
                pool.problem_id


def test_stop_and_prune_bounds(capsys):
    with criterion("3 stopping/warmup bounds and prune predicate", capsys) as note:
        stops = prunes = 0
        for pool, m, cfg in corpus():
            out = run_parallel_probe(m, cfg)
            w = cfg.warmup_steps if cfg.enable_warmup else 0
            if out.stop_reason == "consensus_stable":
                stops += 1
                assert out.stop_step >= max(cfg.stability_window, w)
            series = oracles.realized_series(pool, cfg.width, out.pruned_at, out.stop_step)
            for i, t in out.pruned_at.items():
                prunes += 1
                assert t >= max(w, cfg.prune_lookback)
                assert oracles.prune_predicate(pool, cfg.width, cfg.prune_lookback, series, i, t)
            if cfg.enable_pruning:
                # no branch that met the predicate while active and gated was left unpruned
                for i in range(cfg.width):
                    last = min(out.pruned_at.get(i, out.stop_step), out.stop_step)
                    for t in range(max(w, 1), last):
                        assert not oracles.prune_predicate(pool, cfg.width, cfg.prune_lookback, series, i, t)
        note["note"] = f"{stops} stops, {prunes} prunes checked"
        assert stops and prunes


def test_pruning_monotonicity(capsys):
    with criterion("4 pruning monotonicity", capsys):
        for pool, m, cfg in corpus():
            kw = dict(width=cfg.width, stability_window=cfg.stability_window,
                      prune_lookback=cfg.prune_lookback, warmup_steps=cfg.warmup_steps,
                      max_steps=cfg.max_steps, enable_warmup=cfg.enable_warmup, enable_stopping=False)
            on = run_parallel_probe(m, PolicyConfig(enable_pruning=True, **kw))
            off = run_parallel_probe(m, PolicyConfig(enable_pruning=False, **kw))
            assert all(a <= b for a, b in zip(on.consumed_tokens, off.consumed_tokens)), pool.problem_id


def test_exhaustive_oracle(capsys):
    with criterion("5 exhaustive voting oracle", capsys) as note:
        t0 = time.perf_counter()
        pool = five_branch_pool()
        pools = PoolSet((pool,))
        exact = 100 * oracles.exhaustive_sc_accuracy(pool, 3)
        ex = simulate(SimConfig(PolicySpec("sc"), width=3, exhaustive=True), pools)
        mc = simulate(SimConfig(PolicySpec("sc"), width=3, repeats=10_000), pools)
        elapsed = time.perf_counter() - t0
        note["note"] = f"exact {exact:.2f}%, MC {mc.aggregate.accuracy_pct:.2f}%, {elapsed:.1f}s"
        assert ex.per_problem[0].repeats == 10
        assert ex.aggregate.accuracy_pct == pytest.approx(exact, abs=1e-9)
        assert abs(mc.aggregate.accuracy_pct - exact) <= 1.0
        assert elapsed < 10


def test_convergence_onset(capsys):
    with criterion("6 convergence onset", capsys):
        m = build_matrix(make_pool([(["x", "x"] + ["y"] * 7, "y")] * 3, lengths=[1000] * 3))
        assert convergence_onset(m) == (3, 0.3)
        rng = np.random.default_rng(99)
        for c in range(300):
            pool = random_pool(rng, int(rng.integers(1, 20)), int(rng.integers(1, 60)),
                               int(rng.integers(2, 5)), problem_id=f"o{c}", stickiness=0.6)
            assert convergence_onset(build_matrix(pool))[0] == oracles.onset_bruteforce(pool)


def test_token_metrics(capsys):
    with criterion("7 token metric definitions", capsys):
        sc = run_sc(three(), 3)
        assert (sc.seq_tokens, sc.total_tokens) == (420, 800)
        probe = run_parallel_probe(three(), pp(3, u=2, w=1))
        assert (probe.seq_tokens, probe.total_tokens) == (200, 530)
        esc = run_esc(three((0, 2, 1)), chunk_size=2, max_width=3)
        assert (esc.seq_tokens, esc.total_tokens) == (250 + 420, 800)
        asc = run_asc(three(), max_width=3)
        assert asc.seq_tokens == asc.total_tokens == 800


def _cli(*argv):
    return cli_main([str(a) for a in argv])


def test_determinism(capsys, tmp_path):
    with criterion("8 determinism across --jobs", capsys):
        pool = tmp_path / "pool.jsonl"
        assert _cli("synth", "--problems", 6, "--width", 32, "--output", pool) == 0
        runs = {}
        for jobs in (1, 2, 4):
            out = tmp_path / f"j{jobs}"
            assert _cli("simulate", "--pool", pool, "--width", 16, "--repeats", 12, "--seed", 5,
                        "--jobs", jobs, "--compare", "--out", out,
                        "--policy", "sc", "--policy", "parallel-probe", "--u", 3, "--k", 3, "--warmup", 3,
                        "--policy", "asc", "--policy", "esc", "--policy", "sac", "--sac-window", 3) == 0
            runs[jobs] = {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "manifest.json"}
            single = tmp_path / f"s{jobs}"
            assert _cli("simulate", "--pool", pool, "--width", 16, "--repeats", 12, "--seed", 5,
                        "--jobs", jobs, "--out", single, "--policy", "asc") == 0
            runs[jobs]["single"] = (single / "report.jsonl").read_bytes()
        capsys.readouterr()
        assert len(runs[1]) == 7
        assert runs[1] == runs[2] == runs[4]


def test_paired_subsamples(capsys):
    with criterion("9 paired subsamples across policies", capsys) as note:
        pools = mixed_poolset(1, problems=5, width=32, mean_steps=10)
        specs = [PolicySpec("sc"), PolicySpec("parallel-probe", {"u": 3, "k": 3, "warmup": 2}),
                 PolicySpec("asc"), PolicySpec("esc"), PolicySpec("sac", {"window": 3})]
        seen: dict = {}
        compare([SimConfig(s, repeats=10, width=16) for s in specs], pools,
                on_subsample=lambda pid, r, label, idx: seen.setdefault((pid, r), {})
                .setdefault(label, []).append(tuple(sorted(idx))))
        assert len(seen) == 50
        for per_label in seen.values():
            assert len(per_label) == 5
            assert len({tuple(v) for v in per_label.values()}) == 1
        note["note"] = f"{len(seen)} (problem, repeat) pairs"


def test_throughput(capsys):
    with criterion("10 desk-scale throughput", capsys) as note:
        pools = mixed_poolset(2024, problems=30, width=128)
        t0 = time.perf_counter()
        compare([SimConfig(PolicySpec("sc"), repeats=64, width=64),
                 SimConfig(PolicySpec("parallel-probe"), repeats=64, width=64)], pools)
        elapsed = time.perf_counter() - t0
        note["note"] = f"{elapsed:.1f}s"
        assert elapsed < 60


def test_planted_onset(capsys):
    with criterion("11 planted onset recovery", capsys) as note:
        pools, planted = planted_onset_poolset(seed=31, problems=30)
        target = float(np.mean(planted))
        _, recovered = onset_distribution(pools)
        note["note"] = f"planted {target:.4f}, recovered {recovered:.4f}"
        assert abs(target - 0.30) <= 0.02
        assert abs(recovered - target) <= 0.01


def test_online_replay(capsys):
    with criterion("12 online replay equivalence", capsys) as note:
        rng = np.random.default_rng(12)
        stops = prunes = 0
        for c in range(40):
            n = int(rng.integers(2, 10))
            kw = dict(stability_window=int(rng.integers(1, 4)), prune_lookback=int(rng.integers(1, 4)),
                      warmup_steps=int(rng.integers(1, 4)))
            _, offline, live, tr = _replay_case(int(rng.integers(2**32)), n, kw)
            assert live.predicted == offline.predicted
            assert live.stop_step == offline.stop_step
            assert live.consumed_tokens == offline.consumed_tokens
            for e in tr.requests("generate"):
                assert e.step <= live.stop_step
                assert e.step <= live.pruned_at.get(e.branch_id, live.stop_step)
            stops += live.stop_reason == "consensus_stable"
            prunes += len(live.pruned_at)
        note["note"] = f"40 runs, {stops} early stops, {prunes} prunes"
        assert stops and prunes
