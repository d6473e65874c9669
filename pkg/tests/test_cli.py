import json
import re

import pytest

from probectl.cli import POLICY_FLAGS, main
from probectl.online.stub import serve_stub
from probectl.pool import PoolSet, load_pools, save_pools

from stubs import PROMPT, random_scripts, stub
from test_analysis import _all_correct
from test_matrix import make_pool


def run(capsys, *argv):
    code = main(list(map(str, argv)))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate(capsys, mini_path, tmp_path):
    code, out, _ = run(capsys, "validate", mini_path)
    assert code == 0 and "3 pools" in out
    bad = tmp_path / "bad.jsonl"
    lines = mini_path.read_text().splitlines()
    bad.write_text(lines[0] + "\n" + lines[1][:40] + "\n")
    code, out, _ = run(capsys, "validate", bad)
    assert code == 1 and "line 2" in out
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    code, out, _ = run(capsys, "validate", empty)
    assert code == 0 and "0 pools" in out


def test_simulate_deterministic_row(capsys, mini_path, tmp_path):
    argv = ["simulate", "--pool", mini_path, "--policy", "sc", "--width", 8, "--repeats", 64, "--seed", 7]
    c1, out1, _ = run(capsys, *argv, "--out", tmp_path / "a")
    c2, out2, _ = run(capsys, *argv, "--out", tmp_path / "b")
    assert c1 == c2 == 0
    assert out1.splitlines()[0] == out2.splitlines()[0]
    assert "accuracy_pct=" in out1
    assert (tmp_path / "a" / "report.jsonl").read_bytes() == (tmp_path / "b" / "report.jsonl").read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["subcommand"] == "simulate"
    assert manifest["resolved"]["configs"][0]["policy"]["params"] == {}
    assert manifest["inputs"]["pool"].startswith("sha256:")


def test_compare_reduction_and_table(capsys, mini_path, tmp_path):
    code, out, _ = run(capsys, "simulate", "--pool", mini_path, "--width", 6, "--repeats", 16, "--compare",
                       "--out", tmp_path, "--policy", "sc",
                       "--policy", "parallel-probe", "--no-prune", "--no-stop", "--label", "pp-off")
    assert code == 0
    rows = (tmp_path / "table.csv").read_text().splitlines()
    sc, pp = rows[1].split(","), rows[2].split(",")
    assert sc[1:4] == pp[1:4] and pp[0] == "pp-off"
    assert (tmp_path / "report-sc.jsonl").exists() and (tmp_path / "report-pp-off.jsonl").exists()


@pytest.mark.parametrize("argv", [
    ["--policy", "sc", "--esc-chunk", "4"],
    ["--policy", "esc", "--u", "3"],
    ["--policy", "sc", "--bogus"],
    ["--policy", "magic"],
    ["--policy", "sc", "--policy", "esc"],
    ["--repeats", "0", "--policy", "sc"],
    ["--policy", "asc", "--asc-threshold", "0.3"],
])
def test_simulate_usage_errors(capsys, mini_path, argv):
    code, _, err = run(capsys, "simulate", "--pool", mini_path, *argv)
    assert code == 1 and "usage error" in err


def test_help_lists_every_flag(capsys):
    code, out, _ = run(capsys, "simulate", "--help")
    assert code == 0
    for flags in POLICY_FLAGS.values():
        for f in flags:
            assert f in out
    for f in ["--pool", "--width", "--repeats", "--seed", "--include-probe-overhead", "--compare", "--jobs"]:
        assert f in out
    # ablation switches carry the component names they disable
    text = " ".join(out.split())
    assert "--no-prune disable deviation-based branch pruning" in text
    assert "--no-stop disable consensus-based early stopping" in text
    assert "--no-warmup disable the warmup stage" in text


def test_unknown_command_and_missing_pool(capsys, tmp_path):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "simulate", "--pool", tmp_path / "nope.jsonl", "--policy", "sc")[0] == 1
    assert run(capsys, "validate", tmp_path / "nope.jsonl")[0] == 1


def test_jobs_and_replay_byte_identical(capsys, tmp_path):
    pool = tmp_path / "mixed.jsonl"
    assert run(capsys, "synth", "--problems", 4, "--width", 24, "--output", pool)[0] == 0
    base = ["simulate", "--pool", pool, "--width", 12, "--repeats", 8, "--compare",
            "--policy", "sc", "--policy", "parallel-probe", "--u", 3, "--k", 3, "--warmup", 2]
    run(capsys, *base, "--jobs", 1, "--out", tmp_path / "j1")
    run(capsys, *base, "--jobs", 3, "--out", tmp_path / "j3")
    run(capsys, "replay", tmp_path / "j1" / "manifest.json", "--out", tmp_path / "r")
    for name in ["table.csv", "report-sc.jsonl", "report-parallel-probe.jsonl"]:
        ref = (tmp_path / "j1" / name).read_bytes()
        assert (tmp_path / "j3" / name).read_bytes() == ref
        assert (tmp_path / "r" / name).read_bytes() == ref


def test_default_output_dir(capsys, mini_path, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    run(capsys, "simulate", "--pool", mini_path, "--policy", "sc", "--width", 2, "--repeats", 2)
    run(capsys, "simulate", "--pool", mini_path, "--policy", "sc", "--width", 2, "--repeats", 2)
    dirs = sorted((tmp_path / "out").iterdir())
    assert len(dirs) == 2
    assert all((d / "manifest.json").exists() and (d / "report.jsonl").exists() for d in dirs)


def test_analyze_onset(capsys, tmp_path):
    pool = tmp_path / "flip.jsonl"
    save_pools(PoolSet((make_pool([(["x", "x"] + ["y"] * 7, "y")] * 3, lengths=[1000] * 3),)), pool)
    code, out, _ = run(capsys, "analyze", "--pool", pool, "--onset", "--out", tmp_path / "o")
    assert code == 0
    assert (tmp_path / "o" / "onset.csv").read_text().splitlines()[1] == "m,3,0.300000"


def test_analyze_surface_all_correct(capsys, tmp_path):
    pool = tmp_path / "ok.jsonl"
    save_pools(_all_correct(), pool)
    code, _, _ = run(capsys, "analyze", "--pool", pool, "--surface", "--widths", "1,3",
                     "--depths", "500,1000", "--out", tmp_path / "s")
    rows = (tmp_path / "s" / "surface.csv").read_text().splitlines()[1:]
    assert code == 0 and len(rows) == 4
    assert all(r.split(",")[2] == "1.000000" for r in rows)
    assert run(capsys, "analyze", "--pool", pool, "--surface", "--widths", "1")[0] == 1


def test_analyze_scaling_matches_simulate(capsys, tmp_path):
    pool = tmp_path / "mixed.jsonl"
    run(capsys, "synth", "--problems", 3, "--width", 16, "--output", pool)
    sweep = tmp_path / "sweep.json"
    sweep.write_text(json.dumps([{"policy": "sc", "width": w, "label": f"sc@{w}"} for w in (8, 2, 4)]))
    assert run(capsys, "analyze", "--pool", pool, "--scaling", sweep, "--repeats", 4,
               "--out", tmp_path / "c")[0] == 0
    rows = [r.split(",") for r in (tmp_path / "c" / "scaling.csv").read_text().splitlines()[1:]]
    assert [float(r[2]) for r in rows] == sorted(float(r[2]) for r in rows)
    for r in rows:
        run(capsys, "simulate", "--pool", pool, "--policy", "sc", "--width", r[1], "--repeats", 4,
            "--out", tmp_path / f"w{r[1]}")
        agg = json.loads((tmp_path / f"w{r[1]}" / "report.jsonl").read_text().splitlines()[-1])
        assert f"{agg['mean_total_tokens']:.1f}" == r[2]


def test_probe_online_needs_credential(capsys, monkeypatch, tmp_path):
    monkeypatch.delenv("PROBE_API_KEY", raising=False)
    from probectl import cli

    code = cli.main(["probe-online", "--endpoint", "http://127.0.0.1:9", "--model", "m", "--collect",
                     "--prompt", "p", "--out", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 1 and "PROBE_API_KEY" in err


def test_probe_online_collect_and_live(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("PROBE_API_KEY", "test-key")
    scripts = random_scripts(8, 4, 50)
    server = serve_stub(stub(scripts, 50))
    try:
        common = ["probe-online", "--endpoint", f"http://127.0.0.1:{server.server_port}", "--model", "m",
                  "--prompt", PROMPT, "--problem-id", "q", "--gold", "1", "--delta", 50, "--branches", 4]
        code, _, _ = run(capsys, *common, "--collect", "--out", tmp_path / "c")
        assert code == 0
        assert run(capsys, "validate", tmp_path / "c" / "pool.jsonl")[0] == 0
        code, out, _ = run(capsys, *common, "--live", "--no-prune", "--no-stop", "--out", tmp_path / "l")
        assert code == 0
    finally:
        server.shutdown()
    pool = load_pools(tmp_path / "c" / "pool.jsonl").pools[0]
    rec = json.loads(out.strip().splitlines()[-1])
    assert rec["consumed_tokens"] == [b.natural_length_tokens for b in pool.branches]


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and re.match(r"\d+\.\d+\.\d+", out)
