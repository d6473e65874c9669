"""Command-line entry point.

    probectl validate POOL
    probectl simulate --pool P [common flags] --policy NAME [policy flags] ...
    probectl analyze --pool P (--surface ... | --onset | --scaling CONFIGS)
    probectl probe-online --endpoint URL --model NAME (--collect | --live) ...
    probectl synth --kind {mixed,planted} --output P
    probectl replay MANIFEST

Exit codes: 0 success, 1 validation or usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .analysis import (
    GridSpec,
    curve_csv,
    onset_csv,
    onset_distribution,
    scaling_curve,
    surface_csv,
    width_depth_surface,
)
from .errors import (
    ConfigError,
    ConfigMismatch,
    DepthBelowInterval,
    ParseError,
    ProbeError,
    ValidationError,
    WidthExceedsPool,
)
from .policies import POLICY_PARAMS, PolicySpec
from .pool import file_digest, load_pools, save_pools, scan_pool_file
from .sim import SimConfig, compare, simulate

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("probectl")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- policy blocks ------------------------------------------------------------

# flag -> (dest param, type); None type means store_false/store_true switch
POLICY_FLAGS = {
    "parallel-probe": {
        "--u": ("u", int, "stability window: identical consensus steps needed to stop"),
        "--k": ("k", int, "prune lookback: consecutive deviating probes before pruning"),
        "--warmup": ("warmup", int, "warmup steps W (rules active from step W)"),
        "--max-steps": ("max_steps", int, "budget cap in probe steps"),
        "--no-prune": ("prune", False, "disable deviation-based branch pruning"),
        "--no-stop": ("stop", False, "disable consensus-based early stopping"),
        "--no-warmup": ("use_warmup", False, "disable the warmup stage"),
    },
    "sc": {},
    "asc": {
        "--asc-threshold": ("threshold", float, "posterior majority threshold"),
        "--asc-draws": ("draws", int, "Monte Carlo draws per posterior check"),
    },
    "esc": {"--esc-chunk": ("chunk", int, "trajectories per round")},
    "sac": {"--sac-window": ("window", int, "consecutive identical probes to exit a branch")},
}


def _policy_parser(name: str) -> _Parser:
    p = _Parser(prog=f"probectl simulate --policy {name}", add_help=False)
    p.add_argument("--label")
    for flag, (dest, typ, help_) in POLICY_FLAGS[name].items():
        if typ is False:
            p.add_argument(flag, dest=dest, action="store_false", default=None, help=help_)
        else:
            p.add_argument(flag, dest=dest, type=typ, default=None, help=help_)
    return p


def _add_policy_help(parser: argparse.ArgumentParser, names=None):
    for name in names or POLICY_FLAGS:
        flags = POLICY_FLAGS[name]
        if not flags:
            continue
        g = parser.add_argument_group(f"{name} flags")
        for flag, (dest, typ, help_) in flags.items():
            default = POLICY_PARAMS[name][dest]
            if typ is False:
                g.add_argument(flag, action="store_true", help=help_)
            else:
                g.add_argument(flag, metavar=dest.upper(), help=f"{help_} (default {default})")


def parse_policy_block(tokens: list[str]) -> tuple[PolicySpec, list[str]]:
    """Parse ``NAME [policy flags]``; returns the PolicySpec and tokens left for the common parser."""
    if not tokens:
        raise UsageError("--policy needs a name")
    name, rest = tokens[0], tokens[1:]
    if name not in POLICY_FLAGS:
        raise UsageError(f"unknown policy {name!r}; choose from {', '.join(POLICY_FLAGS)}")
    ns, leftover = _policy_parser(name).parse_known_args(rest)
    for tok in leftover:
        flag = tok.split("=", 1)[0]
        owners = [p for p, flags in POLICY_FLAGS.items() if flag in flags]
        if owners:
            raise UsageError(f"{flag} does not apply to policy {name} (it belongs to {', '.join(owners)})")
    params = {k: v for k, v in vars(ns).items() if k != "label" and v is not None}
    try:
        return PolicySpec(name, params, ns.label), leftover
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def split_policy_blocks(argv: list[str]) -> tuple[list[str], list[list[str]]]:
    common: list[str] = []
    blocks: list[list[str]] = []
    for tok in argv:
        if tok == "--policy":
            blocks.append([])
        elif tok.startswith("--policy="):
            blocks.append([tok.split("=", 1)[1]])
        elif blocks:
            blocks[-1].append(tok)
        else:
            common.append(tok)
    return common, blocks


def _repeats(value: str):
    if value == "exhaustive":
        return value
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'exhaustive'") from None
    if n < 1:
        raise argparse.ArgumentTypeError("repeats must be >= 1")
    return n


def _int_list(value: str) -> list[int]:
    try:
        return [int(x) for x in value.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None


# -- output helpers -----------------------------------------------------------


def _out_dir(requested: str | None, root: str = "out") -> Path:
    if requested:
        d = Path(requested)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        d = Path(root) / stamp
        n = 1
        while d.exists():
            d = Path(root) / f"{stamp}-{n}"
            n += 1
    d.mkdir(parents=True, exist_ok=True)
    return d


def _run_into(out: Path, fn, *args) -> list[str]:
    """Run ``fn(*args, out)``; drop ``out`` again if it failed before writing anything."""
    try:
        return fn(*args, out)
    except BaseException:
        if out.is_dir() and not any(out.iterdir()):
            out.rmdir()
        raise


def _write_manifest(out: Path, subcommand: str, resolved: dict, inputs: dict, outputs: list[str]):
    manifest = {
        "subcommand": subcommand,
        "resolved": resolved,
        "inputs": inputs,
        "outputs": outputs,
        "tool_version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _safe(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in label)


# -- validate -----------------------------------------------------------------


def cmd_validate(argv: list[str]) -> int:
    p = _Parser(prog="probectl validate", description="Check a pool file against every invariant.")
    p.add_argument("pool")
    args = p.parse_args(argv)
    if not Path(args.pool).exists():
        print(f"error: no such file: {args.pool}", file=sys.stderr)
        return EXIT_USAGE
    n_pools, n_branches, problems = scan_pool_file(args.pool)
    if problems:
        print(f"{args.pool}: {len(problems)} violation(s)")
        for msg in problems:
            print(f"  {msg}")
        return EXIT_USAGE
    print(f"{args.pool}: {n_pools} pools, {n_branches} branches, valid")
    return EXIT_OK


# -- simulate -----------------------------------------------------------------


def _simulate_parser(full_help: bool = False) -> _Parser:
    p = _Parser(
        prog="probectl simulate",
        description="Replay policies over a candidate pool with seeded resampling. "
        "Policy flags follow their --policy NAME block; repeat --policy with --compare.",
    )
    p.add_argument("--pool", required=True, help="pool file (one problem per line)")
    p.add_argument("--width", type=int, default=64, help="branches drawn per repeat (default 64)")
    p.add_argument("--repeats", type=_repeats, default=64,
                   help="repeats per problem, or 'exhaustive' to enumerate all subsets (default 64)")
    p.add_argument("--exhaustive-cap", type=int, default=10_000,
                   help="largest subset count enumerated in exhaustive mode")
    p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    p.add_argument("--include-probe-overhead", action="store_true",
                   help="charge forced-answer probe tokens to the token metrics")
    p.add_argument("--compare", action="store_true", help="run several --policy blocks on paired subsamples")
    p.add_argument("--baseline", default=None, help="label of the comparison baseline (default first policy)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes; output does not depend on it")
    p.add_argument("--out", default=None, help="output directory (default out/<timestamp>)")
    if full_help:
        p.add_argument("--policy", choices=list(POLICY_FLAGS), required=True,
                       help="policy block start; may repeat with --compare")
        p.add_argument("--label", help="display name for the preceding policy block")
        _add_policy_help(p)
    return p


def resolve_simulate(argv: list[str]) -> dict:
    common, blocks = split_policy_blocks(argv)
    if not blocks:
        raise UsageError("probectl simulate: at least one --policy is required")
    specs = []
    for block in blocks:
        spec, leftover = parse_policy_block(block)
        specs.append(spec)
        common += leftover
    args = _simulate_parser().parse_args(common)
    if len(blocks) > 1 and not args.compare:
        raise UsageError("probectl simulate: several --policy blocks need --compare")
    if args.jobs < 1:
        raise UsageError("probectl simulate: --jobs must be >= 1")
    exhaustive = args.repeats == "exhaustive"
    configs = [
        SimConfig(
            policy=s,
            repeats=1 if exhaustive else args.repeats,
            width=args.width,
            base_seed=args.seed,
            pool_path=args.pool,
            include_probe_overhead=args.include_probe_overhead,
            exhaustive=exhaustive,
            exhaustive_cap=args.exhaustive_cap,
        )
        for s in specs
    ]
    baseline = 0
    if args.baseline is not None:
        labels = [s.display for s in specs]
        if args.baseline not in labels:
            raise UsageError(f"probectl simulate: --baseline {args.baseline!r} matches no policy label")
        baseline = labels.index(args.baseline)
    return {
        "configs": [c.to_dict() for c in configs],
        "compare": bool(args.compare),
        "baseline": baseline,
        "jobs": args.jobs,
        "out": args.out,
    }


def run_simulate(resolved: dict, out: Path) -> list[str]:
    configs = [SimConfig.from_dict(c) for c in resolved["configs"]]
    pools = load_pools(configs[0].pool_path)
    jobs = resolved.get("jobs", 1)
    outputs = []
    if resolved["compare"]:
        cmp = compare(configs, pools, baseline=resolved["baseline"], jobs=jobs)
        for label, rep in zip(cmp.labels, cmp.reports):
            name = f"report-{_safe(label)}.jsonl"
            rep.write(out / name)
            outputs.append(name)
        (out / "table.csv").write_text(cmp.to_csv())
        outputs.append("table.csv")
        print(cmp.to_text(), end="")
    else:
        rep = simulate(configs[0], pools, jobs)
        rep.write(out / "report.jsonl")
        outputs.append("report.jsonl")
        a = rep.aggregate
        acc = "n/a" if a.accuracy_pct is None else f"{a.accuracy_pct:.2f}"
        print(f"policy={configs[0].policy.display} accuracy_pct={acc} "
              f"seq_tokens_mean={a.mean_seq_tokens:.1f} total_tokens_mean={a.mean_total_tokens:.1f} "
              f"problems={a.problems}")
    return outputs


def cmd_simulate(argv: list[str]) -> int:
    if "-h" in argv or "--help" in argv:
        _simulate_parser(full_help=True).print_help()
        return EXIT_OK
    resolved = resolve_simulate(argv)
    pool_path = resolved["configs"][0]["pool_path"]
    if not Path(pool_path).exists():
        print(f"error: no such file: {pool_path}", file=sys.stderr)
        return EXIT_USAGE
    out = _out_dir(resolved.pop("out"))
    outputs = _run_into(out, run_simulate, resolved)
    _write_manifest(out, "simulate", resolved, {"pool": file_digest(pool_path)}, outputs)
    print(f"wrote {out}")
    return EXIT_OK


# -- analyze ------------------------------------------------------------------


def _analyze_parser() -> _Parser:
    p = _Parser(prog="probectl analyze", description="Width-depth surface, onset and scaling exports.")
    p.add_argument("--pool", required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--surface", action="store_true", help="majority accuracy over a width x depth grid")
    mode.add_argument("--onset", action="store_true", help="per-problem convergence onset records")
    mode.add_argument("--scaling", metavar="CONFIGS",
                      help="JSON list of {policy, params, width, label} points to simulate")
    p.add_argument("--widths", type=_int_list, help="surface widths, comma-separated")
    p.add_argument("--depths", type=_int_list, help="surface depths in tokens, comma-separated")
    p.add_argument("--repeats", type=int, default=16, help="draws per cell / per scaling point (default 16)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coverage-threshold", type=int, default=1,
                   help="minimum problems covering a cell for it to count as stable")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    return p


def resolve_analyze(argv: list[str]) -> dict:
    args = _analyze_parser().parse_args(argv)
    r = {"pool": args.pool, "seed": args.seed, "repeats": args.repeats, "jobs": args.jobs, "out": args.out}
    if args.surface:
        if not args.widths or not args.depths:
            raise UsageError("probectl analyze: --surface needs --widths and --depths")
        r.update(mode="surface", widths=args.widths, depths=args.depths,
                 coverage_threshold=args.coverage_threshold)
    elif args.onset:
        r.update(mode="onset")
    else:
        try:
            points = json.loads(Path(args.scaling).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"probectl analyze: cannot read --scaling file: {exc}") from None
        configs = []
        for pt in points:
            spec = PolicySpec(pt["policy"], pt.get("params", {}), pt.get("label"))
            configs.append(SimConfig(spec, repeats=pt.get("repeats", args.repeats),
                                     width=pt["width"], base_seed=args.seed,
                                     pool_path=args.pool).to_dict())
        r.update(mode="scaling", configs=configs)
    return r


def run_analyze(resolved: dict, out: Path) -> list[str]:
    pools = load_pools(resolved["pool"])
    mode = resolved["mode"]
    if mode == "surface":
        spec = GridSpec(tuple(resolved["widths"]), tuple(resolved["depths"]), resolved["repeats"],
                        resolved["seed"], resolved["coverage_threshold"])
        cells = width_depth_surface(pools, spec)
        (out / "surface.csv").write_text(surface_csv(cells))
        print(surface_csv(cells), end="")
        return ["surface.csv"]
    if mode == "onset":
        recs, mean = onset_distribution(pools)
        (out / "onset.csv").write_text(onset_csv(recs))
        print(onset_csv(recs), end="")
        print(f"mean_ratio={mean:.4f}")
        return ["onset.csv"]
    configs = [SimConfig.from_dict(c) for c in resolved["configs"]]
    points = scaling_curve(pools, configs, resolved.get("jobs", 1))
    (out / "scaling.csv").write_text(curve_csv(points))
    print(curve_csv(points), end="")
    return ["scaling.csv"]


def cmd_analyze(argv: list[str]) -> int:
    resolved = resolve_analyze(argv)
    if not Path(resolved["pool"]).exists():
        print(f"error: no such file: {resolved['pool']}", file=sys.stderr)
        return EXIT_USAGE
    out = _out_dir(resolved.pop("out"))
    outputs = _run_into(out, run_analyze, resolved)
    _write_manifest(out, "analyze", resolved, {"pool": file_digest(resolved["pool"])}, outputs)
    return EXIT_OK


# -- probe-online -------------------------------------------------------------


def _online_parser() -> _Parser:
    p = _Parser(prog="probectl probe-online",
                description="Collect a pool from, or run the controller against, a live endpoint. "
                            "The bearer credential is read from $PROBE_API_KEY.")
    p.add_argument("--endpoint", required=True, help="base URL of a completions-style server")
    p.add_argument("--model", required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--collect", action="store_true", help="write a pool file")
    mode.add_argument("--live", action="store_true", help="run the controller and print outcomes")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--problems", help="JSONL with problem_id, prompt and optional gold")
    src.add_argument("--prompt", help="single problem prompt")
    p.add_argument("--problem-id", default="problem-0")
    p.add_argument("--gold", default=None)
    g = p.add_argument_group("probing protocol")
    g.add_argument("--delta", type=int, default=500, help="probe interval in tokens (default 500)")
    g.add_argument("--branches", type=int, default=128, help="parallel branches (default 128)")
    g.add_argument("--suffix", default="</think> The final answer is", help="answer-forcing suffix")
    g.add_argument("--answer-max-tokens", type=int, default=32)
    g.add_argument("--stop", action="append", default=None, help="probe stop sequence (repeatable)")
    g = p.add_argument_group("endpoint")
    g.add_argument("--max-concurrent", type=int, default=16)
    g.add_argument("--timeout", type=float, default=120.0)
    g.add_argument("--temperature", type=float, default=0.6)
    g.add_argument("--top-p", type=float, default=0.95)
    g.add_argument("--max-new-tokens", type=int, default=32768, help="per-branch reasoning ceiling")
    g.add_argument("--max-attempts", type=int, default=4)
    g.add_argument("--seed", type=int, default=0)
    g = p.add_argument_group("live controller")
    g.add_argument("--u", type=int, default=POLICY_PARAMS["parallel-probe"]["u"])
    g.add_argument("--k", type=int, default=POLICY_PARAMS["parallel-probe"]["k"])
    g.add_argument("--warmup", type=int, default=POLICY_PARAMS["parallel-probe"]["warmup"])
    g.add_argument("--max-steps", type=int, default=None)
    g.add_argument("--no-prune", action="store_true")
    g.add_argument("--no-stop", action="store_true")
    g.add_argument("--no-warmup", action="store_true")
    p.add_argument("--out", default=None)
    return p


def cmd_probe_online(argv: list[str], transport_factory=None) -> int:
    from .online import (
        EndpointConfig,
        HttpTransport,
        Problem,
        ProbeProtocolConfig,
        SamplingConfig,
        TransportError,
        collect_pools_async,
        run_live_async,
    )
    from .policies import PolicyConfig

    args = _online_parser().parse_args(argv)
    endpoint = EndpointConfig.from_env(
        args.endpoint, args.model,
        max_concurrent_requests=args.max_concurrent,
        request_timeout=args.timeout,
        sampling=SamplingConfig(args.temperature, args.top_p, args.max_new_tokens),
        max_attempts=args.max_attempts,
    )
    protocol = ProbeProtocolConfig(
        probe_interval_tokens=args.delta,
        branches=args.branches,
        answer_forcing_suffix=args.suffix,
        answer_max_tokens=args.answer_max_tokens,
        stop_sequences=tuple(args.stop) if args.stop is not None else ("\n",),
    )
    if args.problems:
        problems = []
        with open(args.problems, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    problems.append(Problem(str(rec["problem_id"]), rec["prompt"], rec.get("gold")))
    else:
        problems = [Problem(args.problem_id, args.prompt, args.gold)]
    out = _out_dir(args.out)
    transport = transport_factory(endpoint) if transport_factory else HttpTransport(endpoint)

    async def main():
        try:
            if args.collect:
                return await collect_pools_async(problems, endpoint, protocol, transport, args.seed)
            cfg = PolicyConfig(
                width=args.branches, stability_window=args.u, prune_lookback=args.k,
                warmup_steps=args.warmup, max_steps=args.max_steps,
                enable_pruning=not args.no_prune, enable_stopping=not args.no_stop,
                enable_warmup=not args.no_warmup,
            )
            return [await run_live_async(p, endpoint, protocol, cfg, transport, args.seed)
                    for p in problems]
        finally:
            close = getattr(transport, "aclose", None)
            if close is not None:
                await close()

    try:
        result = asyncio.run(main())
    except TransportError as exc:
        print(f"error: transport failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    resolved = {k: v for k, v in vars(args).items() if k != "out"}
    if args.collect:
        save_pools(result, out / "pool.jsonl")
        print(f"wrote {out / 'pool.jsonl'} ({len(result)} pools)")
        outputs = ["pool.jsonl"]
    else:
        lines = []
        for prob, res in zip(problems, result):
            rec = {"problem_id": prob.problem_id, **_outcome_record(res)}
            lines.append(json.dumps(rec, sort_keys=True))
            print(lines[-1])
        (out / "outcomes.jsonl").write_text("".join(x + "\n" for x in lines))
        outputs = ["outcomes.jsonl"]
    _write_manifest(out, "probe-online", resolved, {}, outputs)
    return EXIT_OK


def _outcome_record(res) -> dict:
    d = asdict(res)
    if "predicted" in d:
        d["predicted"] = res.predicted.canonical
        d["pruned_at"] = {str(k): v for k, v in res.pruned_at.items()}
    else:
        d["failed"] = True
    return d


# -- synth / replay -----------------------------------------------------------


def cmd_synth(argv: list[str]) -> int:
    from .synth import mixed_poolset, planted_onset_poolset

    p = _Parser(prog="probectl synth", description="Write a synthetic pool file.")
    p.add_argument("--kind", choices=["mixed", "planted"], default="mixed")
    p.add_argument("--problems", type=int, default=30)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--delta", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    args = p.parse_args(argv)
    if args.kind == "mixed":
        pools = mixed_poolset(args.seed, args.problems, args.width, args.delta)
    else:
        pools, _ = planted_onset_poolset(args.seed, args.problems, width=args.width, delta=args.delta)
    save_pools(pools, args.output)
    print(f"wrote {args.output} ({len(pools)} pools)")
    return EXIT_OK


def cmd_replay(argv: list[str]) -> int:
    p = _Parser(prog="probectl replay", description="Re-run a manifest into a new output directory.")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    args = p.parse_args(argv)
    manifest = json.loads(Path(args.manifest).read_text())
    sub, resolved = manifest["subcommand"], manifest["resolved"]
    out = _out_dir(args.out)
    if sub == "simulate":
        outputs = run_simulate(resolved, out)
        pool = resolved["configs"][0]["pool_path"]
    elif sub == "analyze":
        outputs = run_analyze(resolved, out)
        pool = resolved["pool"]
    else:
        raise UsageError(f"probectl replay: cannot replay {sub!r} runs (they depend on a live endpoint)")
    digest = file_digest(pool)
    if manifest["inputs"].get("pool") not in (None, digest):
        log.warning("pool file changed since the manifest was written")
    _write_manifest(out, sub, resolved, {"pool": digest}, outputs)
    print(f"wrote {out}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "probe-online": cmd_probe_online,
    "synth": cmd_synth,
    "replay": cmd_replay,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__.strip())
        return EXIT_OK if argv else EXIT_USAGE
    if argv[0] == "--version":
        print(__version__)
        return EXIT_OK
    cmd = COMMANDS.get(argv[0])
    if cmd is None:
        print(f"probectl: unknown command {argv[0]!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return cmd(argv[1:])
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError, ConfigError, ConfigMismatch, WidthExceedsPool,
            DepthBelowInterval) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProbeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
