"""Command-line interface.

Verbs:
  run       execute one scenario, persist trace and metrics
  sweep     execute a recipe (axis sweep x protocols x seeds), emit reports
  report    recompute metrics and reports from previously persisted traces
  validate  parse and validate a config or recipe file

Output locations are pure functions of (recipe, axis value, protocol,
seed), so re-running overwrites deterministically. The output root comes
from --out-dir or the FANETSIM_OUT_DIR environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from multiprocessing import get_context
from pathlib import Path

from .config import ConfigError, ScenarioConfig, SweepSpec, load
from .metrics import RunResult, compute_ledger, write_ledger
from .report import emit_reports, summary_lines
from .scenario import build_simulation
from .trace import read_trace


def _default_out_dir() -> str:
    return os.environ.get("FANETSIM_OUT_DIR", "out")


def run_dir(out_dir, recipe: str, axis: str, value, protocol: str, seed: int) -> Path:
    value_s = f"{value:g}" if isinstance(value, float) else str(value)
    return Path(out_dir) / recipe / "runs" / f"{axis}={value_s}" / protocol / f"seed{seed}"


def execute_run(cfg: ScenarioConfig, directory: Path) -> dict:
    """Run one scenario and persist trace.ndjson + metrics.json."""
    sim = build_simulation(cfg)
    sim.run()
    directory.mkdir(parents=True, exist_ok=True)
    sim.trace.dump(directory / "trace.ndjson")
    ledger = compute_ledger(sim.trace.records, t_end=cfg.sim_duration)
    write_ledger(ledger, directory / "metrics.json")
    return ledger.to_dict()


def _sweep_job(args) -> tuple:
    cfg_fields, directory = args
    cfg = ScenarioConfig(**cfg_fields)
    try:
        execute_run(cfg, Path(directory))
        return (str(directory), None)
    except Exception as exc:  # engine fatal: report, preserve partials
        return (str(directory), f"{type(exc).__name__}: {exc}")


def _apply_axis(cfg: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    caster = float if axis == "pause_time" else int
    return dataclasses.replace(cfg, **{axis: caster(value)})


def sweep_jobs(cfg: ScenarioConfig, sweep: SweepSpec, out_dir, seeds_override: int | None):
    seed_count = seeds_override if seeds_override else sweep.seed_count
    seeds = range(sweep.seed_base, sweep.seed_base + seed_count)
    jobs = []
    for value in sweep.sweep_values:
        for protocol in sweep.protocols:
            for seed in seeds:
                run_cfg = dataclasses.replace(
                    _apply_axis(cfg, sweep.sweep_axis, value),
                    protocol=protocol,
                    seed=seed,
                    trace_level="light",
                )
                directory = run_dir(out_dir, sweep.recipe_name, sweep.sweep_axis, value, protocol, seed)
                jobs.append((dataclasses.asdict(run_cfg), str(directory)))
    return jobs


def collect_results(out_dir, recipe: str) -> tuple[str, list[RunResult]]:
    """Rebuild RunResults from persisted traces under a recipe directory."""
    base = Path(out_dir) / recipe / "runs"
    if not base.is_dir():
        raise ConfigError(f"no runs found under {base}")
    axis = None
    results = []
    for axis_dir in sorted(base.iterdir()):
        if "=" not in axis_dir.name:
            continue
        axis_name, _, raw_value = axis_dir.name.partition("=")
        axis = axis_name
        value = float(raw_value) if "." in raw_value else int(raw_value)
        for proto_dir in sorted(axis_dir.iterdir()):
            for seed_dir in sorted(proto_dir.iterdir()):
                trace_file = seed_dir / "trace.ndjson"
                if not trace_file.is_file():
                    continue
                records = read_trace(trace_file)
                ledger = compute_ledger(records)
                write_ledger(ledger, seed_dir / "metrics.json")
                results.append(
                    RunResult(
                        protocol=proto_dir.name,
                        axis_value=value,
                        seed=int(seed_dir.name.removeprefix("seed")),
                        ledger=ledger,
                    )
                )
    if axis is None:
        raise ConfigError(f"no sweep runs under {base}")
    return axis, results


def cmd_run(args) -> int:
    cfg, _ = load(args.config) if args.config else (ScenarioConfig(), None)
    if args.protocol:
        cfg = dataclasses.replace(cfg, protocol=args.protocol)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.trace_level:
        cfg = dataclasses.replace(cfg, trace_level=args.trace_level)
    cfg.validate()
    directory = Path(args.out_dir) / "single" / f"{cfg.protocol}_seed{cfg.seed}"
    summary = execute_run(cfg, directory)
    print(f"run complete: {directory}")
    print(f"  control messages: {summary['control']['total']}")
    print(f"  network lifetime: {summary['network_lifetime']:g} s")
    rate = summary["discoveries"]["search_success_rate"]
    print(f"  search success rate: {rate:g} msg/s" if rate is not None else "  search success rate: n/a")
    return 0


def cmd_sweep(args) -> int:
    cfg, sweep = load(args.recipe)
    if sweep is None:
        raise ConfigError(f"{args.recipe} has no sweep definition")
    jobs = sweep_jobs(cfg, sweep, args.out_dir, args.seeds)
    print(f"{sweep.recipe_name}: {len(jobs)} runs ({sweep.sweep_axis} x {sweep.protocols})")
    failures = []
    if args.workers > 1:
        with get_context("spawn").Pool(args.workers) as pool:
            for directory, err in pool.imap_unordered(_sweep_job, jobs):
                if err:
                    failures.append((directory, err))
                    print(f"  FAILED {directory}: {err}", file=sys.stderr)
    else:
        for job in jobs:
            directory, err = _sweep_job(job)
            if err:
                failures.append((directory, err))
                print(f"  FAILED {directory}: {err}", file=sys.stderr)
    axis, results = collect_results(args.out_dir, sweep.recipe_name)
    from .metrics import aggregate

    rows = aggregate(results)
    emit_reports(rows, axis, args.out_dir, sweep.recipe_name)
    for line in summary_lines(rows, axis):
        print(line)
    if failures:
        print(f"{len(failures)} run(s) failed; partial results kept", file=sys.stderr)
        return 1
    print(f"reports under {Path(args.out_dir) / sweep.recipe_name / 'reports'}")
    return 0


def cmd_report(args) -> int:
    axis, results = collect_results(args.out_dir, args.recipe)
    from .metrics import aggregate

    rows = aggregate(results)
    paths = emit_reports(rows, axis, args.out_dir, args.recipe)
    for line in summary_lines(rows, axis):
        print(line)
    print(f"wrote {len(paths)} report files")
    return 0


def cmd_validate(args) -> int:
    try:
        cfg, sweep = load(args.config)
    except ConfigError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    print(f"ok: protocol={cfg.protocol} nodes={cfg.node_count} sources={cfg.source_count}")
    if sweep:
        print(
            f"sweep: {sweep.sweep_axis} over {sweep.sweep_values} "
            f"x {sweep.protocols} x {sweep.seed_count} seeds"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fanetsim", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run a single scenario")
    p_run.add_argument("--config", help="scenario config file (defaults apply if omitted)")
    p_run.add_argument("--protocol", choices=("rlpr", "aodv", "rarp_lite"))
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--trace-level", choices=("full", "light"))
    p_run.add_argument("--out-dir", default=_default_out_dir())
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a recipe sweep")
    p_sweep.add_argument("--recipe", required=True)
    p_sweep.add_argument("--seeds", type=int, help="override recipe seed count (desk-scale)")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--out-dir", default=_default_out_dir())
    p_sweep.set_defaults(func=cmd_sweep)

    p_report = sub.add_parser("report", help="recompute metrics from persisted traces")
    p_report.add_argument("--recipe", required=True, help="recipe name under the output dir")
    p_report.add_argument("--out-dir", default=_default_out_dir())
    p_report.set_defaults(func=cmd_report)

    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
