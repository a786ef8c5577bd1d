"""Batch front door: run one scenario, sweep a parameter grid, or re-check a trace.

Exit statuses are a stable contract for CI: 0 when every applicable check
passes, 1 on any property failure, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import checker, config, trace as trace_mod
from .sim import run_scenario


def _parse_set(values: list[str]) -> dict:
    overrides = {}
    for item in values:
        if "=" not in item:
            raise config.ConfigError(item, "override must look like key=value")
        key, raw = item.split("=", 1)
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def _load_config(args) -> config.ScenarioConfig:
    cfg = config.load(args.scenario)
    overrides = _parse_set(args.set or [])
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.max_steps is not None:
        overrides["max_steps"] = args.max_steps
    if args.profile is not None:
        overrides["scheduler_profile"] = args.profile
    if overrides:
        cfg = config.apply_overrides(cfg, overrides)
    return cfg


def _write_json(path: Path, document) -> None:
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_scenario(cfg)
    if args.verify_replay:
        replay = run_scenario(cfg)
        if replay.trace.digest() != result.trace.digest():
            print("replay divergence: identical config+seed produced different traces",
                  file=sys.stderr)
            return 1
    reports = checker.check_all(result.trace.header, result.trace.events)
    result.trace.write(str(out / "trace.jsonl"))
    _write_json(out / "metrics.json", result.metrics)
    _write_json(out / "report.json", [r.to_dict() for r in reports])
    for report in reports:
        print(report.line())
    print(f"status: {result.metrics['status']}  steps: {result.metrics['steps']}  "
          f"cycles: {result.metrics['cycles']}  digest: {result.metrics['trace_digest'][:16]}")
    return checker.gate(reports)


def cmd_check(args) -> int:
    tr = trace_mod.read(args.trace)
    reports = checker.check_all(tr.header, tr.events)
    for report in reports:
        print(report.line())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "report.json", [r.to_dict() for r in reports])
    return checker.gate(reports)


def _parse_seeds(spec: str) -> list[int]:
    if ":" in spec:
        lo, hi = spec.split(":", 1)
        return list(range(int(lo), int(hi)))
    return [int(s) for s in spec.split(",") if s]


def _parse_grid(items: list[str]) -> dict[str, list]:
    grid = {}
    for item in items:
        if "=" not in item:
            raise config.ConfigError(item, "grid entry must look like key=v1,v2")
        key, raw = item.split("=", 1)
        values = []
        for piece in raw.split(","):
            try:
                values.append(json.loads(piece))
            except json.JSONDecodeError:
                values.append(piece)
        grid[key] = values
    return grid


def _sweep_cell(base: config.ScenarioConfig, overrides: dict, seeds: list[int]) -> dict:
    runs = []
    for seed in seeds:
        cfg = config.apply_overrides(base, dict(overrides, seed=seed))
        result = run_scenario(cfg)
        reports = checker.check_all(result.trace.header, result.trace.events)
        by_name = {r.name: r for r in reports}
        stab = by_name["stabilization-time"]
        cost = by_name["message-cost"]
        runs.append(
            {
                "seed": seed,
                "verdicts": {r.name: r.verdict for r in reports},
                "failed": [r.name for r in reports if r.verdict == "FAIL"],
                "stabilization_cycles": (stab.measured or {}).get("cycles"),
                "max_broadcast_msgs": (cost.measured or {}).get("max_total"),
                "max_latency_cycles": (cost.measured or {}).get("max_latency_cycles"),
                "steps": result.metrics["steps"],
                "cycles": result.metrics["cycles"],
                "status": result.metrics["status"],
                "digest": result.metrics["trace_digest"],
            }
        )
    stab_values = [r["stabilization_cycles"] for r in runs if r["stabilization_cycles"] is not None]
    msg_values = [r["max_broadcast_msgs"] for r in runs if r["max_broadcast_msgs"] is not None]
    return {
        "overrides": overrides,
        "runs": runs,
        "aggregates": {
            "median_stabilization_cycles": statistics.median(stab_values) if stab_values else None,
            "max_stabilization_cycles": max(stab_values) if stab_values else None,
            "max_broadcast_msgs": max(msg_values) if msg_values else None,
            "failures": sum(len(r["failed"]) for r in runs),
        },
    }


def sweep(base: config.ScenarioConfig, grid: dict[str, list], seeds: list[int], workers: int = 1) -> dict:
    """Run the full grid; cells are independent and merge deterministically."""
    cells: list[dict] = [{}]
    for key, values in grid.items():
        cells = [dict(cell, **{key: v}) for cell in cells for v in values]
    if workers <= 1:
        results = [_sweep_cell(base, cell, seeds) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_cell, base, cell, seeds) for cell in cells]
            results = [f.result() for f in futures]
    return {
        "grid": grid,
        "seeds": seeds,
        "cells": results,
        "all_pass": all(cell["aggregates"]["failures"] == 0 for cell in results),
    }


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    grid = _parse_grid(args.vary or [])
    seeds = _parse_seeds(args.seeds)
    try:
        summary = sweep(cfg, grid, seeds, workers=args.workers)
    except Exception:
        print("sweep cell crashed under base config:", file=sys.stderr)
        print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True), file=sys.stderr)
        raise
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "summary.json", summary)
    for cell in summary["cells"]:
        agg = cell["aggregates"]
        print(
            f"cell {cell['overrides']}: median_stab={agg['median_stabilization_cycles']} "
            f"max_msgs={agg['max_broadcast_msgs']} failures={agg['failures']}"
        )
    return 0 if summary["all_pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssurb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario, check it, write trace/metrics/report")
    run_p.add_argument("--scenario", required=True, help="scenario config JSON")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--max-steps", type=int, default=None)
    run_p.add_argument("--profile", default=None, help="scheduler profile override")
    run_p.add_argument("--set", action="append", metavar="KEY=VALUE", help="dotted-path override")
    run_p.add_argument(
        "--verify-replay", action="store_true",
        help="run twice and fail hard if the traces diverge",
    )
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a seed sweep over a parameter grid")
    sweep_p.add_argument("--scenario", required=True)
    sweep_p.add_argument("--out", required=True)
    sweep_p.add_argument("--seeds", default="0:10", help="range lo:hi or comma list")
    sweep_p.add_argument("--vary", action="append", metavar="KEY=V1,V2", help="grid dimension")
    sweep_p.add_argument("--workers", type=int, default=1)
    sweep_p.add_argument("--seed", type=int, default=None)
    sweep_p.add_argument("--max-steps", type=int, default=None)
    sweep_p.add_argument("--profile", default=None)
    sweep_p.add_argument("--set", action="append", metavar="KEY=VALUE")
    sweep_p.set_defaults(func=cmd_sweep)

    check_p = sub.add_parser("check", help="re-run the checkers on an existing trace")
    check_p.add_argument("--trace", required=True)
    check_p.add_argument("--out", default=None)
    check_p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
