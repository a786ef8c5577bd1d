#!/usr/bin/env python3
"""Stabilization-time scaling experiment.

Sweeps the flow-control window size over every corruption kind and a seed
range, measures recovery in asynchronous cycles, and validates the linear
trend: medians for the large windows must stay within 2x of the a*B + b fit
derived from the two smallest windows.
"""

import argparse
import json
import os
import statistics
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from ssurb import checker  # noqa: E402
from ssurb.config import CORRUPTION_KINDS, from_dict  # noqa: E402
from ssurb.sim import run_scenario  # noqa: E402


def run_cell(b, kind, seed, n, max_steps):
    raw = {
        "n": n,
        "buffer_unit_size": b,
        "seed": seed,
        "max_steps": max_steps,
        "fifo_enabled": kind == "NEXT-SKEW",
        "stop_mode": "stabilized",
        "quiescence_window_cycles": 3,
        "broadcasts": [{"node": 1 + (k % n), "payload": f"m{k}"} for k in range(6)],
        "fault_plan": {"corruptions": [{"node": 2, "step": 250, "kind": kind}]},
    }
    result = run_scenario(from_dict(raw))
    reports = {r.name: r for r in checker.check_all(result.trace.header, result.trace.events)}
    stab = reports["stabilization-time"]
    if stab.verdict != "PASS":
        return None
    return stab.measured["cycles"]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--windows", default="1,2,4,8", help="buffer_unit_size grid")
    parser.add_argument("--seeds", type=int, default=20, help="seeds per (window, kind) cell")
    parser.add_argument("--nodes", type=int, default=4)
    parser.add_argument("--max-steps", type=int, default=15_000)
    parser.add_argument("--out", default=None, help="optional JSON summary path")
    args = parser.parse_args()

    windows = [int(w) for w in args.windows.split(",")]
    table = {}
    for b in windows:
        pool = []
        failures = 0
        for kind in CORRUPTION_KINDS:
            for seed in range(args.seeds):
                cycles = run_cell(b, kind, seed, args.nodes, args.max_steps)
                if cycles is None:
                    failures += 1
                else:
                    pool.append(cycles)
        table[b] = {
            "median_cycles": statistics.median(pool),
            "max_cycles": max(pool),
            "runs": len(pool),
            "unstabilized": failures,
        }
        print(f"B={b:2d}  median={table[b]['median_cycles']}  "
              f"max={table[b]['max_cycles']}  runs={table[b]['runs']}  "
              f"unstabilized={failures}")

    if len(windows) >= 4:
        m1, m2 = table[windows[0]]["median_cycles"], table[windows[1]]["median_cycles"]
        slope, intercept = m2 - m1, 2 * m1 - m2
        print(f"fit from B in {windows[:2]}: cycles ~ {slope}*B + {intercept}")
        for b in windows[2:]:
            bound = 2 * (slope * b + intercept)
            ok = table[b]["median_cycles"] <= bound
            print(f"  B={b}: median {table[b]['median_cycles']} <= 2*fit({bound}) -> "
                  f"{'ok' if ok else 'VIOLATED'}")

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(table, fh, indent=2, sort_keys=True)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
