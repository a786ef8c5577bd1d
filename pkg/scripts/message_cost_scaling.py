#!/usr/bin/env python3
"""Message-cost scaling experiment.

Runs fault-free broadcasts for a range of system sizes and reports, per n,
the worst per-broadcast MSG+MSGACK send count, that count over n^2, and the
worst broadcast-to-delivery latency in asynchronous cycles. The ratio column
should flatten as n grows.
"""

import argparse
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from ssurb import checker  # noqa: E402
from ssurb.config import from_dict  # noqa: E402
from ssurb.sim import run_scenario  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="2,3,4,5,6,7,8")
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--broadcasts", type=int, default=3)
    parser.add_argument("--max-steps", type=int, default=30_000)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    table = {}
    for n in (int(s) for s in args.sizes.split(",")):
        worst_msgs = 0
        worst_latency = 0
        for seed in range(args.seeds):
            raw = {
                "n": n,
                "buffer_unit_size": 4,
                "seed": seed,
                "max_steps": args.max_steps,
                "broadcasts": [
                    {"node": 1 + (k % n), "payload": f"m{k}"}
                    for k in range(args.broadcasts)
                ],
            }
            result = run_scenario(from_dict(raw))
            reports = {
                r.name: r
                for r in checker.check_all(result.trace.header, result.trace.events)
            }
            cost = reports["message-cost"].measured
            worst_msgs = max(worst_msgs, cost["max_total"])
            worst_latency = max(worst_latency, cost["max_latency_cycles"])
        table[n] = {
            "max_msgs_per_broadcast": worst_msgs,
            "ratio_over_n2": round(worst_msgs / (n * n), 2),
            "max_latency_cycles": worst_latency,
        }
        print(f"n={n}  max msgs/broadcast={worst_msgs:5d}  "
              f"ratio/n^2={table[n]['ratio_over_n2']:6.2f}  "
              f"max latency={worst_latency} cycles")

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(table, fh, indent=2, sort_keys=True)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
