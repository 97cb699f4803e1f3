#!/usr/bin/env python3
"""Reproduce the headline per-object success-rate table.

Runs the default 10 000-attempt fast-mode campaign for each catalog object,
prints the summary table, and exits nonzero if any acceptance threshold is
violated.  Pass --out to also write summary.csv and per-trial JSONL.
"""

import argparse
import sys
import time

from raptor.lab import harness

OBJECTS = ["styrofoam", "box", "roll", "bottle"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--attempts", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    t0 = time.perf_counter()
    stats = harness.run_campaign(
        OBJECTS, attempts=args.attempts, seed=args.seed, mode=harness.FAST, out_dir=args.out
    )
    elapsed = time.perf_counter() - t0
    print(harness.format_summary_table(stats))
    print(f"\n{len(OBJECTS) * args.attempts} trials in {elapsed:.1f} s")

    problems = harness.check_campaign(stats)
    for problem in problems:
        print(f"THRESHOLD: {problem}", file=sys.stderr)
    return 2 if problems else 0


if __name__ == "__main__":
    sys.exit(main())
