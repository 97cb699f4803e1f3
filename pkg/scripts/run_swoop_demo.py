#!/usr/bin/env python3
"""Run one full closed-loop swoop attempt and dump the flight log.

The log is plain JSONL ({"t", "pos", "vel", ...} per 20 ms record), ready
for the offboard client's plot tool or any notebook.
"""

import argparse
import json
import sys

from raptor.lab import harness
from raptor.trajgen import SwoopParams


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--object", default="styrofoam")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--log", default="swoop_log.jsonl")
    args = parser.parse_args()

    cfg = harness.TrialConfig(
        object_name=args.object, seed=args.seed, attempts=1, mode=harness.FULL,
        swoop=SwoopParams(),
    )
    rec = harness.run_trial(cfg, 0)
    print(json.dumps(rec.to_json_dict(), indent=2))
    with open(args.log, "w") as f:
        for row in harness.log_records(rec.log):
            f.write(json.dumps(row) + "\n")
    print(f"\nwrote {args.log}", file=sys.stderr)
    return 0 if rec.fault is None else 1


if __name__ == "__main__":
    sys.exit(main())
