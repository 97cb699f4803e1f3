"""raptor-lab command line: grasp campaigns, single trials, latency bench."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from ..bus.benchmark import INTRA_PROCESS, UDP_LOOPBACK, benchmark_roundtrip
from ..mission import DEFAULT_CATALOG
from ..trajgen import SwoopParams
from . import harness

ALL_OBJECTS = ["styrofoam", "box", "roll", "bottle"]


def _add_campaign(sub):
    p = sub.add_parser("campaign", help="run a grasp campaign")
    p.add_argument("--objects", default="all", help="'all' or comma-separated object names")
    p.add_argument("--attempts", type=int, default=36)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory for logs and CSV")
    p.add_argument("--mode", choices=[harness.FAST, harness.FULL], default=harness.FAST)
    p.add_argument("--swoop-config", default=None, help="JSON file with swoop parameters")
    p.add_argument("--keep-logs", action="store_true", help="embed trajectory logs in trials.jsonl")
    p.add_argument("--check", action="store_true", help="exit 2 if acceptance thresholds fail")
    p.set_defaults(func=cmd_campaign)


def cmd_campaign(args) -> int:
    objects = ALL_OBJECTS if args.objects == "all" else args.objects.split(",")
    for name in objects:
        if name not in DEFAULT_CATALOG:
            print(f"unknown object {name!r}; catalog: {sorted(DEFAULT_CATALOG)}", file=sys.stderr)
            return 1
    swoop = SwoopParams.from_json(args.swoop_config) if args.swoop_config else None
    stats = harness.run_campaign(
        objects,
        attempts=args.attempts,
        seed=args.seed,
        mode=args.mode,
        out_dir=args.out,
        swoop=swoop,
        keep_logs=args.keep_logs,
    )
    print(harness.format_summary_table(stats))
    if args.check:
        problems = harness.check_campaign(stats)
        if problems:
            for pr in problems:
                print(f"CHECK FAIL: {pr}", file=sys.stderr)
            return 2
        print("CHECK PASS")
    return 0


def _add_trial(sub):
    p = sub.add_parser("trial", help="run one grasp attempt")
    p.add_argument("--object", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log", default=None, help="write the trajectory log as JSONL")
    p.add_argument("--mode", choices=[harness.FAST, harness.FULL], default=harness.FULL)
    p.add_argument("--swoop-config", default=None)
    p.set_defaults(func=cmd_trial)


def cmd_trial(args) -> int:
    swoop = SwoopParams.from_json(args.swoop_config) if args.swoop_config else SwoopParams()
    cfg = harness.TrialConfig(
        object_name=args.object, seed=args.seed, attempts=1, mode=args.mode, swoop=swoop
    )
    rec = harness.run_trial(cfg, 0)
    print(json.dumps(rec.to_json_dict(), indent=2))
    if args.log:
        with open(args.log, "w") as f:
            for r in harness.log_records(rec.log):
                f.write(json.dumps(r) + "\n")
    return 0


def _add_bench(sub):
    p = sub.add_parser("bench", help="transport round-trip latency benchmark")
    p.add_argument("--transport", choices=["intra", "udp"], default="intra")
    p.add_argument("--sizes", default="64,1024", help="comma-separated payload sizes in bytes")
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(func=cmd_bench)


def cmd_bench(args) -> int:
    transport = INTRA_PROCESS if args.transport == "intra" else UDP_LOOPBACK
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = []
    for size in sizes:
        row = {"transport": args.transport, "size": size}
        for mode in ("direct", "double_convert"):
            stats = benchmark_roundtrip(
                transport, payload_size=size, iterations=args.iterations, conversion_mode=mode
            )
            row[f"{mode}_median_ns"] = stats.median_ns
            row[f"{mode}_p99_ns"] = stats.p99_ns
            row[f"{mode}_mean_ns"] = round(stats.mean_ns, 1)
        row["ratio"] = round(row["double_convert_median_ns"] / row["direct_median_ns"], 3)
        rows.append(row)
    header = f"{'transport':<10} {'size':>6} {'direct med':>12} {'convert med':>12} {'ratio':>6}"
    print(header)
    for r in rows:
        print(
            f"{r['transport']:<10} {r['size']:>6d} {r['direct_median_ns']:>10d}ns "
            f"{r['double_convert_median_ns']:>10d}ns {r['ratio']:>6.2f}"
        )
    if args.out:
        os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
        with open(args.out, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="raptor-lab")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_campaign(sub)
    _add_trial(sub)
    _add_bench(sub)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
