#!/usr/bin/env python3
"""Round-trip latency comparison across transports and conversion modes.

Writes one CSV row per (transport, payload size) with direct-path and
double-conversion medians; the ratio column is the conversion overhead.
"""

import argparse
import sys

from raptor.lab.cli import main as lab_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=2000)
    parser.add_argument("--out-prefix", default="bench")
    args = parser.parse_args()

    for transport in ("intra", "udp"):
        rc = lab_main(
            [
                "bench",
                "--transport", transport,
                "--sizes", "64,1024",
                "--iterations", str(args.iterations),
                "--out", f"{args.out_prefix}_{transport}.csv",
            ]
        )
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
