"""raptor-client command line: listen, cmd, plot."""

from __future__ import annotations

import argparse
import sys

from .codecs import VERB_IDS
from .plots import PlotError, plot_campaign
from .session import ClientSession, SendTimeout


def cmd_listen(args) -> int:
    with ClientSession(name="offboard-listen", domain=args.domain) as session:
        count = 0
        try:
            for stamp_ns, msg in session.listen(
                args.topic, args.type, duration=args.duration, max_messages=args.count
            ):
                print(f"{stamp_ns} {msg}")
                count += 1
        except KeyboardInterrupt:
            pass
        print(
            f"received {count} messages, {session.decode_errors} decode errors",
            file=sys.stderr,
        )
    return 0


def cmd_cmd(args) -> int:
    with ClientSession(name="offboard-cmd", domain=args.domain) as session:
        try:
            sent = session.send_mission(args.verb, args.target or "", timeout=args.timeout)
        except SendTimeout as exc:
            print(f"command failed: {exc}", file=sys.stderr)
            return 1
        print(f"acknowledged: {sent.verb} {sent.target}".rstrip())
    return 0


def cmd_plot(args) -> int:
    try:
        result = plot_campaign(args.in_dir, args.out_dir)
    except PlotError as exc:
        print(f"plot failed: {exc}", file=sys.stderr)
        return 1
    for path in result.paths:
        print(path)
    print(
        f"{result.trials} trials, min speed near grasp "
        f"{result.min_speed_near_grasp:.3f} m/s",
        file=sys.stderr,
    )
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="raptor-client")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("listen", help="print messages from a topic")
    p.add_argument("--topic", default="pose/drone")
    p.add_argument("--type", default="Pose")
    p.add_argument("--domain", type=int, default=0)
    p.add_argument("--duration", type=float, default=None, help="seconds to listen")
    p.add_argument("--count", type=int, default=None, help="stop after N messages")
    p.set_defaults(func=cmd_listen)

    p = sub.add_parser("cmd", help="send a mission command")
    p.add_argument("verb", choices=sorted(VERB_IDS))
    p.add_argument("target", nargs="?", default="")
    p.add_argument("--domain", type=int, default=0)
    p.add_argument("--timeout", type=float, default=5.0)
    p.set_defaults(func=cmd_cmd)

    p = sub.add_parser("plot", help="render campaign plots from JSONL logs")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.set_defaults(func=cmd_plot)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
