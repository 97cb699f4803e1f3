#!/usr/bin/env python3
"""Regenerate data/golden_corpus.txt.

Each line is "type_name <hex wire frame>": a complete envelope (header +
message payload + CRC-32) for a representative message.  Entries are fully
deterministic so the file is stable across regenerations; any independent
client implementation must decode every frame to the same values and
re-encode it byte-exactly.
"""

import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from raptor.bus.envelope import FLAG_RELIABLE, WireEnvelope, encode_envelope, topic_hash
from raptor.messages import (
    EndpointInfo,
    GripperCmdMsg,
    GripperState,
    MissionCmdMsg,
    MissionVerb,
    ParticipantInfo,
    PoseMsg,
    SetpointMsg,
    write_golden_corpus,
)

OUT = os.path.join(os.path.dirname(__file__), "..", "data", "golden_corpus.txt")

S2 = math.sqrt(0.5)

MESSAGES = [
    ("pose/drone", PoseMsg((0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0))),
    ("pose/drone", PoseMsg((1.25, -2.5, 0.75), (S2, 0.0, 0.0, S2))),
    ("pose/drone", PoseMsg((-3.0, 4.5, 1.125), (0.5, 0.5, 0.5, 0.5))),
    (
        "setpoint/position",
        SetpointMsg((0.0, 0.0, 1.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
    ),
    (
        "setpoint/position",
        SetpointMsg((2.0, -1.0, 0.5), (0.45, 0.0, 0.2), (0.0, 0.0, -1.5), yaw=0.25),
    ),
    ("gripper/cmd", GripperCmdMsg(GripperState.OPEN, 12000, 12000)),
    ("gripper/cmd", GripperCmdMsg(GripperState.CLOSED, 3000, 3000)),
    ("gripper/cmd", GripperCmdMsg(GripperState.CLOSED, 0, 18000)),
    ("mission/cmd", MissionCmdMsg(MissionVerb.TAKEOFF)),
    ("mission/cmd", MissionCmdMsg(MissionVerb.GOTO_OBJECT, "styrofoam")),
    ("mission/cmd", MissionCmdMsg(MissionVerb.EXECUTE_SWOOP, "bottle")),
    ("mission/cmd", MissionCmdMsg(MissionVerb.LAND)),
    ("mission/cmd", MissionCmdMsg(MissionVerb.ABORT)),
    (
        "discovery",
        ParticipantInfo(
            participant_id=0x1122334455667788,
            name="ground-station",
            domain_id=7,
            endpoints=(
                EndpointInfo(topic_hash("pose/drone", "Pose"), 1, ("0.0.0.0", 41001)),
                EndpointInfo(topic_hash("mission/cmd", "MissionCmd"), 0, ("192.0.2.10", 41002)),
            ),
        ),
    ),
]


def build_entries():
    entries = []
    for i, (topic, msg) in enumerate(MESSAGES):
        flags = FLAG_RELIABLE if i % 3 == 2 else 0
        env = WireEnvelope(
            topic_hash=topic_hash(topic, msg.TYPE_NAME),
            seq=i,
            timestamp_ns=1_700_000_000_000_000_000 + i * 10_000_000,
            payload=msg.encode(),
            flags=flags,
        )
        entries.append((msg.TYPE_NAME, encode_envelope(env)))
    return entries


def main():
    entries = build_entries()
    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    write_golden_corpus(OUT, entries)
    print(f"wrote {len(entries)} frames to {os.path.abspath(OUT)}")


if __name__ == "__main__":
    main()
