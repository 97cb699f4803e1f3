"""Offboard ground-station client for the RAPTOR bus.

This package speaks the wire protocol natively (framing, discovery and
message codecs are implemented here from the protocol description, not
imported from the flight stack), subscribes to telemetry, publishes
mission commands, and renders campaign plots from JSONL trial logs.
"""

from .codecs import (
    CodecError,
    GripperCmd,
    MissionCmd,
    ParticipantRecord,
    Pose,
    Setpoint,
    decode_payload,
    load_corpus,
)
from .session import ClientSession, SessionError, SendTimeout
from .wire import Frame, WireError, build_frame, parse_frame, topic_id

__all__ = [
    "ClientSession",
    "CodecError",
    "Frame",
    "GripperCmd",
    "MissionCmd",
    "ParticipantRecord",
    "Pose",
    "SendTimeout",
    "SessionError",
    "Setpoint",
    "WireError",
    "build_frame",
    "decode_payload",
    "load_corpus",
    "parse_frame",
    "topic_id",
]
