"""Fixed binary schemas for every message exchanged on the bus.

All layouts are little-endian and packed in declared field order.  Sizes
are constant except MissionCmdMsg, whose target name is length-prefixed
(u16 + UTF-8 bytes).  Quaternions travel unnormalized and are normalized
on decode; a norm further than QUAT_TOL from 1 is treated as corruption.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field

QUAT_TOL = 1e-6

POSE_SIZE = 56
SETPOINT_SIZE = 80
GRIPPER_CMD_SIZE = 5


class MessageError(ValueError):
    pass


class GripperState(enum.IntEnum):
    OPEN = 0
    CLOSED = 1


class MissionVerb(enum.IntEnum):
    TAKEOFF = 0
    GOTO_OBJECT = 1
    EXECUTE_SWOOP = 2
    LAND = 3
    ABORT = 4


def _check_finite(name, values):
    for v in values:
        if not math.isfinite(v):
            raise MessageError(f"{name}: non-finite value {v}")


@dataclass(frozen=True)
class PoseMsg:
    """World-frame position [m] and orientation quaternion (w, x, y, z)."""

    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float]

    TYPE_NAME = "Pose"

    def encode(self) -> bytes:
        _check_finite("PoseMsg", (*self.position, *self.orientation))
        return struct.pack("<7d", *self.position, *self.orientation)

    @classmethod
    def decode(cls, buf: bytes) -> "PoseMsg":
        if len(buf) != POSE_SIZE:
            raise MessageError(f"PoseMsg: expected {POSE_SIZE} bytes, got {len(buf)}")
        vals = struct.unpack("<7d", buf)
        _check_finite("PoseMsg", vals)
        q = vals[3:7]
        norm = math.sqrt(sum(c * c for c in q))
        if abs(norm - 1.0) > QUAT_TOL:
            raise MessageError(f"PoseMsg: quaternion norm {norm} outside tolerance")
        if abs(norm - 1.0) > 1e-12:
            # Renormalizing an already-unit quaternion would flip low bits
            # and break decode/encode byte stability.
            q = tuple(c / norm for c in q)
        return cls(position=vals[0:3], orientation=q)


@dataclass(frozen=True)
class SetpointMsg:
    """50 Hz high-level command: position, velocity, acceleration, yaw."""

    position: tuple[float, float, float]
    velocity: tuple[float, float, float]
    acceleration: tuple[float, float, float]
    yaw: float = 0.0

    TYPE_NAME = "Setpoint"

    def encode(self) -> bytes:
        vals = (*self.position, *self.velocity, *self.acceleration, self.yaw)
        _check_finite("SetpointMsg", vals)
        return struct.pack("<10d", *vals)

    @classmethod
    def decode(cls, buf: bytes) -> "SetpointMsg":
        if len(buf) != SETPOINT_SIZE:
            raise MessageError(f"SetpointMsg: expected {SETPOINT_SIZE} bytes, got {len(buf)}")
        v = struct.unpack("<10d", buf)
        _check_finite("SetpointMsg", v)
        return cls(position=v[0:3], velocity=v[3:6], acceleration=v[6:9], yaw=v[9])


@dataclass(frozen=True)
class GripperCmdMsg:
    """Gripper actuation command; servo angles in centidegrees."""

    state: GripperState
    angle_left: int = 0
    angle_right: int = 0

    TYPE_NAME = "GripperCmd"

    def encode(self) -> bytes:
        for a in (self.angle_left, self.angle_right):
            if not 0 <= a <= 18000:
                raise MessageError(f"GripperCmdMsg: angle {a / 100.0} deg out of [0, 180]")
        return struct.pack("<BHH", int(self.state), self.angle_left, self.angle_right)

    @classmethod
    def decode(cls, buf: bytes) -> "GripperCmdMsg":
        if len(buf) != GRIPPER_CMD_SIZE:
            raise MessageError(f"GripperCmdMsg: expected {GRIPPER_CMD_SIZE} bytes, got {len(buf)}")
        s, al, ar = struct.unpack("<BHH", buf)
        try:
            state = GripperState(s)
        except ValueError:
            raise MessageError(f"GripperCmdMsg: unknown state {s}") from None
        for a in (al, ar):
            if a > 18000:
                raise MessageError(f"GripperCmdMsg: angle {a / 100.0} deg out of [0, 180]")
        return cls(state=state, angle_left=al, angle_right=ar)


@dataclass(frozen=True)
class MissionCmdMsg:
    """High-level mission command over the generic command link."""

    verb: MissionVerb
    target_id: str = ""

    TYPE_NAME = "MissionCmd"

    def encode(self) -> bytes:
        if self.verb in (MissionVerb.GOTO_OBJECT, MissionVerb.EXECUTE_SWOOP) and not self.target_id:
            raise MessageError(f"MissionCmdMsg: {self.verb.name} requires a target_id")
        raw = self.target_id.encode()
        if len(raw) > 0xFFFF:
            raise MessageError("MissionCmdMsg: target_id too long")
        return struct.pack("<BH", int(self.verb), len(raw)) + raw

    @classmethod
    def decode(cls, buf: bytes) -> "MissionCmdMsg":
        if len(buf) < 3:
            raise MessageError("MissionCmdMsg: truncated")
        v, n = struct.unpack_from("<BH", buf)
        if len(buf) != 3 + n:
            raise MessageError(f"MissionCmdMsg: length mismatch ({len(buf)} != {3 + n})")
        try:
            verb = MissionVerb(v)
        except ValueError:
            raise MessageError(f"MissionCmdMsg: unknown verb {v}") from None
        target = buf[3:].decode()
        if verb in (MissionVerb.GOTO_OBJECT, MissionVerb.EXECUTE_SWOOP) and not target:
            raise MessageError(f"MissionCmdMsg: {verb.name} requires a target_id")
        return cls(verb=verb, target_id=target)


# Discovery payload ---------------------------------------------------------

DIR_PUB = 0
DIR_SUB = 1


@dataclass(frozen=True)
class EndpointInfo:
    topic_hash: int
    direction: int  # DIR_PUB or DIR_SUB
    address: tuple[str, int]  # (ip, port); ip "0.0.0.0" means "use datagram source"


@dataclass(frozen=True)
class ParticipantInfo:
    participant_id: int
    name: str
    domain_id: int
    endpoints: tuple[EndpointInfo, ...] = field(default_factory=tuple)

    TYPE_NAME = "ParticipantInfo"

    def encode(self) -> bytes:
        raw_name = self.name.encode()
        out = struct.pack("<QIH", self.participant_id, self.domain_id, len(raw_name))
        out += raw_name
        out += struct.pack("<H", len(self.endpoints))
        for ep in self.endpoints:
            ip_parts = [int(p) for p in ep.address[0].split(".")]
            out += struct.pack("<QB4BH", ep.topic_hash, ep.direction, *ip_parts, ep.address[1])
        return out

    @classmethod
    def decode(cls, buf: bytes) -> "ParticipantInfo":
        try:
            pid, domain, nlen = struct.unpack_from("<QIH", buf)
            off = 14
            name = buf[off : off + nlen].decode()
            off += nlen
            (nep,) = struct.unpack_from("<H", buf, off)
            off += 2
            eps = []
            for _ in range(nep):
                th, d, a, b, c, dd, port = struct.unpack_from("<QB4BH", buf, off)
                off += 15
                eps.append(EndpointInfo(th, d, (f"{a}.{b}.{c}.{dd}", port)))
            if off != len(buf):
                raise MessageError("ParticipantInfo: trailing bytes")
        except struct.error as e:
            raise MessageError(f"ParticipantInfo: truncated ({e})") from None
        return cls(participant_id=pid, name=name, domain_id=domain, endpoints=tuple(eps))


_SCHEMAS = {
    PoseMsg.TYPE_NAME: PoseMsg,
    SetpointMsg.TYPE_NAME: SetpointMsg,
    GripperCmdMsg.TYPE_NAME: GripperCmdMsg,
    MissionCmdMsg.TYPE_NAME: MissionCmdMsg,
    ParticipantInfo.TYPE_NAME: ParticipantInfo,
}


def encode_msg(msg) -> bytes:
    return msg.encode()


def decode_msg(type_name: str, buf: bytes):
    try:
        schema = _SCHEMAS[type_name]
    except KeyError:
        raise MessageError(f"unknown message type {type_name!r}") from None
    return schema.decode(buf)


# Golden corpus -------------------------------------------------------------
#
# Interop file: one "type_name <space> hex" per line.  Both this package and
# the offboard client must decode every entry to identical values and
# re-encode byte-exactly.


def write_golden_corpus(path, entries):
    with open(path, "w") as f:
        for type_name, frame in entries:
            f.write(f"{type_name} {frame.hex()}\n")


def read_golden_corpus(path):
    entries = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            type_name, hexframe = line.split()
            entries.append((type_name, bytes.fromhex(hexframe)))
    return entries
