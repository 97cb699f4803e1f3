"""Native codecs for the bus message schemas.

Layouts mirror the published schema table:

    Pose            <7d>    position xyz, quaternion wxyz
    Setpoint        <10d>   position, velocity, acceleration, yaw
    GripperCmd      <BHH>   state, left/right servo angle (centidegrees)
    MissionCmd      <BH>+   verb, target length, UTF-8 target
    ParticipantInfo <QIH>+  id, domain, name, endpoint table
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from struct import Struct, error as StructError

QUAT_NORM_TOL = 1e-6

VERB_NAMES = {0: "takeoff", 1: "goto", 2: "swoop", 3: "land", 4: "abort"}
VERB_IDS = {v: k for k, v in VERB_NAMES.items()}
_TARGET_VERBS = {1, 2}  # goto, swoop

GRIPPER_STATES = {0: "open", 1: "closed"}

_POSE = Struct("<7d")
_SETPOINT = Struct("<10d")
_GRIPPER = Struct("<BHH")
_MISSION_HEAD = Struct("<BH")
_PART_HEAD = Struct("<QIH")
_EP_COUNT = Struct("<H")
_ENDPOINT = Struct("<QB4BH")


class CodecError(ValueError):
    pass


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float]

    def to_bytes(self) -> bytes:
        return _POSE.pack(*self.position, *self.orientation)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Pose":
        try:
            vals = _POSE.unpack(raw)
        except StructError:
            raise CodecError(f"Pose: bad length {len(raw)}") from None
        if not all(math.isfinite(v) for v in vals):
            raise CodecError("Pose: non-finite field")
        quat = vals[3:]
        norm = math.hypot(*quat)
        if abs(norm - 1.0) > QUAT_NORM_TOL:
            raise CodecError(f"Pose: quaternion norm {norm}")
        if abs(norm - 1.0) > 1e-12:
            quat = tuple(c / norm for c in quat)
        return cls(position=vals[:3], orientation=quat)


@dataclass(frozen=True)
class Setpoint:
    position: tuple[float, float, float]
    velocity: tuple[float, float, float]
    acceleration: tuple[float, float, float]
    yaw: float = 0.0

    def to_bytes(self) -> bytes:
        return _SETPOINT.pack(*self.position, *self.velocity, *self.acceleration, self.yaw)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Setpoint":
        try:
            v = _SETPOINT.unpack(raw)
        except StructError:
            raise CodecError(f"Setpoint: bad length {len(raw)}") from None
        if not all(math.isfinite(x) for x in v):
            raise CodecError("Setpoint: non-finite field")
        return cls(position=v[0:3], velocity=v[3:6], acceleration=v[6:9], yaw=v[9])


@dataclass(frozen=True)
class GripperCmd:
    state: str  # "open" | "closed"
    angle_left: int = 0
    angle_right: int = 0

    def to_bytes(self) -> bytes:
        if self.state not in ("open", "closed"):
            raise CodecError(f"GripperCmd: bad state {self.state!r}")
        for a in (self.angle_left, self.angle_right):
            if not 0 <= a <= 18000:
                raise CodecError(f"GripperCmd: angle {a} outside [0, 18000]")
        code = 0 if self.state == "open" else 1
        return _GRIPPER.pack(code, self.angle_left, self.angle_right)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "GripperCmd":
        try:
            code, left, right = _GRIPPER.unpack(raw)
        except StructError:
            raise CodecError(f"GripperCmd: bad length {len(raw)}") from None
        if code not in GRIPPER_STATES:
            raise CodecError(f"GripperCmd: unknown state {code}")
        if left > 18000 or right > 18000:
            raise CodecError("GripperCmd: angle outside [0, 18000]")
        return cls(state=GRIPPER_STATES[code], angle_left=left, angle_right=right)


@dataclass(frozen=True)
class MissionCmd:
    verb: str  # "takeoff" | "goto" | "swoop" | "land" | "abort"
    target: str = ""

    def to_bytes(self) -> bytes:
        if self.verb not in VERB_IDS:
            raise CodecError(f"MissionCmd: unknown verb {self.verb!r}")
        code = VERB_IDS[self.verb]
        if code in _TARGET_VERBS and not self.target:
            raise CodecError(f"MissionCmd: {self.verb} needs a target")
        raw = self.target.encode()
        return _MISSION_HEAD.pack(code, len(raw)) + raw

    @classmethod
    def from_bytes(cls, raw: bytes) -> "MissionCmd":
        if len(raw) < _MISSION_HEAD.size:
            raise CodecError("MissionCmd: truncated")
        code, n = _MISSION_HEAD.unpack_from(raw)
        if len(raw) != _MISSION_HEAD.size + n:
            raise CodecError("MissionCmd: length mismatch")
        if code not in VERB_NAMES:
            raise CodecError(f"MissionCmd: unknown verb {code}")
        target = raw[_MISSION_HEAD.size :].decode()
        if code in _TARGET_VERBS and not target:
            raise CodecError(f"MissionCmd: {VERB_NAMES[code]} needs a target")
        return cls(verb=VERB_NAMES[code], target=target)


@dataclass(frozen=True)
class ParticipantRecord:
    participant_id: int
    name: str
    domain: int
    endpoints: tuple[tuple[int, int, str, int], ...] = ()
    # each endpoint: (topic_id, direction, ip, port); direction 0=pub 1=sub

    def to_bytes(self) -> bytes:
        raw_name = self.name.encode()
        out = _PART_HEAD.pack(self.participant_id, self.domain, len(raw_name)) + raw_name
        out += _EP_COUNT.pack(len(self.endpoints))
        for topic, direction, ip, port in self.endpoints:
            octets = [int(p) for p in ip.split(".")]
            out += _ENDPOINT.pack(topic, direction, *octets, port)
        return out

    @classmethod
    def from_bytes(cls, raw: bytes) -> "ParticipantRecord":
        try:
            pid, domain, nlen = _PART_HEAD.unpack_from(raw)
            cursor = _PART_HEAD.size
            name = raw[cursor : cursor + nlen].decode()
            cursor += nlen
            (count,) = _EP_COUNT.unpack_from(raw, cursor)
            cursor += _EP_COUNT.size
            endpoints = []
            for _ in range(count):
                topic, direction, o1, o2, o3, o4, port = _ENDPOINT.unpack_from(raw, cursor)
                cursor += _ENDPOINT.size
                endpoints.append((topic, direction, f"{o1}.{o2}.{o3}.{o4}", port))
        except (StructError, UnicodeDecodeError) as exc:
            raise CodecError(f"ParticipantInfo: {exc}") from None
        if cursor != len(raw):
            raise CodecError("ParticipantInfo: trailing bytes")
        return cls(participant_id=pid, name=name, domain=domain, endpoints=tuple(endpoints))


_BY_TYPE_NAME = {
    "Pose": Pose,
    "Setpoint": Setpoint,
    "GripperCmd": GripperCmd,
    "MissionCmd": MissionCmd,
    "ParticipantInfo": ParticipantRecord,
}


def decode_payload(type_name: str, raw: bytes):
    codec = _BY_TYPE_NAME.get(type_name)
    if codec is None:
        raise CodecError(f"no codec for type {type_name!r}")
    return codec.from_bytes(raw)


def load_corpus(path) -> list[tuple[str, bytes]]:
    """Read a golden-corpus file of "TypeName hexframe" lines."""
    entries = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            type_name, hexstr = line.split()
            entries.append((type_name, bytes.fromhex(hexstr)))
    return entries
