"""Native implementation of the bus wire format.

Frame layout (little-endian):

    magic      4s   "RPTR"
    version    B    1
    flags      B    bit0 reliable, bit1 ack
    topic_id   Q    64-bit FNV-1a of "topic/type" (0 reserved for discovery)
    seq        I    per-publisher counter
    stamp_ns   Q    nanosecond timestamp
    length     I    payload byte count
    payload    length bytes
    crc32      I    zlib CRC-32 over header + payload
"""

from __future__ import annotations

import zlib
from binascii import crc32  # same polynomial as zlib.crc32; explicit import
from dataclasses import dataclass
from struct import Struct

MAGIC = b"RPTR"
VERSION = 1
FLAG_RELIABLE = 0x01
FLAG_ACK = 0x02
DISCOVERY_TOPIC = 0
PAYLOAD_LIMIT = 65536

_HEADER = Struct("<4sBBQIQI")
_CRC = Struct("<I")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x00000100000001B3
_U64 = (1 << 64) - 1


class WireError(ValueError):
    pass


def fnv1a(data: bytes) -> int:
    acc = _FNV_OFFSET
    for b in data:
        acc = ((acc ^ b) * _FNV_PRIME) & _U64
    return acc


def topic_id(topic: str, type_name: str) -> int:
    return fnv1a(f"{topic}/{type_name}".encode())


@dataclass(frozen=True)
class Frame:
    topic: int
    seq: int
    stamp_ns: int
    payload: bytes
    flags: int = 0

    @property
    def reliable(self) -> bool:
        return bool(self.flags & FLAG_RELIABLE)

    @property
    def is_ack(self) -> bool:
        return bool(self.flags & FLAG_ACK)


def build_frame(frame: Frame) -> bytes:
    if len(frame.payload) > PAYLOAD_LIMIT:
        raise WireError(f"payload of {len(frame.payload)} bytes exceeds {PAYLOAD_LIMIT}")
    body = _HEADER.pack(
        MAGIC,
        VERSION,
        frame.flags,
        frame.topic,
        frame.seq,
        frame.stamp_ns,
        len(frame.payload),
    ) + frame.payload
    return body + _CRC.pack(crc32(body))


def parse_frame(raw: bytes) -> Frame:
    if len(raw) < _HEADER.size + _CRC.size:
        raise WireError(f"frame of {len(raw)} bytes is shorter than the minimum")
    magic, version, flags, topic, seq, stamp, length = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise WireError(f"bad magic {magic!r}")
    if len(raw) != _HEADER.size + length + _CRC.size:
        raise WireError(f"length field {length} does not match frame size {len(raw)}")
    (crc,) = _CRC.unpack_from(raw, len(raw) - _CRC.size)
    if crc != zlib.crc32(raw[: -_CRC.size]):
        raise WireError("CRC mismatch")
    if version != VERSION:
        raise WireError(f"unsupported version {version}")
    return Frame(
        topic=topic,
        seq=seq,
        stamp_ns=stamp,
        payload=raw[_HEADER.size : _HEADER.size + length],
        flags=flags,
    )


def ack_for(frame: Frame, stamp_ns: int) -> bytes:
    return build_frame(
        Frame(topic=frame.topic, seq=frame.seq, stamp_ns=stamp_ns, payload=b"", flags=FLAG_ACK)
    )
