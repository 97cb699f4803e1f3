"""Wire framing for the bus.

Every datagram on the wire (data, ack, discovery) is one envelope with a
fixed little-endian header and a trailing CRC-32 over header + payload.

Layout: magic(4) version(1) flags(1) topic_hash(8) seq(4) timestamp_ns(8)
payload_len(4) payload(n) crc(4).
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

MAGIC = b"RPTR"
VERSION = 1

FLAG_RELIABLE = 0x01
FLAG_ACK = 0x02

_HEADER_FMT = "<4sBBQIQI"
HEADER_SIZE = struct.calcsize(_HEADER_FMT)  # 30
MIN_FRAME_SIZE = HEADER_SIZE + 4  # 34
MAX_PAYLOAD = 64 * 1024

# topic_hash 0 is reserved for discovery announcements.
DISCOVERY_TOPIC_HASH = 0

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


class EnvelopeError(ValueError):
    """Base for framing errors."""


class BadMagic(EnvelopeError):
    pass


class BadVersion(EnvelopeError):
    pass


class Truncated(EnvelopeError):
    pass


class CrcMismatch(EnvelopeError):
    pass


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _U64
    return h


def topic_hash(topic_name: str, type_name: str) -> int:
    """64-bit FNV-1a over "topic/type"; the matching key for pub/sub."""
    return fnv1a_64(f"{topic_name}/{type_name}".encode())


@dataclass(frozen=True)
class WireEnvelope:
    topic_hash: int
    seq: int
    timestamp_ns: int
    payload: bytes
    flags: int = 0
    version: int = VERSION

    @property
    def reliable(self) -> bool:
        return bool(self.flags & FLAG_RELIABLE)

    @property
    def is_ack(self) -> bool:
        return bool(self.flags & FLAG_ACK)


def encode_envelope(env: WireEnvelope) -> bytes:
    if not 0 <= env.topic_hash <= _U64:
        raise EnvelopeError(f"topic_hash out of range: {env.topic_hash}")
    if not 0 <= env.seq <= 0xFFFFFFFF:
        raise EnvelopeError(f"seq out of range: {env.seq}")
    if not 0 <= env.timestamp_ns <= _U64:
        raise EnvelopeError(f"timestamp_ns out of range: {env.timestamp_ns}")
    if not 0 <= env.flags <= 0xFF:
        raise EnvelopeError(f"flags out of range: {env.flags}")
    if len(env.payload) > MAX_PAYLOAD:
        raise EnvelopeError(f"payload exceeds {MAX_PAYLOAD} bytes")
    header = struct.pack(
        _HEADER_FMT,
        MAGIC,
        env.version,
        env.flags,
        env.topic_hash,
        env.seq,
        env.timestamp_ns,
        len(env.payload),
    )
    body = header + env.payload
    return body + struct.pack("<I", zlib.crc32(body))


def decode_envelope(buf: bytes) -> WireEnvelope:
    if len(buf) < MIN_FRAME_SIZE:
        raise Truncated(f"frame too short: {len(buf)} < {MIN_FRAME_SIZE}")
    magic, version, flags, th, seq, ts, plen = struct.unpack_from(_HEADER_FMT, buf)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise BadVersion(f"unsupported version {version}")
    if len(buf) != MIN_FRAME_SIZE + plen:
        raise Truncated(f"length mismatch: payload_len={plen}, frame={len(buf)}")
    body = buf[:-4]
    (crc,) = struct.unpack_from("<I", buf, len(buf) - 4)
    if crc != zlib.crc32(body):
        raise CrcMismatch("crc mismatch")
    payload = bytes(buf[HEADER_SIZE:-4])
    return WireEnvelope(
        topic_hash=th,
        seq=seq,
        timestamp_ns=ts,
        payload=payload,
        flags=flags,
        version=version,
    )
