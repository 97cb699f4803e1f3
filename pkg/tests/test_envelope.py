"""Wire framing: layout goldens, independent hash oracle, error taxonomy."""

import struct
import zlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raptor.bus.envelope import (
    FLAG_ACK,
    FLAG_RELIABLE,
    HEADER_SIZE,
    MAX_PAYLOAD,
    MIN_FRAME_SIZE,
    BadMagic,
    BadVersion,
    CrcMismatch,
    EnvelopeError,
    Truncated,
    WireEnvelope,
    decode_envelope,
    encode_envelope,
    fnv1a_64,
    topic_hash,
)


def oracle_fnv1a_64(data: bytes) -> int:
    """Independent FNV-1a implementation for cross-checking."""
    h = 14695981039346656037
    for byte in data:
        h = ((h ^ byte) * 1099511628211) % 2**64
    return h


class TestHashing:
    def test_fnv1a_published_vectors(self):
        # Reference values for the 64-bit FNV-1a offset basis and "a".
        assert fnv1a_64(b"") == 0xCBF29CE484222325
        assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C

    def test_fnv1a_matches_oracle(self):
        for data in (b"pose/drone/Pose", b"", b"x" * 100, bytes(range(256))):
            assert fnv1a_64(data) == oracle_fnv1a_64(data)

    def test_topic_hash_is_fnv_of_joined_names(self):
        assert topic_hash("pose/drone", "Pose") == oracle_fnv1a_64(b"pose/drone/Pose")

    def test_topic_hash_distinguishes_type(self):
        assert topic_hash("a", "B") != topic_hash("a", "C")


class TestLayout:
    def test_header_and_frame_sizes(self):
        assert HEADER_SIZE == 30
        assert MIN_FRAME_SIZE == 34

    def test_empty_payload_frame_is_34_bytes(self):
        env = WireEnvelope(topic_hash=1, seq=0, timestamp_ns=0, payload=b"")
        frame = encode_envelope(env)
        assert len(frame) == 34
        assert frame[:5] == b"RPTR\x01"

    def test_golden_frame_against_independent_packing(self):
        env = WireEnvelope(
            topic_hash=0x0123456789ABCDEF,
            seq=42,
            timestamp_ns=1_700_000_000_000_000_000,
            payload=b"\xde\xad\xbe\xef",
            flags=FLAG_RELIABLE,
        )
        header = struct.pack(
            "<4sBBQIQI",
            b"RPTR",
            1,
            FLAG_RELIABLE,
            0x0123456789ABCDEF,
            42,
            1_700_000_000_000_000_000,
            4,
        )
        body = header + b"\xde\xad\xbe\xef"
        expected = body + struct.pack("<I", zlib.crc32(body))
        assert encode_envelope(env) == expected

    def test_flag_accessors(self):
        env = WireEnvelope(1, 0, 0, b"", flags=FLAG_RELIABLE | FLAG_ACK)
        assert env.reliable and env.is_ack
        assert not WireEnvelope(1, 0, 0, b"").reliable


class TestRoundTrip:
    @settings(max_examples=200, deadline=None)
    @given(
        payload=st.binary(max_size=512),
        th=st.integers(min_value=0, max_value=2**64 - 1),
        seq=st.integers(min_value=0, max_value=2**32 - 1),
        ts=st.integers(min_value=0, max_value=2**64 - 1),
        flags=st.integers(min_value=0, max_value=255),
    )
    def test_encode_decode_roundtrip(self, payload, th, seq, ts, flags):
        env = WireEnvelope(topic_hash=th, seq=seq, timestamp_ns=ts, payload=payload, flags=flags)
        out = decode_envelope(encode_envelope(env))
        assert out == env

    def test_max_payload_accepted(self):
        env = WireEnvelope(1, 0, 0, b"\x00" * MAX_PAYLOAD)
        assert decode_envelope(encode_envelope(env)).payload == b"\x00" * MAX_PAYLOAD

    def test_oversized_payload_rejected(self):
        with pytest.raises(EnvelopeError):
            encode_envelope(WireEnvelope(1, 0, 0, b"\x00" * (MAX_PAYLOAD + 1)))

    def test_out_of_range_fields_rejected(self):
        with pytest.raises(EnvelopeError):
            encode_envelope(WireEnvelope(-1, 0, 0, b""))
        with pytest.raises(EnvelopeError):
            encode_envelope(WireEnvelope(1, 2**32, 0, b""))
        with pytest.raises(EnvelopeError):
            encode_envelope(WireEnvelope(1, 0, 0, b"", flags=256))


def _valid_frame(payload=b"hello"):
    return encode_envelope(WireEnvelope(topic_hash=7, seq=3, timestamp_ns=99, payload=payload))


class TestErrors:
    def test_bad_magic(self):
        frame = bytearray(_valid_frame())
        frame[0] = ord("X")
        with pytest.raises(BadMagic):
            decode_envelope(bytes(frame))

    def test_bad_version(self):
        frame = bytearray(_valid_frame())
        frame[4] = 2
        # keep the CRC consistent so the version check is what fires
        body = bytes(frame[:-4])
        frame[-4:] = struct.pack("<I", zlib.crc32(body))
        with pytest.raises(BadVersion):
            decode_envelope(bytes(frame))

    def test_truncated_short_frame(self):
        with pytest.raises(Truncated):
            decode_envelope(b"RPTR" + b"\x00" * 10)

    def test_truncated_length_mismatch(self):
        with pytest.raises(Truncated):
            decode_envelope(_valid_frame()[:-1])

    def test_crc_mismatch(self):
        frame = bytearray(_valid_frame())
        frame[HEADER_SIZE] ^= 0xFF  # corrupt first payload byte
        with pytest.raises(CrcMismatch):
            decode_envelope(bytes(frame))

    def test_all_errors_are_envelope_errors(self):
        for exc in (BadMagic, BadVersion, Truncated, CrcMismatch):
            assert issubclass(exc, EnvelopeError)

    @settings(max_examples=200, deadline=None)
    @given(index=st.integers(min_value=0, max_value=38), bit=st.integers(min_value=0, max_value=7))
    def test_single_bit_flip_never_decodes_silently(self, index, bit):
        frame = bytearray(_valid_frame())
        frame[index] ^= 1 << bit
        try:
            out = decode_envelope(bytes(frame))
        except EnvelopeError:
            return
        # The only way a flip survives is if it produced an identical frame,
        # which a single-bit XOR cannot.
        raise AssertionError(f"corrupted frame decoded: {out}")
