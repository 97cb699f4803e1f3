from .envelope import (
    DISCOVERY_TOPIC_HASH,
    FLAG_ACK,
    FLAG_RELIABLE,
    MAX_PAYLOAD,
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
from .core import (
    BEST_EFFORT,
    RELIABLE,
    AlreadyExists,
    BusConfig,
    BusError,
    MessageInfo,
    Participant,
    PayloadTooLarge,
    Publisher,
    QosPolicy,
    Registry,
    Reliability,
    Subscriber,
    TransportUnavailable,
    create_participant,
    default_domain_id,
)
from .benchmark import INTRA_PROCESS, UDP_LOOPBACK, LatencyStats, benchmark_roundtrip

__all__ = [
    "DISCOVERY_TOPIC_HASH",
    "FLAG_ACK",
    "FLAG_RELIABLE",
    "MAX_PAYLOAD",
    "BadMagic",
    "BadVersion",
    "CrcMismatch",
    "EnvelopeError",
    "Truncated",
    "WireEnvelope",
    "decode_envelope",
    "encode_envelope",
    "fnv1a_64",
    "topic_hash",
    "BEST_EFFORT",
    "RELIABLE",
    "AlreadyExists",
    "BusConfig",
    "BusError",
    "MessageInfo",
    "Participant",
    "PayloadTooLarge",
    "Publisher",
    "QosPolicy",
    "Registry",
    "Reliability",
    "Subscriber",
    "TransportUnavailable",
    "create_participant",
    "default_domain_id",
    "INTRA_PROCESS",
    "UDP_LOOPBACK",
    "LatencyStats",
    "benchmark_roundtrip",
]
