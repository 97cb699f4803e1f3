"""Ping-pong round-trip latency benchmark over the bus transports.

conversion_mode="double_convert" serializes the payload to and from an
intermediate representation on every hop, emulating the two extra format
conversions per pub/sub event that layered middleware stacks pay.
"""

from __future__ import annotations

import json
import statistics
import threading
import time
from dataclasses import dataclass

from .core import BEST_EFFORT, BusConfig, Registry, create_participant

INTRA_PROCESS = "intra_process"
UDP_LOOPBACK = "udp_loopback"

# Benchmarks run in their own domain so they never cross campaign traffic.
BENCH_DOMAIN = 231


@dataclass(frozen=True)
class LatencyStats:
    samples: int
    min_ns: int
    median_ns: int
    p99_ns: int
    mean_ns: float
    max_ns: int

    @classmethod
    def from_samples(cls, samples_ns) -> "LatencyStats":
        if not samples_ns:
            raise ValueError("no samples")
        s = sorted(samples_ns)
        n = len(s)
        return cls(
            samples=n,
            min_ns=s[0],
            median_ns=s[n // 2],
            p99_ns=s[min(n - 1, (n * 99) // 100)],
            mean_ns=statistics.fmean(s),
            max_ns=s[-1],
        )


def _convert_roundtrip(payload: bytes) -> bytes:
    # bytes -> intermediate document -> bytes: one full format conversion.
    doc = json.dumps({"payload": payload.hex()})
    return bytes.fromhex(json.loads(doc)["payload"])


def benchmark_roundtrip(
    transport: str = INTRA_PROCESS,
    payload_size: int = 64,
    iterations: int = 10000,
    conversion_mode: str = "direct",
    timeout: float = 5.0,
) -> LatencyStats:
    if iterations < 100:
        raise ValueError("iterations must be >= 100")
    if transport not in (INTRA_PROCESS, UDP_LOOPBACK):
        raise ValueError(f"unknown transport {transport!r}")
    if conversion_mode not in ("direct", "double_convert"):
        raise ValueError(f"unknown conversion_mode {conversion_mode!r}")
    convert = conversion_mode == "double_convert"

    if transport == INTRA_PROCESS:
        registry = Registry()
        cfg = BusConfig(enable_udp=False)
        ping = create_participant("bench_ping", BENCH_DOMAIN, config=cfg, registry=registry)
        pong = create_participant("bench_pong", BENCH_DOMAIN, config=cfg, registry=registry)
    else:
        cfg = BusConfig(announce_interval=0.1)
        ping = create_participant("bench_ping", BENCH_DOMAIN, config=cfg)
        pong = create_participant("bench_pong", BENCH_DOMAIN, config=cfg)

    try:
        done = threading.Event()
        reply_box = []

        def on_request(payload, info):
            if convert:
                payload = _convert_roundtrip(payload)  # receive-side conversion
                payload = _convert_roundtrip(payload)  # send-side conversion
            rep_pub.publish(payload)

        def on_reply(payload, info):
            if convert:
                payload = _convert_roundtrip(payload)
            reply_box.append(payload)
            done.set()

        req_pub = ping.advertise("bench/req", "Blob", BEST_EFFORT)
        rep_sub = ping.subscribe("bench/rep", "Blob", BEST_EFFORT, handler=on_reply)
        rep_pub = pong.advertise("bench/rep", "Blob", BEST_EFFORT)
        req_sub = pong.subscribe("bench/req", "Blob", BEST_EFFORT, handler=on_request)

        if transport == UDP_LOOPBACK:
            deadline = time.monotonic() + timeout
            while (
                ping.remote_subscriber_count("bench/req", "Blob") == 0
                or pong.remote_subscriber_count("bench/rep", "Blob") == 0
            ):
                if time.monotonic() > deadline:
                    raise TimeoutError("benchmark participants never matched")
                time.sleep(0.005)

        payload = bytes(i & 0xFF for i in range(payload_size))
        warmup = max(1, iterations // 10)
        samples = []
        for i in range(iterations):
            done.clear()
            t0 = time.perf_counter_ns()
            out = _convert_roundtrip(payload) if convert else payload
            req_pub.publish(out)
            if not done.wait(timeout):
                raise TimeoutError(f"round-trip {i} timed out")
            t1 = time.perf_counter_ns()
            if i >= warmup:
                samples.append(t1 - t0)
        return LatencyStats.from_samples(samples)
    finally:
        ping.close()
        pong.close()
