"""Typed publish/subscribe middleware with automatic discovery.

Participants announce themselves on a UDP multicast group once per
announce interval (plus immediately whenever their endpoint list changes
or they hear from an unknown peer, which makes same-host convergence
near-instant).  Data flows as unicast UDP envelopes to every matched
remote endpoint; publishers and subscribers that share a Registry are
matched in-process and delivered through queues without touching a
socket.

Reliable QoS is positive-ack per envelope with exponential backoff
(base 2 ms), bounded by max_retries.  Subscribers see per-publisher
FIFO order: BestEffort drops stale/duplicate sequence numbers, Reliable
holds back out-of-order envelopes until the gap fills.
"""

from __future__ import annotations

import os
import random
import socket
import struct
import threading
import time
from collections import deque
from dataclasses import dataclass, field, replace

from ..messages import DIR_PUB, DIR_SUB, EndpointInfo, MessageError, ParticipantInfo
from .envelope import (
    DISCOVERY_TOPIC_HASH,
    FLAG_ACK,
    FLAG_RELIABLE,
    MAX_PAYLOAD,
    EnvelopeError,
    WireEnvelope,
    decode_envelope,
    encode_envelope,
    topic_hash,
)

MAX_DOMAIN_ID = 232


class BusError(Exception):
    pass


class TransportUnavailable(BusError):
    pass


class AlreadyExists(BusError):
    pass


class PayloadTooLarge(BusError):
    pass


class Reliability:
    BEST_EFFORT = "best_effort"
    RELIABLE = "reliable"


@dataclass(frozen=True)
class QosPolicy:
    reliability: str = Reliability.BEST_EFFORT
    history_depth: int = 8
    max_retries: int = 0

    def __post_init__(self):
        if self.history_depth < 1:
            raise ValueError("history_depth must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.reliability == Reliability.BEST_EFFORT and self.max_retries != 0:
            raise ValueError("BestEffort implies max_retries = 0")


BEST_EFFORT = QosPolicy()
RELIABLE = QosPolicy(reliability=Reliability.RELIABLE, history_depth=64, max_retries=8)


@dataclass
class BusConfig:
    multicast_group: str = "239.82.80.84"
    discovery_port: int = 7400
    announce_interval: float = 1.0
    expiry_intervals: int = 5
    enable_udp: bool = True
    # Deliver handler callbacks inline from publish() instead of a dedicated
    # thread.  Used by the simulator, which needs bit-deterministic runs.
    synchronous_delivery: bool = False
    # Test hook: drop this fraction of outgoing unicast data datagrams,
    # deterministically under loss_seed.
    loss_rate: float = 0.0
    loss_seed: int = 0
    retry_base_delay: float = 0.002
    max_inflight: int = 2048


class Registry:
    """Scope of the intra-process fast path.

    Participants handed the same Registry deliver matched messages through
    in-memory queues; traffic to everyone else goes over UDP.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._participants = []

    def add(self, p):
        with self._lock:
            self._participants.append(p)

    def remove(self, p):
        with self._lock:
            if p in self._participants:
                self._participants.remove(p)

    def participants(self):
        with self._lock:
            return list(self._participants)

    def local_pids(self):
        with self._lock:
            return {p.info.participant_id for p in self._participants}


@dataclass
class TransportCounters:
    intra_deliveries: int = 0
    udp_datagrams_sent: int = 0
    udp_datagrams_received: int = 0
    acks_sent: int = 0
    retransmissions: int = 0
    delivery_failures: int = 0
    decode_errors: int = 0


@dataclass(frozen=True)
class MessageInfo:
    seq: int
    timestamp_ns: int
    source: object  # opaque per-publisher key


def default_domain_id() -> int:
    return int(os.environ.get("RAPTOR_DOMAIN_ID", "0"))


class Publisher:
    def __init__(self, participant, topic_name, type_name, qos):
        self.participant = participant
        self.topic_name = topic_name
        self.type_name = type_name
        self.qos = qos
        self.topic_hash = topic_hash(topic_name, type_name)
        self._seq = 0
        self._lock = threading.Lock()

    def publish(self, payload: bytes, timestamp_ns: int | None = None) -> int:
        if len(payload) > MAX_PAYLOAD:
            raise PayloadTooLarge(f"payload {len(payload)} exceeds {MAX_PAYLOAD} bytes")
        with self._lock:
            seq = self._seq
            self._seq += 1
        flags = FLAG_RELIABLE if self.qos.reliability == Reliability.RELIABLE else 0
        env = WireEnvelope(
            topic_hash=self.topic_hash,
            seq=seq,
            timestamp_ns=time.time_ns() if timestamp_ns is None else timestamp_ns,
            payload=payload,
            flags=flags,
        )
        self.participant._dispatch_publish(self, env)
        return seq


class Subscriber:
    def __init__(self, participant, topic_name, type_name, qos, handler):
        self.participant = participant
        self.topic_name = topic_name
        self.type_name = type_name
        self.qos = qos
        self.handler = handler
        self.topic_hash = topic_hash(topic_name, type_name)
        self.delivered = 0
        self.dropped = 0
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._queue = deque()
        self._sources = {}  # source key -> ordering state
        self._closed = False
        self._thread = None
        if not participant.config.synchronous_delivery:
            self._thread = threading.Thread(
                target=self._delivery_loop, name=f"deliver-{topic_name}", daemon=True
            )
            self._thread.start()

    # -- ordering ----------------------------------------------------------

    def _order(self, source, env):
        """Return the envelopes now deliverable from this source, in order."""
        reliable = self.qos.reliability == Reliability.RELIABLE
        st = self._sources.get(source)
        if st is None:
            st = {"last": -1, "holdback": {}}
            self._sources[source] = st
        if reliable:
            if env.seq <= st["last"]:
                return []  # duplicate (retransmission already delivered)
            st["holdback"][env.seq] = env
            out = []
            while st["last"] + 1 in st["holdback"]:
                st["last"] += 1
                out.append(st["holdback"].pop(st["last"]))
            return out
        if env.seq <= st["last"]:
            return []  # stale or duplicate; keep seq strictly increasing
        st["last"] = env.seq
        return [env]

    def _accept(self, source, env) -> bool:
        """Queue an envelope for delivery.  Returns False if refused (full
        Reliable queue), which suppresses the ack so the sender retries."""
        with self._cond:
            if self._closed:
                return False
            deliverable = self._order(source, env)
            if not deliverable:
                return True  # duplicate/stale: already handled, ack is fine
            if self.qos.reliability == Reliability.RELIABLE:
                if len(self._queue) + len(deliverable) > self.qos.history_depth:
                    # Back-pressure: roll back the ordering state and refuse.
                    st = self._sources[source]
                    st["last"] = deliverable[0].seq - 1
                    for e in deliverable:
                        st["holdback"][e.seq] = e
                    return False
            else:
                while len(self._queue) + len(deliverable) > self.qos.history_depth:
                    self._queue.popleft()
                    self.dropped += 1
            for e in deliverable:
                self._queue.append((source, e))
            self._cond.notify()
        if self.participant.config.synchronous_delivery:
            self._drain_inline()
        return True

    def _drain_inline(self):
        while True:
            with self._cond:
                if not self._queue:
                    return
                source, env = self._queue.popleft()
            self._invoke(source, env)

    def _delivery_loop(self):
        while True:
            with self._cond:
                while not self._queue and not self._closed:
                    self._cond.wait()
                if self._closed and not self._queue:
                    return
                source, env = self._queue.popleft()
            self._invoke(source, env)

    def _invoke(self, source, env):
        info = MessageInfo(seq=env.seq, timestamp_ns=env.timestamp_ns, source=source)
        try:
            self.handler(env.payload, info)
        except Exception:  # noqa: BLE001 - a bad handler must not kill delivery
            self.participant.counters.delivery_failures += 1
        self.delivered += 1

    def close(self):
        with self._cond:
            self._closed = True
            self._cond.notify_all()
        if self._thread is not None and self._thread is not threading.current_thread():
            self._thread.join(timeout=2.0)


class _PendingAck:
    __slots__ = ("frame", "dest", "attempts", "deadline", "max_retries")

    def __init__(self, frame, dest, deadline, max_retries):
        self.frame = frame
        self.dest = dest
        self.attempts = 0
        self.deadline = deadline
        self.max_retries = max_retries


class Participant:
    """One endpoint in a bus domain: owns sockets, discovery, and handles."""

    def __init__(self, name, domain_id=None, config=None, registry=None):
        if not name:
            raise ValueError("participant name must be non-empty")
        if domain_id is None:
            domain_id = default_domain_id()
        if not 0 <= domain_id <= MAX_DOMAIN_ID:
            raise ValueError(f"domain_id must be in [0, {MAX_DOMAIN_ID}]")
        self.config = config or BusConfig()
        self.registry = registry or Registry()
        self.counters = TransportCounters()
        self._lock = threading.Lock()
        self._publishers = {}
        self._subscribers = {}
        self._remotes = {}  # pid -> dict(info=..., last_seen=...)
        self._remote_subs = {}  # topic_hash -> {(ip, port): pid}
        self._pending = {}  # (topic_hash, seq, dest) -> _PendingAck
        self._pending_cond = threading.Condition(self._lock)
        self._announce_seq = 0
        self._closed = threading.Event()
        self._loss_rng = random.Random(self.config.loss_seed)

        self.info = ParticipantInfo(
            participant_id=random.getrandbits(64),
            name=name,
            domain_id=domain_id,
            endpoints=(),
        )

        self._data_sock = None
        self._disc_rx = None
        self._disc_tx = None
        self._threads = []
        if self.config.enable_udp:
            self._open_sockets()
            for target, tname in (
                (self._data_rx_loop, "data-rx"),
                (self._discovery_rx_loop, "disc-rx"),
                (self._discovery_tx_loop, "disc-tx"),
                (self._retransmit_loop, "retx"),
            ):
                t = threading.Thread(target=target, name=f"{name}-{tname}", daemon=True)
                t.start()
                self._threads.append(t)
        self.registry.add(self)

    # -- setup -------------------------------------------------------------

    def _open_sockets(self):
        cfg = self.config
        try:
            self._data_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            # Burst traffic (retransmission storms, campaign fan-out) easily
            # overflows the default receive buffer; ask for 4 MiB.
            try:
                self._data_sock.setsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF, 1 << 22)
            except OSError:
                pass
            self._data_sock.bind(("", 0))
            self._data_sock.settimeout(0.2)

            self._disc_rx = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self._disc_rx.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            if hasattr(socket, "SO_REUSEPORT"):
                self._disc_rx.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEPORT, 1)
            self._disc_rx.bind(("", cfg.discovery_port))
            mreq = struct.pack(
                "4s4s", socket.inet_aton(cfg.multicast_group), socket.inet_aton("0.0.0.0")
            )
            self._disc_rx.setsockopt(socket.IPPROTO_IP, socket.IP_ADD_MEMBERSHIP, mreq)
            self._disc_rx.settimeout(0.2)

            self._disc_tx = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self._disc_tx.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_TTL, 1)
            self._disc_tx.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_LOOP, 1)
        except OSError as e:
            raise TransportUnavailable(f"socket setup failed: {e}") from e

    @property
    def data_port(self):
        return self._data_sock.getsockname()[1] if self._data_sock else 0

    # -- handles -----------------------------------------------------------

    def advertise(self, topic_name, type_name, qos=BEST_EFFORT) -> Publisher:
        if not topic_name or not type_name:
            raise ValueError("topic and type names must be non-empty")
        key = (topic_name, type_name)
        with self._lock:
            if key in self._publishers:
                raise AlreadyExists(f"already advertising {key}")
            pub = Publisher(self, topic_name, type_name, qos)
            self._publishers[key] = pub
        self._refresh_endpoints()
        return pub

    def subscribe(self, topic_name, type_name, qos=BEST_EFFORT, handler=None) -> Subscriber:
        if not topic_name or not type_name:
            raise ValueError("topic and type names must be non-empty")
        if handler is None:
            raise ValueError("handler is required")
        key = (topic_name, type_name)
        with self._lock:
            if key in self._subscribers:
                raise AlreadyExists(f"already subscribed to {key}")
            sub = Subscriber(self, topic_name, type_name, qos, handler)
            self._subscribers[key] = sub
        self._refresh_endpoints()
        return sub

    def _refresh_endpoints(self):
        with self._lock:
            eps = []
            for pub in self._publishers.values():
                eps.append(EndpointInfo(pub.topic_hash, DIR_PUB, ("0.0.0.0", self.data_port)))
            for sub in self._subscribers.values():
                eps.append(EndpointInfo(sub.topic_hash, DIR_SUB, ("0.0.0.0", self.data_port)))
            self.info = replace(self.info, endpoints=tuple(eps))
        if self.config.enable_udp:
            self._send_announcement()

    def subscribers_for(self, th):
        with self._lock:
            return [s for s in self._subscribers.values() if s.topic_hash == th]

    # -- publishing --------------------------------------------------------

    def _dispatch_publish(self, pub, env):
        # Intra-process fast path: everyone sharing the registry, same domain.
        for p in self.registry.participants():
            if p.info.domain_id != self.info.domain_id:
                continue
            for sub in p.subscribers_for(env.topic_hash):
                sub._accept(("local", id(pub)), env)
                self.counters.intra_deliveries += 1
        if not self.config.enable_udp:
            return
        local_pids = self.registry.local_pids()
        with self._lock:
            dests = [
                addr
                for addr, pid in self._remote_subs.get(env.topic_hash, {}).items()
                if pid not in local_pids
            ]
        if not dests:
            return
        frame = encode_envelope(env)
        reliable = env.reliable
        if reliable:
            with self._pending_cond:
                while (
                    len(self._pending) >= self.config.max_inflight
                    and not self._closed.is_set()
                ):
                    self._pending_cond.wait(timeout=0.05)
        now = time.monotonic()
        for dest in dests:
            if reliable:
                with self._lock:
                    self._pending[(env.topic_hash, env.seq, dest)] = _PendingAck(
                        frame, dest, now + self.config.retry_base_delay, pub.qos.max_retries
                    )
            self._send_data(frame, dest)

    def _send_data(self, frame, dest):
        if self.config.loss_rate > 0.0 and self._loss_rng.random() < self.config.loss_rate:
            return  # injected loss
        try:
            self._data_sock.sendto(frame, dest)
            self.counters.udp_datagrams_sent += 1
        except OSError:
            pass

    # -- receive loops -----------------------------------------------------

    def _data_rx_loop(self):
        while not self._closed.is_set():
            try:
                buf, addr = self._data_sock.recvfrom(MAX_PAYLOAD + 64)
            except socket.timeout:
                continue
            except OSError:
                return
            self.counters.udp_datagrams_received += 1
            try:
                env = decode_envelope(buf)
            except EnvelopeError:
                self.counters.decode_errors += 1
                continue
            if env.is_ack:
                self._on_ack(env, addr)
                continue
            subs = self.subscribers_for(env.topic_hash)
            if not subs:
                continue
            accepted = all(s._accept(addr, env) for s in subs)
            if env.reliable and accepted:
                ack = WireEnvelope(
                    topic_hash=env.topic_hash,
                    seq=env.seq,
                    timestamp_ns=time.time_ns(),
                    payload=b"",
                    flags=FLAG_ACK,
                )
                try:
                    self._data_sock.sendto(encode_envelope(ack), addr)
                    self.counters.acks_sent += 1
                except OSError:
                    pass

    def _on_ack(self, env, addr):
        with self._pending_cond:
            self._pending.pop((env.topic_hash, env.seq, addr), None)
            self._pending_cond.notify_all()

    def _retransmit_loop(self):
        base = self.config.retry_base_delay
        while not self._closed.is_set():
            time.sleep(base / 2)
            now = time.monotonic()
            due = []
            with self._pending_cond:
                expired = []
                for key, p in self._pending.items():
                    if p.deadline > now:
                        continue
                    if p.attempts >= p.max_retries:
                        expired.append(key)
                        continue
                    p.attempts += 1
                    # Exponential backoff, capped: uncapped doubling strands a
                    # twice-unlucky message for minutes.
                    p.deadline = now + base * (2 ** min(p.attempts, 5))
                    due.append(p)
                for key in expired:
                    del self._pending[key]
                    self.counters.delivery_failures += 1
                if expired:
                    self._pending_cond.notify_all()
            for p in due:
                self.counters.retransmissions += 1
                self._send_data(p.frame, p.dest)

    # -- discovery ---------------------------------------------------------

    def _send_announcement(self):
        with self._lock:
            payload = self.info.encode()
            seq = self._announce_seq & 0xFFFFFFFF
            self._announce_seq += 1
        env = WireEnvelope(
            topic_hash=DISCOVERY_TOPIC_HASH,
            seq=seq,
            timestamp_ns=time.time_ns(),
            payload=payload,
        )
        try:
            self._disc_tx.sendto(
                encode_envelope(env), (self.config.multicast_group, self.config.discovery_port)
            )
        except OSError:
            pass

    def _discovery_tx_loop(self):
        interval = self.config.announce_interval
        self._send_announcement()
        while not self._closed.wait(interval):
            self._send_announcement()
            self._prune_remotes()

    def _prune_remotes(self):
        deadline = time.monotonic() - self.config.announce_interval * self.config.expiry_intervals
        with self._lock:
            stale = [pid for pid, r in self._remotes.items() if r["last_seen"] < deadline]
            for pid in stale:
                del self._remotes[pid]
            if stale:
                self._rebuild_matches_locked()

    def _discovery_rx_loop(self):
        while not self._closed.is_set():
            try:
                buf, addr = self._disc_rx.recvfrom(MAX_PAYLOAD + 64)
            except socket.timeout:
                continue
            except OSError:
                return
            try:
                env = decode_envelope(buf)
                if env.topic_hash != DISCOVERY_TOPIC_HASH:
                    continue
                info = ParticipantInfo.decode(env.payload)
            except (EnvelopeError, MessageError):
                self.counters.decode_errors += 1
                continue
            if info.participant_id == self.info.participant_id:
                continue
            if info.domain_id != self.info.domain_id:
                continue
            # Substitute the announcement's source IP for wildcard endpoints.
            eps = tuple(
                ep if ep.address[0] != "0.0.0.0" else replace(ep, address=(addr[0], ep.address[1]))
                for ep in info.endpoints
            )
            info = replace(info, endpoints=eps)
            with self._lock:
                known = info.participant_id in self._remotes
                self._remotes[info.participant_id] = {
                    "info": info,
                    "last_seen": time.monotonic(),
                }
                self._rebuild_matches_locked()
            if not known:
                # Poke back so the newcomer learns us without waiting a period.
                self._send_announcement()

    def _rebuild_matches_locked(self):
        subs = {}
        for r in self._remotes.values():
            for ep in r["info"].endpoints:
                if ep.direction == DIR_SUB:
                    subs.setdefault(ep.topic_hash, {})[ep.address] = r["info"].participant_id
        self._remote_subs = subs

    def matched_participants(self):
        with self._lock:
            return [r["info"] for r in self._remotes.values()]

    def remote_subscriber_count(self, topic_name, type_name) -> int:
        th = topic_hash(topic_name, type_name)
        with self._lock:
            return len(self._remote_subs.get(th, {}))

    # -- teardown ----------------------------------------------------------

    def close(self):
        if self._closed.is_set():
            return
        self._closed.set()
        with self._pending_cond:
            self._pending_cond.notify_all()
        self.registry.remove(self)
        with self._lock:
            subs = list(self._subscribers.values())
        for s in subs:
            s.close()
        for t in self._threads:
            t.join(timeout=2.0)
        for sock in (self._data_sock, self._disc_rx, self._disc_tx):
            if sock is not None:
                sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def create_participant(name, domain_id=None, config=None, registry=None) -> Participant:
    return Participant(name, domain_id=domain_id, config=config, registry=registry)
