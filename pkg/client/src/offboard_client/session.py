"""Ground-station bus session: discovery, telemetry listening, commands.

Single-context design: one poll loop services the discovery and data
sockets; there are no background threads.  The session announces itself
on the discovery multicast group so flight-stack participants learn its
data endpoint and start sending matched topics.
"""

from __future__ import annotations

import random
import select
import socket
import struct
import time

from .codecs import MissionCmd, ParticipantRecord, decode_payload
from .wire import (
    DISCOVERY_TOPIC,
    FLAG_RELIABLE,
    Frame,
    WireError,
    ack_for,
    build_frame,
    parse_frame,
    topic_id,
)

MULTICAST_GROUP = "239.82.80.84"
DISCOVERY_PORT = 7400
ANNOUNCE_INTERVAL = 0.5
DIR_PUB = 0
DIR_SUB = 1


class SessionError(RuntimeError):
    pass


class SendTimeout(SessionError):
    pass


class ClientSession:
    def __init__(self, name: str = "offboard", domain: int = 0):
        if not 0 <= domain <= 232:
            raise SessionError(f"domain {domain} outside [0, 232]")
        self.name = name
        self.domain = domain
        self.session_id = random.getrandbits(64)
        self.decode_errors = 0
        self.participants: dict[int, ParticipantRecord] = {}
        self._subscriptions: dict[int, tuple[str, str]] = {}
        self._last_seq: dict[tuple, int] = {}
        self._announce_seq = 0
        self._next_announce = 0.0
        self._send_seq = 0
        # Data frames read while waiting for acks, kept for listeners.
        self._backlog: list[tuple[bytes, tuple]] = []

        try:
            self._data = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self._data.bind(("", 0))
            self._data.setblocking(False)

            self._disc = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self._disc.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            if hasattr(socket, "SO_REUSEPORT"):
                self._disc.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEPORT, 1)
            self._disc.bind(("", DISCOVERY_PORT))
            member = struct.pack(
                "4s4s", socket.inet_aton(MULTICAST_GROUP), socket.inet_aton("0.0.0.0")
            )
            self._disc.setsockopt(socket.IPPROTO_IP, socket.IP_ADD_MEMBERSHIP, member)
            self._disc.setblocking(False)

            self._disc_out = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self._disc_out.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_TTL, 1)
            self._disc_out.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_LOOP, 1)
        except OSError as exc:
            raise SessionError(f"socket setup failed: {exc}") from exc

    # -- lifecycle ----------------------------------------------------------

    @property
    def data_port(self) -> int:
        return self._data.getsockname()[1]

    def close(self):
        for sock in (self._data, self._disc, self._disc_out):
            sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- discovery ----------------------------------------------------------

    def _announce(self):
        endpoints = tuple(
            (tid, DIR_SUB, "0.0.0.0", self.data_port) for tid in self._subscriptions
        )
        record = ParticipantRecord(
            participant_id=self.session_id,
            name=self.name,
            domain=self.domain,
            endpoints=endpoints,
        )
        frame = build_frame(
            Frame(
                topic=DISCOVERY_TOPIC,
                seq=self._announce_seq & 0xFFFFFFFF,
                stamp_ns=time.time_ns(),
                payload=record.to_bytes(),
            )
        )
        self._announce_seq += 1
        try:
            self._disc_out.sendto(frame, (MULTICAST_GROUP, DISCOVERY_PORT))
        except OSError:
            pass
        self._next_announce = time.monotonic() + ANNOUNCE_INTERVAL

    def _drain_discovery(self):
        while True:
            try:
                raw, addr = self._disc.recvfrom(70000)
            except BlockingIOError:
                return
            except OSError:
                return
            try:
                frame = parse_frame(raw)
                if frame.topic != DISCOVERY_TOPIC:
                    continue
                record = ParticipantRecord.from_bytes(frame.payload)
            except (WireError, ValueError):
                self.decode_errors += 1
                continue
            if record.participant_id == self.session_id or record.domain != self.domain:
                continue
            endpoints = tuple(
                (tid, d, addr[0] if ip == "0.0.0.0" else ip, port)
                for tid, d, ip, port in record.endpoints
            )
            self.participants[record.participant_id] = ParticipantRecord(
                participant_id=record.participant_id,
                name=record.name,
                domain=record.domain,
                endpoints=endpoints,
            )

    def _service(self, timeout: float = 0.05):
        """One scheduling slice: announce if due, then drain both sockets."""
        if time.monotonic() >= self._next_announce:
            self._announce()
        readable, _, _ = select.select([self._data, self._disc], [], [], timeout)
        if self._disc in readable:
            self._drain_discovery()
        return self._data in readable

    def subscriber_endpoints(self, topic: str, type_name: str) -> list[tuple[str, int]]:
        """Remote data addresses subscribed to the given topic."""
        tid = topic_id(topic, type_name)
        out = []
        for record in self.participants.values():
            for t, direction, ip, port in record.endpoints:
                if t == tid and direction == DIR_SUB:
                    out.append((ip, port))
        return out

    # -- telemetry ----------------------------------------------------------

    def listen(self, topic: str, type_name: str = "Pose", duration=None, max_messages=None):
        """Return an iterator of (timestamp_ns, message) for a topic.

        The subscription is registered and announced immediately (before the
        iterator is first advanced) so peers can start routing; malformed
        frames are counted in `decode_errors` and the stream continues."""
        tid = topic_id(topic, type_name)
        self._subscriptions[tid] = (topic, type_name)
        self._announce()
        return self._listen_iter(tid, type_name, duration, max_messages)

    def _decode_data(self, raw, addr, tid, type_name):
        """Decode one datagram for a subscription; None if not deliverable."""
        try:
            frame = parse_frame(raw)
        except WireError:
            self.decode_errors += 1
            return None
        if frame.is_ack or frame.topic != tid:
            return None
        if frame.reliable:
            try:
                self._data.sendto(ack_for(frame, time.time_ns()), addr)
            except OSError:
                pass
        key = (addr, frame.topic)
        if frame.seq <= self._last_seq.get(key, -1):
            return None  # stale or duplicate
        self._last_seq[key] = frame.seq
        try:
            message = decode_payload(type_name, frame.payload)
        except ValueError:
            self.decode_errors += 1
            return None
        return frame.stamp_ns, message

    def _listen_iter(self, tid, type_name, duration, max_messages):
        deadline = None if duration is None else time.monotonic() + duration
        delivered = 0
        while True:
            if deadline is not None and time.monotonic() >= deadline:
                return
            if max_messages is not None and delivered >= max_messages:
                return
            pending, self._backlog = self._backlog, []
            if not pending:
                if not self._service():
                    continue
                while True:
                    try:
                        pending.append(self._data.recvfrom(70000))
                    except (BlockingIOError, OSError):
                        break
            for raw, addr in pending:
                out = self._decode_data(raw, addr, tid, type_name)
                if out is None:
                    continue
                delivered += 1
                yield out
                if max_messages is not None and delivered >= max_messages:
                    return

    # -- commands -----------------------------------------------------------

    def send_mission(
        self,
        verb: str,
        target: str = "",
        timeout: float = 5.0,
        retry_interval: float = 0.05,
    ):
        """Publish a MissionCmd with reliable semantics: discover a mission
        subscriber, send, and retry until acknowledged.  Raises SendTimeout
        when no subscriber appears or no acknowledgment arrives in time."""
        command = MissionCmd(verb=verb, target=target)
        payload = command.to_bytes()
        tid = topic_id("mission/cmd", "MissionCmd")
        deadline = time.monotonic() + timeout

        dests = self.subscriber_endpoints("mission/cmd", "MissionCmd")
        while not dests:
            if time.monotonic() >= deadline:
                raise SendTimeout("no mission/cmd subscriber discovered")
            self._service()
            dests = self.subscriber_endpoints("mission/cmd", "MissionCmd")

        seq = self._send_seq
        self._send_seq += 1
        frame = build_frame(
            Frame(
                topic=tid,
                seq=seq,
                stamp_ns=time.time_ns(),
                payload=payload,
                flags=FLAG_RELIABLE,
            )
        )
        pending = set(dests)
        next_send = 0.0
        while pending:
            now = time.monotonic()
            if now >= deadline:
                raise SendTimeout(f"no acknowledgment from {sorted(pending)}")
            if now >= next_send:
                for dest in pending:
                    try:
                        self._data.sendto(frame, dest)
                    except OSError:
                        pass
                next_send = now + retry_interval
            if not self._service(timeout=retry_interval):
                continue
            while True:
                try:
                    raw, addr = self._data.recvfrom(70000)
                except (BlockingIOError, OSError):
                    break
                try:
                    reply = parse_frame(raw)
                except WireError:
                    self.decode_errors += 1
                    continue
                if reply.is_ack and reply.topic == tid and reply.seq == seq:
                    pending.discard(addr)
                elif not reply.is_ack:
                    # Not ours: keep it for any active subscription iterator.
                    self._backlog.append((raw, addr))
        return command
