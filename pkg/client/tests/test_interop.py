"""Live interop against the flight stack over real UDP sockets."""

import threading
import time

import pytest

from raptor.bus import BusConfig, QosPolicy, Registry, create_participant
from raptor.bus.core import Reliability
from raptor.messages import MissionCmdMsg, MissionVerb, PoseMsg, decode_msg

from offboard_client.session import ClientSession, SendTimeout

RELIABLE = QosPolicy(reliability=Reliability.RELIABLE, history_depth=64, max_retries=8)


def primary(name, domain):
    return create_participant(name, domain, BusConfig(announce_interval=0.2), Registry())


def wait_until(pred, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if pred():
            return True
        time.sleep(0.01)
    return pred()


class TestPoseStream:
    def test_pose_stream_at_100hz(self):
        """Ten seconds of 100 Hz poses arrive without decode errors."""
        with primary("drone", 140) as part, ClientSession("station", domain=140) as session:
            pub = part.advertise("pose/drone", "Pose")
            stream = session.listen("pose/drone", "Pose", duration=12.0)
            assert wait_until(lambda: part.remote_subscriber_count("pose/drone", "Pose") == 1)

            stop = threading.Event()

            def feed():
                t0 = time.monotonic()
                k = 0
                while not stop.is_set():
                    t = t0 + k * 0.01
                    pose = PoseMsg((0.1 * k, 0.0, 1.0), (1.0, 0.0, 0.0, 0.0))
                    pub.publish(pose.encode(), timestamp_ns=int(t * 1e9))
                    k += 1
                    delay = t + 0.01 - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)

            feeder = threading.Thread(target=feed, daemon=True)
            feeder.start()
            got = []
            t_start = time.monotonic()
            try:
                for stamp, pose in stream:
                    got.append(pose)
                    if time.monotonic() - t_start >= 10.0:
                        break
            finally:
                stop.set()
                feeder.join(timeout=2.0)

            assert session.decode_errors == 0
            assert len(got) >= 900, f"only {len(got)} samples in 10 s"
            assert got[-1].orientation == (1.0, 0.0, 0.0, 0.0)

    def test_corrupted_frame_counted_and_stream_continues(self):
        import socket

        with primary("drone", 141) as part, ClientSession("station", domain=141) as session:
            pub = part.advertise("pose/drone", "Pose")
            stream = session.listen("pose/drone", "Pose", duration=10.0, max_messages=3)
            assert wait_until(lambda: part.remote_subscriber_count("pose/drone", "Pose") == 1)

            pose = PoseMsg((0.0, 0.0, 1.0), (1.0, 0.0, 0.0, 0.0))
            pub.publish(pose.encode())
            first = next(stream)
            assert first[1] == session_pose_equivalent(pose)

            # Inject garbage straight at the client's data port.
            with socket.socket(socket.AF_INET, socket.SOCK_DGRAM) as sock:
                sock.sendto(b"RPTR\x01garbage-not-a-frame", ("127.0.0.1", session.data_port))
            pub.publish(pose.encode())
            second = next(stream)
            assert second[1] == session_pose_equivalent(pose)
            assert session.decode_errors == 1


def session_pose_equivalent(msg: PoseMsg):
    from offboard_client.codecs import Pose

    return Pose(position=msg.position, orientation=msg.orientation)


class TestMissionCommands:
    def test_command_round_trip_field_for_field(self):
        received = []
        with primary("mission", 142) as part, ClientSession("station", domain=142) as session:
            part.subscribe(
                "mission/cmd",
                "MissionCmd",
                qos=RELIABLE,
                handler=lambda p, i: received.append(decode_msg("MissionCmd", p)),
            )
            sent = session.send_mission("swoop", "bottle", timeout=5.0)
            assert wait_until(lambda: received)
            cmd = received[0]
            assert cmd == MissionCmdMsg(MissionVerb.EXECUTE_SWOOP, "bottle")
            assert int(cmd.verb) == 2 and sent.verb == "swoop"
            assert cmd.target_id == sent.target == "bottle"

    def test_unknown_target_rejected_by_primary(self):
        catalog = {"styrofoam", "box", "roll", "bottle"}
        with primary("mission", 143) as part, ClientSession("station", domain=143) as session:
            event_pub = part.advertise("mission/event", "MissionCmd")

            def on_cmd(payload, info):
                cmd = decode_msg("MissionCmd", payload)
                if cmd.target_id not in catalog:
                    event_pub.publish(MissionCmdMsg(MissionVerb.ABORT, cmd.target_id).encode())
                else:
                    event_pub.publish(payload)

            part.subscribe("mission/cmd", "MissionCmd", qos=RELIABLE, handler=on_cmd)

            # Register for events before sending so the reply is routable.
            events = session.listen("mission/event", "MissionCmd", duration=10.0, max_messages=1)
            assert wait_until(
                lambda: part.remote_subscriber_count("mission/event", "MissionCmd") == 1
            )
            session.send_mission("swoop", "anvil", timeout=5.0)
            _, event = next(events)
            assert event.verb == "abort" and event.target == "anvil"

    def test_timeout_without_primary(self):
        with ClientSession("station", domain=144) as session:
            t0 = time.monotonic()
            with pytest.raises(SendTimeout):
                session.send_mission("land", timeout=1.0)
            assert time.monotonic() - t0 < 3.0
