"""Secondary-component acceptance: interop with the flight stack."""

import subprocess
import sys
import threading
import time

from conftest import record_acceptance
from raptor.bus import BusConfig, QosPolicy, Registry, create_participant
from raptor.bus.core import Reliability
from raptor.messages import MissionCmdMsg, MissionVerb, PoseMsg, decode_msg

from offboard_client.codecs import decode_payload, load_corpus
from offboard_client.plots import plot_campaign
from offboard_client.session import ClientSession
from offboard_client.wire import parse_frame

RELIABLE = QosPolicy(reliability=Reliability.RELIABLE, history_depth=64, max_retries=8)


def _wait(pred, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if pred():
            return True
        time.sleep(0.01)
    return pred()


class TestSecondaryInterop:
    def test_client_interop(self, golden_corpus_path, tmp_path):
        checks = {}

        # Golden corpus decodes and re-encodes byte-exactly.
        entries = load_corpus(golden_corpus_path)
        checks["corpus_byte_exact"] = all(
            decode_payload(t, parse_frame(raw).payload).to_bytes() == parse_frame(raw).payload
            for t, raw in entries
        ) and len(entries) >= 10

        # 10 s live 100 Hz pose stream with zero decode errors.
        with create_participant(
            "acc-drone", 150, BusConfig(announce_interval=0.2), Registry()
        ) as part, ClientSession("acc-station", domain=150) as session:
            pub = part.advertise("pose/drone", "Pose")
            stream = session.listen("pose/drone", "Pose", duration=12.0)
            _wait(lambda: part.remote_subscriber_count("pose/drone", "Pose") == 1)
            stop = threading.Event()

            def feed():
                t0 = time.monotonic()
                k = 0
                while not stop.is_set():
                    pub.publish(PoseMsg((0.01 * k, 0.0, 1.0), (1.0, 0, 0, 0)).encode())
                    k += 1
                    delay = t0 + k * 0.01 - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)

            feeder = threading.Thread(target=feed, daemon=True)
            feeder.start()
            samples = 0
            t_start = time.monotonic()
            for _ in stream:
                samples += 1
                if time.monotonic() - t_start >= 10.0:
                    break
            stop.set()
            feeder.join(timeout=2.0)
            checks["live_100hz_10s"] = samples >= 900 and session.decode_errors == 0
            live_detail = f"{samples} poses, {session.decode_errors} decode errors"

        # Mission command round-trip, field for field.
        received = []
        with create_participant(
            "acc-mission", 151, BusConfig(announce_interval=0.2), Registry()
        ) as part, ClientSession("acc-cmd", domain=151) as session:
            part.subscribe(
                "mission/cmd",
                "MissionCmd",
                qos=RELIABLE,
                handler=lambda p, i: received.append(decode_msg("MissionCmd", p)),
            )
            session.send_mission("swoop", "bottle", timeout=5.0)
            _wait(lambda: received)
            checks["mission_roundtrip"] = received == [
                MissionCmdMsg(MissionVerb.EXECUTE_SWOOP, "bottle")
            ]

        # Campaign plots for a 36-trial run.
        campaign = tmp_path / "campaign"
        subprocess.run(
            [
                sys.executable, "-m", "raptor.lab.cli", "campaign",
                "--objects", "styrofoam", "--attempts", "36", "--mode", "fast",
                "--keep-logs", "--out", str(campaign),
            ],
            check=True,
            capture_output=True,
        )
        result = plot_campaign(campaign, tmp_path / "figs")
        checks["campaign_plots"] = result.trials == 36 and len(result.paths) == 3

        ok = all(checks.values())
        detail = "; ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items())
        record_acceptance("secondary_interop", ok, f"{detail}; {live_detail}")
        assert ok, detail
