"""Mission state machine, gripper commands, and the geometric grasp proxy."""

import numpy as np
import pytest

from raptor.messages import GripperState
from raptor.mission import (
    DEFAULT_CATALOG,
    GraspMission,
    GraspOutcome,
    GripperModel,
    IllegalTransition,
    LogWindowIncomplete,
    MissionPhase,
    ObjectSpec,
    TrajectoryLog,
    attach_payload,
    evaluate_grasp,
    load_catalog,
    log_arrays,
    save_catalog,
)
from raptor.simsuite import RigidBodyState
from raptor.simsuite.params import VehicleParams
from raptor.trajgen import SwoopParams

OBJ_POS = np.array([0.0, 0.0, 0.30])


def fake_state(pos, vel=(0, 0, 0)):
    s = RigidBodyState()
    s.position = np.asarray(pos, dtype=float)
    s.velocity = np.asarray(vel, dtype=float)
    return s


def run_scripted_mission(mission, dt=0.01, t_max=20.0):
    """Drive the mission by teleporting the vehicle onto each setpoint."""
    state = fake_state((-3.0, 0.0, 0.2))
    t = 0.0
    phases = [mission.phase]
    closes = []
    prev_pos = np.array(state.position)
    while t < t_max:
        phase, sp, cmds = mission.advance(state, t)
        closes += [c for c in cmds if c.state is GripperState.CLOSED]
        if phases[-1] is not phase:
            phases.append(phase)
        if phase in (MissionPhase.LAND, MissionPhase.ABORTED) and t > 1.0:
            break
        if sp is not None:
            newp = np.asarray(sp.position, dtype=float)
            state = fake_state(newp, (newp - prev_pos) / dt)
            prev_pos = newp
        t += dt
    return phases, closes


class TestPhaseMachine:
    def test_full_mission_phase_sequence(self):
        mission = GraspMission(OBJ_POS)
        mission.start()
        phases, closes = run_scripted_mission(mission, t_max=40.0)
        assert phases == [
            MissionPhase.TAKEOFF,
            MissionPhase.APPROACH,
            MissionPhase.SWOOP,
            MissionPhase.GRASP_TRIGGERED,
            MissionPhase.LIFT,
            MissionPhase.EXIT,
            MissionPhase.LAND,
        ]
        assert len(closes) == 1, "exactly one close command per attempt"
        assert mission.close_command_t is not None

    def test_idle_until_started(self):
        mission = GraspMission(OBJ_POS)
        phase, sp, cmds = mission.advance(fake_state((0, 0, 0)), 0.0)
        assert phase is MissionPhase.IDLE and sp is None and cmds == []

    def test_illegal_transition_raises(self):
        mission = GraspMission(OBJ_POS)
        with pytest.raises(IllegalTransition):
            mission._goto(MissionPhase.SWOOP)

    def test_abort_allowed_from_any_phase(self):
        mission = GraspMission(OBJ_POS)
        mission.start()
        mission.abort(fake_state((1.0, 2.0, 0.5)))
        assert mission.phase is MissionPhase.ABORTED
        phase, sp, cmds = mission.advance(fake_state((1.0, 2.0, 0.5)), 0.0)
        # aborted missions hold 1 m above the abort point with the gripper open
        assert sp.position == (1.0, 2.0, 1.5)
        assert cmds and cmds[0].state is GripperState.OPEN
        assert phase is MissionPhase.ABORTED

    def test_estimator_dropout_aborts(self):
        mission = GraspMission(OBJ_POS)
        mission.start()
        phase, sp, _ = mission.advance(None, 0.0)
        assert phase is MissionPhase.ABORTED

    def test_estimator_dropout_while_idle_is_benign(self):
        mission = GraspMission(OBJ_POS)
        phase, _, _ = mission.advance(None, 0.0)
        assert phase is MissionPhase.IDLE

    def test_aborted_is_terminal(self):
        mission = GraspMission(OBJ_POS)
        mission.start()
        mission.abort()
        with pytest.raises(IllegalTransition):
            mission._goto(MissionPhase.TAKEOFF)

    def test_gripper_opens_at_takeoff(self):
        mission = GraspMission(OBJ_POS)
        mission.start()
        _, _, cmds = mission.advance(fake_state((-3, 0, 0.2)), 0.0)
        assert cmds and cmds[0].state is GripperState.OPEN
        assert cmds[0].angle_left == GripperModel().open_angle


class TestGripperModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            GripperModel(width=0.0)
        with pytest.raises(ValueError):
            GripperModel(width=0.02, pair_offset=0.011)

    def test_defaults(self):
        g = GripperModel()
        assert g.pairs == 2 and g.fingers_per_pair == 2
        assert g.actuation_time == pytest.approx(0.2)


class TestObjectCatalog:
    def test_catalog_contents(self):
        assert set(DEFAULT_CATALOG) == {"styrofoam", "box", "roll", "bottle"}
        widths = [DEFAULT_CATALOG[n].width for n in ("styrofoam", "box", "roll", "bottle")]
        assert widths == sorted(widths, reverse=True), "strictly narrowing object set"

    def test_mass_limit(self):
        with pytest.raises(ValueError):
            ObjectSpec("brick", 0.5, (0.1, 0.1, 0.1))

    def test_positive_properties(self):
        with pytest.raises(ValueError):
            ObjectSpec("ghost", 0.0, (0.1, 0.1, 0.1))
        with pytest.raises(ValueError):
            ObjectSpec("flat", 0.1, (0.1, 0.0, 0.1))

    def test_json_roundtrip(self, tmp_path):
        path = tmp_path / "objects.json"
        save_catalog(DEFAULT_CATALOG, path)
        assert load_catalog(path) == DEFAULT_CATALOG

    def test_attach_payload(self):
        v = attach_payload(VehicleParams(), DEFAULT_CATALOG["roll"])
        assert v.total_mass == pytest.approx(1.586)

    def test_attach_payload_respects_limit(self):
        heavy = VehicleParams().with_payload(0.39)
        with pytest.raises(Exception):
            attach_payload(heavy, DEFAULT_CATALOG["roll"])


def synthetic_log(lateral=0.0, along_at_closure=0.0, climb=True, speed=1.0):
    """Straight-line pass over the object at constant speed, then a climb."""
    ts = np.arange(0.0, 4.0, 0.01)
    t_closure = 2.0
    x = OBJ_POS[0] + along_at_closure + speed * (ts - t_closure)
    y = np.full_like(ts, OBJ_POS[1] + lateral)
    z = np.full_like(ts, OBJ_POS[2])
    if climb:
        z = z + np.clip(ts - t_closure, 0.0, None) * 1.5
    pos = np.stack([x, y, z], axis=1)
    vel = np.stack([np.full_like(ts, speed), np.zeros_like(ts), np.zeros_like(ts)], axis=1)
    return TrajectoryLog(ts, pos, vel), t_closure


class TestEvaluateGrasp:
    def test_centered_pass_grabs_with_both_pairs(self):
        log, tc = synthetic_log()
        out = evaluate_grasp(log, DEFAULT_CATALOG["styrofoam"], GripperModel(), tc, OBJ_POS)
        assert out.success and out.pairs_in_contact == 2 and out.lifted
        assert out.speed_at_grasp == pytest.approx(1.0)
        assert out.lateral_offset_at_grasp == pytest.approx(0.0, abs=1e-9)

    def test_lateral_miss_beyond_half_width(self):
        obj = DEFAULT_CATALOG["bottle"]  # w = 0.06
        log, tc = synthetic_log(lateral=0.031)
        out = evaluate_grasp(log, obj, GripperModel(), tc, OBJ_POS)
        assert not out.success and out.pairs_in_contact == 0

    def test_lateral_graze_inside_half_width(self):
        obj = DEFAULT_CATALOG["bottle"]
        log, tc = synthetic_log(lateral=0.029)
        out = evaluate_grasp(log, obj, GripperModel(), tc, OBJ_POS)
        assert out.success

    def test_late_closure_on_short_object_leaves_one_pair(self):
        # box length 0.03 (half 0.015), pair offset 0.0125: at along=+0.02/-0.02
        # only the trailing pair is inside the length window.
        obj = DEFAULT_CATALOG["box"]
        for sign in (1.0, -1.0):
            log, tc = synthetic_log(along_at_closure=sign * 0.02)
            out = evaluate_grasp(log, obj, GripperModel(), tc, OBJ_POS)
            assert out.pairs_in_contact == 1, f"along={sign * 0.02}"

    def test_far_closure_misses_entirely(self):
        obj = DEFAULT_CATALOG["box"]
        log, tc = synthetic_log(along_at_closure=0.05)
        out = evaluate_grasp(log, obj, GripperModel(), tc, OBJ_POS)
        assert out.pairs_in_contact == 0 and not out.success

    def test_flat_pass_contacts_but_never_lifts(self):
        log, tc = synthetic_log(climb=False)
        out = evaluate_grasp(log, DEFAULT_CATALOG["roll"], GripperModel(), tc, OBJ_POS)
        assert out.pairs_in_contact >= 1 and not out.lifted and not out.success

    def test_slow_climb_misses_lift_window(self):
        # Climbing 1 mm/s while flying through: leaves the contact window
        # long before gaining the 4 cm lift travel.
        log, tc = synthetic_log(climb=False)
        pos = log.pos.copy()
        pos[:, 2] += np.clip(log.ts - tc, 0.0, None) * 0.001
        out = evaluate_grasp(
            TrajectoryLog(log.ts, pos, log.vel), DEFAULT_CATALOG["roll"], GripperModel(), tc, OBJ_POS
        )
        assert out.pairs_in_contact >= 1 and not out.lifted

    def test_success_rate_monotone_in_width(self):
        # Same lateral offset grazes wide objects and misses narrow ones.
        results = {}
        for name in ("styrofoam", "box", "roll", "bottle"):
            log, tc = synthetic_log(lateral=0.05)
            out = evaluate_grasp(log, DEFAULT_CATALOG[name], GripperModel(), tc, OBJ_POS)
            results[name] = out.pairs_in_contact >= 1
        assert results["styrofoam"] and results["box"]
        assert not results["roll"] and not results["bottle"]

    def test_incomplete_window_raises(self):
        log, tc = synthetic_log()
        short = TrajectoryLog(log.ts[:150], log.pos[:150], log.vel[:150])
        with pytest.raises(LogWindowIncomplete):
            evaluate_grasp(short, DEFAULT_CATALOG["box"], GripperModel(), tc, OBJ_POS)
        with pytest.raises(LogWindowIncomplete):
            evaluate_grasp(TrajectoryLog(np.array([]), np.empty((0, 3))),
                           DEFAULT_CATALOG["box"], GripperModel(), tc, OBJ_POS)

    def test_velocity_fallback_from_positions(self):
        log, tc = synthetic_log(speed=0.7)
        no_vel = TrajectoryLog(log.ts, log.pos)
        out = evaluate_grasp(no_vel, DEFAULT_CATALOG["styrofoam"], GripperModel(), tc, OBJ_POS)
        assert out.speed_at_grasp == pytest.approx(0.7, rel=1e-6)

    def test_rotated_approach_axis(self):
        # Same geometry rotated 90 degrees: fly along +y, offset in x.
        log, tc = synthetic_log(lateral=0.05)
        pos = log.pos.copy()
        rot = np.stack([-(pos[:, 1] - OBJ_POS[1]), pos[:, 0] - OBJ_POS[0]], axis=1) + OBJ_POS[:2]
        pos[:, :2] = rot
        vel = np.stack([-log.vel[:, 1], log.vel[:, 0], log.vel[:, 2]], axis=1)
        out = evaluate_grasp(
            TrajectoryLog(log.ts, pos, vel),
            DEFAULT_CATALOG["styrofoam"],
            GripperModel(),
            tc,
            OBJ_POS,
            approach_axis=(0.0, 1.0, 0.0),
        )
        assert out.pairs_in_contact == 2
        assert abs(out.lateral_offset_at_grasp) == pytest.approx(0.05, abs=1e-9)

    def test_outcome_invariant(self):
        with pytest.raises(ValueError):
            GraspOutcome(pairs_in_contact=0, success=True, lateral_offset_at_grasp=0.0,
                         speed_at_grasp=1.0, lifted=True)
        with pytest.raises(ValueError):
            GraspOutcome(pairs_in_contact=2, success=True, lateral_offset_at_grasp=0.0,
                         speed_at_grasp=1.0, lifted=False)


class TestTrajectoryLog:
    def test_records_roundtrip_through_log_arrays(self):
        log, _ = synthetic_log()
        ts, pos, vel = log_arrays(log.records())
        assert np.allclose(ts, log.ts) and np.allclose(pos, log.pos)
        assert np.allclose(vel, log.vel)

    def test_dict_log_without_velocity(self):
        recs = [{"t": 0.0, "pos": [0, 0, 0], "vel": None}, {"t": 0.1, "pos": [1, 0, 0]}]
        ts, pos, vel = log_arrays(recs)
        assert vel is None and len(ts) == 2

    def test_len(self):
        log, _ = synthetic_log()
        assert len(log) == len(log.ts)


class TestPredictiveTrigger:
    def test_trigger_leads_the_object_by_actuation_time(self):
        # Approaching at the planned grasp speed the close command must come
        # before the gripper center reaches the object.
        mission = GraspMission(OBJ_POS, swoop_params=SwoopParams())
        mission.start()
        run_scripted_mission(mission)
        assert mission.closed_emitted
        tau_close = mission.close_command_t - mission.swoop_start_t
        assert tau_close < mission.plan.grasp_time
        assert mission.plan.grasp_time - tau_close < 0.5

    def test_no_trigger_outside_radius(self):
        mission = GraspMission(OBJ_POS)
        mission.start()
        mission.plan = mission._make_plan(fake_state((-2.0, 0, 0.3)))
        mission.phase = MissionPhase.SWOOP
        mission.swoop_start_t = 0.0
        # ahead of the object but outside the trigger radius
        _, _, cmds = mission.advance(fake_state((-1.0, 0, 0.3), (1, 0, 0)), 0.1)
        assert not any(c.state is GripperState.CLOSED for c in cmds)
        assert mission.phase is MissionPhase.SWOOP
