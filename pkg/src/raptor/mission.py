"""Grasp mission state machine, gripper model and the geometric contact proxy.

The contact model is purely geometric: the soft fingers are credited with
holding anything they touch (observed behavior: objects do not slip out
once contacted), so success reduces to straddling the object laterally at
closure and gaining enough altitude to clear the stand before leaving the
longitudinal contact window.  The two finger pairs sit fore/aft of the
gripper center along the flight direction.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .messages import GripperCmdMsg, GripperState, SetpointMsg
from .simsuite.params import VehicleParams
from .trajgen import SwoopParams, SwoopPlan, plan_swoop

CONTACT_WINDOW_MARGIN = 0.02  # m beyond half the object length


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    mass: float  # kg
    dims: tuple[float, float, float]  # l x w x h, meters
    lift_travel: float = 0.04  # vertical travel to clear the stand

    def __post_init__(self):
        if self.mass <= 0 or any(d <= 0 for d in self.dims) or self.lift_travel <= 0:
            raise ValueError("object properties must be positive")
        if self.mass > 0.4:
            raise ValueError("object mass exceeds the 0.4 kg payload limit")

    @property
    def length(self) -> float:
        return self.dims[0]

    @property
    def width(self) -> float:
        return self.dims[1]


# Measured object set: mass and l x w x h as tested, with the irregular
# styrofoam object needing the least lift to clear its stand.
DEFAULT_CATALOG = {
    "styrofoam": ObjectSpec("styrofoam", 0.027, (0.09, 0.14, 0.13), lift_travel=0.01),
    "box": ObjectSpec("box", 0.034, (0.03, 0.12, 0.12), lift_travel=0.04),
    "roll": ObjectSpec("roll", 0.086, (0.08, 0.08, 0.24), lift_travel=0.04),
    "bottle": ObjectSpec("bottle", 0.017, (0.06, 0.06, 0.19), lift_travel=0.04),
}


def load_catalog(path) -> dict[str, ObjectSpec]:
    with open(path) as f:
        raw = json.load(f)
    return {
        name: ObjectSpec(name=name, mass=o["mass"], dims=tuple(o["dims"]),
                         lift_travel=o.get("lift_travel", 0.04))
        for name, o in raw.items()
    }


def save_catalog(catalog, path) -> None:
    raw = {
        name: {"mass": o.mass, "dims": list(o.dims), "lift_travel": o.lift_travel}
        for name, o in catalog.items()
    }
    with open(path, "w") as f:
        json.dump(raw, f, indent=2)


@dataclass(frozen=True)
class GripperModel:
    width: float = 0.06
    pair_offset: float = 0.0125  # fore/aft offset of each finger pair from center
    actuation_time: float = 0.2
    trigger_radius: float = 0.35
    fingers_per_pair: int = 2
    pairs: int = 2
    open_angle: int = 12000  # centidegrees
    closed_angle: int = 3000

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("gripper width must be positive")
        if self.pair_offset >= self.width / 2:
            raise ValueError("pair_offset must be < width/2")


@dataclass(frozen=True)
class GraspOutcome:
    pairs_in_contact: int
    success: bool
    lateral_offset_at_grasp: float
    speed_at_grasp: float
    lifted: bool

    def __post_init__(self):
        if self.success and not (self.pairs_in_contact >= 1 and self.lifted):
            raise ValueError("success requires contact and lift")


class MissionPhase(enum.Enum):
    IDLE = "Idle"
    TAKEOFF = "Takeoff"
    APPROACH = "Approach"
    SWOOP = "Swoop"
    GRASP_TRIGGERED = "GraspTriggered"
    LIFT = "Lift"
    EXIT = "Exit"
    LAND = "Land"
    ABORTED = "Aborted"


_LEGAL = {
    MissionPhase.IDLE: {MissionPhase.TAKEOFF},
    MissionPhase.TAKEOFF: {MissionPhase.APPROACH},
    MissionPhase.APPROACH: {MissionPhase.SWOOP},
    MissionPhase.SWOOP: {MissionPhase.GRASP_TRIGGERED},
    MissionPhase.GRASP_TRIGGERED: {MissionPhase.LIFT},
    MissionPhase.LIFT: {MissionPhase.EXIT},
    MissionPhase.EXIT: {MissionPhase.LAND},
    MissionPhase.LAND: set(),
    MissionPhase.ABORTED: set(),
}


class IllegalTransition(RuntimeError):
    pass


class GraspMission:
    """Drives one swoop attempt; emits setpoint and gripper commands."""

    def __init__(
        self,
        object_position,
        swoop_params: SwoopParams | None = None,
        gripper: GripperModel | None = None,
        waypoint_tolerance: float = 0.05,
        approach_tolerance: float = 0.15,
        approach_speed_gate: float = 0.15,
        exit_hold: float = 1.0,
    ):
        self.object_position = np.asarray(object_position, dtype=float)
        self.swoop_params = swoop_params or SwoopParams()
        self.gripper = gripper or GripperModel()
        self.waypoint_tolerance = waypoint_tolerance
        # The approach gate is loose on purpose: reference corruption can park
        # the vehicle several cm off the waypoint, and the swoop is re-planned
        # from the settled state anyway.
        self.approach_tolerance = approach_tolerance
        self.approach_speed_gate = approach_speed_gate
        self.exit_hold = exit_hold
        self.phase = MissionPhase.IDLE
        self.plan: SwoopPlan | None = None
        self.swoop_start_t: float | None = None
        self.closed_emitted = False
        self.close_command_t: float | None = None
        self._exit_reached_t: float | None = None
        self._aborted_from: MissionPhase | None = None
        self._abort_hold = None

    # -- helpers -----------------------------------------------------------

    def _goto(self, phase):
        if phase is not MissionPhase.ABORTED and phase not in _LEGAL[self.phase]:
            raise IllegalTransition(f"{self.phase.value} -> {phase.value}")
        self.phase = phase

    def _open_cmd(self):
        g = self.gripper
        return GripperCmdMsg(GripperState.OPEN, g.open_angle, g.open_angle)

    def _closed_cmd(self):
        g = self.gripper
        return GripperCmdMsg(GripperState.CLOSED, g.closed_angle, g.closed_angle)

    def start(self):
        self._goto(MissionPhase.TAKEOFF)

    def abort(self, est_state=None):
        self._aborted_from = self.phase
        self.phase = MissionPhase.ABORTED
        if est_state is not None:
            p = est_state.position
            self._abort_hold = (float(p[0]), float(p[1]), float(p[2]) + 1.0)

    def _hold(self, point):
        return SetpointMsg(position=tuple(point), velocity=(0, 0, 0), acceleration=(0, 0, 0))

    # -- stepping ----------------------------------------------------------

    def advance(self, est_state, t: float):
        """Returns (phase, setpoint or None, list of GripperCmdMsg)."""
        cmds = []
        if est_state is None:
            if self.phase not in (MissionPhase.IDLE, MissionPhase.ABORTED):
                self.abort(None)  # estimator fault
            return self.phase, None, cmds

        pos = np.asarray(est_state.position, dtype=float)
        params = self.swoop_params

        if self.phase is MissionPhase.IDLE:
            return self.phase, None, cmds

        if self.phase is MissionPhase.ABORTED:
            cmds.append(self._open_cmd())
            hold = self._abort_hold or (pos[0], pos[1], pos[2] + 1.0)
            self._abort_hold = hold
            return self.phase, self._hold(hold), cmds

        if self.phase is MissionPhase.TAKEOFF:
            if self.plan is None:
                # Plan once to learn the approach waypoint; re-planned at swoop
                # start from the settled state.
                self.plan = self._make_plan(est_state)
                cmds.append(self._open_cmd())
            target = self.plan.approach_point
            tp = (pos[0], pos[1], target[2])
            if abs(pos[2] - target[2]) < self.waypoint_tolerance:
                self._goto(MissionPhase.APPROACH)
            return self.phase, self._hold(tp), cmds

        if self.phase is MissionPhase.APPROACH:
            target = np.asarray(self.plan.approach_point)
            speed = float(np.linalg.norm(est_state.velocity))
            if np.linalg.norm(pos - target) < self.approach_tolerance and speed < self.approach_speed_gate:
                self.plan = self._make_plan(est_state)
                self.swoop_start_t = t
                self._goto(MissionPhase.SWOOP)
            return self.phase, self._hold(target), cmds

        # Swoop family: stream the plan.
        tau = t - self.swoop_start_t
        p, v, a = self.plan.sample(tau)
        sp = SetpointMsg(position=p, velocity=v, acceleration=a)

        if self.phase is MissionPhase.SWOOP:
            horiz = np.linalg.norm((pos - self.object_position)[:2])
            # Predictive trigger: close so that actuation completes as the
            # gripper passes over the object.  Along-track position/velocity
            # come from the estimator; the deceleration feedforward comes from
            # the plan (a fixed time lead would miss under tracking lag).
            u = np.asarray(self.plan.approach_axis, dtype=float)
            along = float((pos - self.object_position) @ u)
            v_along = float(np.asarray(est_state.velocity, dtype=float) @ u)
            a_along = float(np.asarray(a) @ u)
            tact = self.gripper.actuation_time
            predicted = along + v_along * tact + 0.5 * a_along * tact * tact
            if horiz <= self.gripper.trigger_radius and predicted >= 0.0:
                if not self.closed_emitted:
                    cmds.append(self._closed_cmd())
                    self.closed_emitted = True
                    self.close_command_t = t
                self._goto(MissionPhase.GRASP_TRIGGERED)
        elif self.phase is MissionPhase.GRASP_TRIGGERED:
            if tau >= self.plan.grasp_time:
                self._goto(MissionPhase.LIFT)
        elif self.phase is MissionPhase.LIFT:
            lift_end = self.plan.grasp_time + self.plan.segments[1][0].T
            if tau >= lift_end:
                self._goto(MissionPhase.EXIT)
        elif self.phase is MissionPhase.EXIT:
            if tau >= self.plan.duration:
                sp = self._hold(self.plan.exit_point)
                if self._exit_reached_t is None:
                    self._exit_reached_t = t
                elif t - self._exit_reached_t >= self.exit_hold:
                    self._goto(MissionPhase.LAND)
        elif self.phase is MissionPhase.LAND:
            ep = self.plan.exit_point
            sp = self._hold((ep[0], ep[1], max(ep[2] - 0.5, 0.0)))
        return self.phase, sp, cmds

    def _make_plan(self, est_state):
        from .trajgen import AxisState

        drone = tuple(
            AxisState(float(est_state.position[i]), float(est_state.velocity[i]), 0.0)
            for i in range(3)
        )
        return plan_swoop(drone, self.object_position, self.swoop_params)


# Grasp evaluation ----------------------------------------------------------


class LogWindowIncomplete(ValueError):
    pass


@dataclass(frozen=True)
class TrajectoryLog:
    """Column-major trajectory log: timestamps plus (n, 3) position and
    velocity arrays.  Interchangeable with the simulator's list-of-dicts
    logs wherever `log_arrays` is used."""

    ts: np.ndarray
    pos: np.ndarray
    vel: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.ts)

    def records(self) -> list[dict]:
        vel = self.vel
        return [
            {
                "t": float(self.ts[i]),
                "pos": [float(x) for x in self.pos[i]],
                "vel": [float(x) for x in vel[i]] if vel is not None else None,
            }
            for i in range(len(self.ts))
        ]


def log_arrays(log):
    """Normalize a trajectory log to (ts, pos, vel) numpy arrays.

    Accepts a TrajectoryLog or a list of {"t", "pos", "vel"} dicts; vel is
    None when any record lacks a velocity."""
    if isinstance(log, TrajectoryLog):
        return np.asarray(log.ts, float), np.asarray(log.pos, float), (
            None if log.vel is None else np.asarray(log.vel, float)
        )
    ts = np.array([r["t"] for r in log], dtype=float)
    pos = np.array([r["pos"] for r in log], dtype=float)
    if log and all(r.get("vel") is not None for r in log):
        vel = np.array([r["vel"] for r in log], dtype=float)
    else:
        vel = None
    return ts, pos, vel


def _interp_state(ts, pos, vel, t):
    i = int(np.clip(np.searchsorted(ts, t), 1, len(ts) - 1))
    dt = ts[i] - ts[i - 1]
    w = 0.0 if dt <= 0 else (t - ts[i - 1]) / dt
    p = (1 - w) * pos[i - 1] + w * pos[i]
    if vel is not None:
        v = (1 - w) * vel[i - 1] + w * vel[i]
    else:
        v = (pos[i] - pos[i - 1]) / dt if dt > 0 else np.zeros(3)
    return p, v


def evaluate_grasp(
    log,
    obj: ObjectSpec,
    gripper: GripperModel,
    closure_time: float,
    object_position,
    approach_axis=(1.0, 0.0, 0.0),
) -> GraspOutcome:
    """Decide one attempt from its trajectory log.

    `closure_time` is when gripper closure completes.  The log must cover
    [closure_time - 0.5 s, closure_time + 1.0 s].
    """
    ts, pos, vel = log_arrays(log)
    if ts.size == 0:
        raise LogWindowIncomplete("empty log")
    t0, t1 = float(ts[0]), float(ts[-1])
    if t0 > closure_time - 0.5 + 1e-9 or t1 < closure_time + 1.0 - 1e-9:
        raise LogWindowIncomplete(
            f"log [{t0}, {t1}] does not cover closure window around {closure_time}"
        )

    obj_pos = np.asarray(object_position, dtype=float)
    u = np.asarray(approach_axis, dtype=float)
    u = u / np.linalg.norm(u)
    u_perp = np.array([-u[1], u[0], 0.0])

    pos_c, vel_c = _interp_state(ts, pos, vel, closure_time)
    rel = pos_c - obj_pos
    along = float(rel @ u)
    lateral = float(rel @ u_perp)
    speed = float(np.linalg.norm(vel_c))

    half_w = obj.width / 2.0
    half_l = obj.length / 2.0
    straddles = abs(lateral) <= half_w
    pairs = 0
    if straddles:
        for off in (-gripper.pair_offset, gripper.pair_offset):
            if abs(along + off) <= half_l:
                pairs += 1

    lifted = False
    if pairs >= 1:
        z_closure = pos_c[2]
        window = half_l + CONTACT_WINDOW_MARGIN
        i0 = int(np.searchsorted(ts, closure_time, side="left"))
        along_post = (pos[i0:] - obj_pos) @ u
        exceed = np.nonzero(along_post > window)[0]
        stop = int(exceed[0]) if exceed.size else len(along_post)
        lifted = bool(np.any(pos[i0 : i0 + stop, 2] - z_closure >= obj.lift_travel))

    return GraspOutcome(
        pairs_in_contact=pairs,
        success=pairs >= 1 and lifted,
        lateral_offset_at_grasp=lateral,
        speed_at_grasp=speed,
        lifted=lifted,
    )


def attach_payload(vehicle: VehicleParams, obj: ObjectSpec) -> VehicleParams:
    """Add a grasped object's mass to the vehicle (payload limit enforced)."""
    return vehicle.with_payload(obj.mass)
