"""Minimum-jerk trajectory generation and the swoop planner.

Each axis is solved in closed form: the jerk that minimizes the integral
of squared jerk subject to boundary conditions is quadratic in time,
j(t) = alpha*t^2/2 + beta*t + gamma, so a boundary-value problem reduces
to a tiny equality-constrained quadratic minimization over
(alpha, beta, gamma).  Partially specified end states simply drop
constraint rows.

The swoop planner composes three per-axis segments (approach -> grasp,
grasp -> lift, lift -> exit) that are C^2 continuous by construction:
every segment starts from the previous segment's evaluated end state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .messages import SetpointMsg


@dataclass(frozen=True)
class AxisState:
    p: float
    v: float
    a: float

    def as_tuple(self):
        return (self.p, self.v, self.a)


@dataclass(frozen=True)
class AxisGoal:
    """Target end state; None components are left free."""

    p: float | None = None
    v: float | None = None
    a: float | None = None

    def __post_init__(self):
        if self.p is None and self.v is None and self.a is None:
            raise ValueError("at least one goal component must be fixed")


@dataclass(frozen=True)
class JerkProfile:
    alpha: float
    beta: float
    gamma: float
    T: float
    start: AxisState

    def jerk(self, t: float) -> float:
        return self.alpha * t * t / 2.0 + self.beta * t + self.gamma

    def acceleration(self, t: float) -> float:
        return self.start.a + self.alpha * t**3 / 6.0 + self.beta * t * t / 2.0 + self.gamma * t

    def velocity(self, t: float) -> float:
        return (
            self.start.v
            + self.start.a * t
            + self.alpha * t**4 / 24.0
            + self.beta * t**3 / 6.0
            + self.gamma * t * t / 2.0
        )

    def position(self, t: float) -> float:
        return (
            self.start.p
            + self.start.v * t
            + self.start.a * t * t / 2.0
            + self.alpha * t**5 / 120.0
            + self.beta * t**4 / 24.0
            + self.gamma * t**3 / 6.0
        )


def _gram(T: float) -> np.ndarray:
    # integral of j^2 over [0, T] as a quadratic form in (alpha, beta, gamma)
    return np.array(
        [
            [T**5 / 20.0, T**4 / 8.0, T**3 / 6.0],
            [T**4 / 8.0, T**3 / 3.0, T**2 / 2.0],
            [T**3 / 6.0, T**2 / 2.0, T],
        ]
    )


_CONSTRAINT_ROWS = {
    "p": lambda T: [T**5 / 120.0, T**4 / 24.0, T**3 / 6.0],
    "v": lambda T: [T**4 / 24.0, T**3 / 6.0, T**2 / 2.0],
    "a": lambda T: [T**3 / 6.0, T**2 / 2.0, T],
}


def solve_axis(start: AxisState, goal: AxisGoal, T: float) -> JerkProfile:
    """Closed-form minimum-jerk boundary-value solve for one axis."""
    if T <= 0:
        raise ValueError("duration T must be positive")
    rows, rhs = [], []
    if goal.p is not None:
        rows.append(_CONSTRAINT_ROWS["p"](T))
        rhs.append(goal.p - start.p - start.v * T - start.a * T * T / 2.0)
    if goal.v is not None:
        rows.append(_CONSTRAINT_ROWS["v"](T))
        rhs.append(goal.v - start.v - start.a * T)
    if goal.a is not None:
        rows.append(_CONSTRAINT_ROWS["a"](T))
        rhs.append(goal.a - start.a)
    A = np.array(rows)
    b = np.array(rhs)
    m = len(rows)
    # KKT system: [2G A^T; A 0] [x; lam] = [0; b]
    kkt = np.zeros((3 + m, 3 + m))
    kkt[:3, :3] = 2.0 * _gram(T)
    kkt[:3, 3:] = A.T
    kkt[3:, :3] = A
    sol = np.linalg.solve(kkt, np.concatenate([np.zeros(3), b]))
    return JerkProfile(alpha=sol[0], beta=sol[1], gamma=sol[2], T=T, start=start)


def evaluate(profile: JerkProfile, t: float) -> tuple[AxisState, float]:
    if not 0.0 <= t <= profile.T:
        raise ValueError(f"t={t} outside [0, {profile.T}]")
    return (
        AxisState(profile.position(t), profile.velocity(t), profile.acceleration(t)),
        profile.jerk(t),
    )


def cost(profile: JerkProfile) -> float:
    """Exact integral of squared jerk over the profile duration."""
    x = np.array([profile.alpha, profile.beta, profile.gamma])
    return float(x @ _gram(profile.T) @ x)


@dataclass(frozen=True)
class FeasibilityReport:
    ok: bool
    axis_ok: tuple[bool, bool, bool]
    worst_quantity: str  # "v", "a" or "j"
    worst_axis: int
    worst_time: float
    worst_value: float
    worst_bound: float


def check_feasibility(
    profiles, v_max: float, a_max: float, j_max: float, sample_rate: float = 1000.0
) -> FeasibilityReport:
    """Bound check by dense sampling plus endpoints (no root extraction)."""
    if v_max <= 0 or a_max <= 0 or j_max <= 0:
        raise ValueError("bounds must be positive")
    worst = ("v", 0, 0.0, 0.0, v_max, 0.0)  # (qty, axis, t, value, bound, ratio)
    axis_ok = []
    for i, prof in enumerate(profiles):
        n = max(2, int(math.ceil(prof.T * sample_rate)) + 1)
        ts = np.linspace(0.0, prof.T, n)
        ok = True
        for qty, fn, bound in (
            ("v", prof.velocity, v_max),
            ("a", prof.acceleration, a_max),
            ("j", prof.jerk, j_max),
        ):
            vals = np.abs([fn(t) for t in ts])
            k = int(np.argmax(vals))
            ratio = vals[k] / bound
            if ratio > worst[5]:
                worst = (qty, i, float(ts[k]), float(vals[k]), bound, ratio)
            if vals[k] > bound:
                ok = False
        axis_ok.append(ok)
    return FeasibilityReport(
        ok=all(axis_ok),
        axis_ok=tuple(axis_ok),
        worst_quantity=worst[0],
        worst_axis=worst[1],
        worst_time=worst[2],
        worst_value=worst[3],
        worst_bound=worst[4],
    )


# Swoop planning ------------------------------------------------------------


@dataclass(frozen=True)
class SwoopParams:
    """Planner constants.

    The published experiments report outcome statistics, not the commanded
    timing, so segment durations, grasp speed and climb angle here are
    calibrated: the 4 m window averages ~1 m/s and the speed at the grasp
    sits just below 0.5 m/s with a strong upward component for the lift.
    """

    approach_standoff: float = 2.0
    exit_standoff: float = 2.3  # hover beyond the +2 m line so it is crossed at speed
    approach_height: float = 0.3  # approach waypoint altitude above the object
    grasp_speed: float = 0.45
    climb_angle_deg: float = 63.0
    segment_durations: tuple[float, float, float] = (2.5, 0.5, 1.8)
    lift_height: float = 0.12
    grasp_advance: float = 0.35  # along-track distance covered by the lift segment

    @classmethod
    def from_json(cls, path) -> "SwoopParams":
        with open(path) as f:
            d = json.load(f)
        if "segment_durations" in d:
            d["segment_durations"] = tuple(d["segment_durations"])
        return cls(**d)

    def to_json(self, path):
        d = {
            "approach_standoff": self.approach_standoff,
            "exit_standoff": self.exit_standoff,
            "approach_height": self.approach_height,
            "grasp_speed": self.grasp_speed,
            "climb_angle_deg": self.climb_angle_deg,
            "segment_durations": list(self.segment_durations),
            "lift_height": self.lift_height,
            "grasp_advance": self.grasp_advance,
        }
        with open(path, "w") as f:
            json.dump(d, f, indent=2)


@dataclass(frozen=True)
class SwoopPlan:
    segments: tuple[tuple[JerkProfile, JerkProfile, JerkProfile], ...]
    approach_point: tuple[float, float, float]
    grasp_point: tuple[float, float, float]
    exit_point: tuple[float, float, float]
    grasp_time: float
    approach_axis: tuple[float, float, float]

    @property
    def duration(self) -> float:
        return sum(seg[0].T for seg in self.segments)

    def sample(self, t: float):
        """Position, velocity, acceleration at plan time t (clamped)."""
        t = min(max(t, 0.0), self.duration)
        for seg in self.segments:
            if t <= seg[0].T or seg is self.segments[-1]:
                states = [evaluate(p, min(t, p.T))[0] for p in seg]
                return (
                    tuple(s.p for s in states),
                    tuple(s.v for s in states),
                    tuple(s.a for s in states),
                )
            t -= seg[0].T
        raise AssertionError("unreachable")

    def sample_array(self, ts):
        """Vectorized sample: (n,3) position, velocity, acceleration arrays."""
        ts = np.clip(np.asarray(ts, dtype=float), 0.0, self.duration)
        pos = np.empty((len(ts), 3))
        vel = np.empty((len(ts), 3))
        acc = np.empty((len(ts), 3))
        bounds = np.cumsum([seg[0].T for seg in self.segments])
        for k, seg in enumerate(self.segments):
            lo = 0.0 if k == 0 else bounds[k - 1]
            hi = bounds[k]
            mask = (ts >= lo) & (ts <= hi) if k == len(self.segments) - 1 else (ts >= lo) & (ts < hi)
            if not np.any(mask):
                continue
            tl = ts[mask] - lo
            for ax, prof in enumerate(seg):
                pos[mask, ax] = prof.position(tl)
                vel[mask, ax] = prof.velocity(tl)
                acc[mask, ax] = prof.acceleration(tl)
        return pos, vel, acc

    def to_json_dict(self) -> dict:
        return {
            "approach_point": list(self.approach_point),
            "grasp_point": list(self.grasp_point),
            "exit_point": list(self.exit_point),
            "grasp_time": self.grasp_time,
            "approach_axis": list(self.approach_axis),
            "segments": [
                [
                    {
                        "alpha": p.alpha,
                        "beta": p.beta,
                        "gamma": p.gamma,
                        "T": p.T,
                        "start": list(p.start.as_tuple()),
                    }
                    for p in seg
                ]
                for seg in self.segments
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SwoopPlan":
        segs = tuple(
            tuple(
                JerkProfile(
                    alpha=p["alpha"],
                    beta=p["beta"],
                    gamma=p["gamma"],
                    T=p["T"],
                    start=AxisState(*p["start"]),
                )
                for p in seg
            )
            for seg in d["segments"]
        )
        return cls(
            segments=segs,
            approach_point=tuple(d["approach_point"]),
            grasp_point=tuple(d["grasp_point"]),
            exit_point=tuple(d["exit_point"]),
            grasp_time=d["grasp_time"],
            approach_axis=tuple(d["approach_axis"]),
        )


def _segment(start_states, goals, T):
    return tuple(solve_axis(s, g, T) for s, g in zip(start_states, goals))


def _end_states(segment):
    return tuple(evaluate(p, p.T)[0] for p in segment)


def plan_swoop(drone, object_position, params: SwoopParams | None = None) -> SwoopPlan:
    """Compose the three-segment grasp trajectory.

    `drone` is a 3-tuple of AxisState (the planner assumes the vehicle is
    at or near the approach standoff when the plan starts streaming).
    """
    params = params or SwoopParams()
    obj = np.asarray(object_position, dtype=float)
    pos = np.array([drone[0].p, drone[1].p, drone[2].p])
    horiz = obj[:2] - pos[:2]
    dist = np.linalg.norm(horiz)
    if dist < 1e-6:
        raise ValueError("object is at the drone position; no approach axis")
    u = np.array([horiz[0] / dist, horiz[1] / dist, 0.0])

    d1, d2, d3 = params.segment_durations
    climb = math.radians(params.climb_angle_deg)
    v_grasp = params.grasp_speed * (math.cos(climb) * u + math.sin(climb) * np.array([0, 0, 1.0]))

    approach_point = obj - params.approach_standoff * u + np.array([0, 0, params.approach_height])
    exit_point = obj + params.exit_standoff * u + np.array([0, 0, params.lift_height])

    # approach -> grasp: arrive at the object with the planned through-velocity
    seg1 = _segment(
        drone,
        [AxisGoal(p=obj[i], v=v_grasp[i], a=0.0) for i in range(3)],
        d1,
    )
    # grasp -> lift: climb lift_height while continuing along track
    lift_point = obj + params.grasp_advance * u + np.array([0, 0, params.lift_height])
    s2_start = _end_states(seg1)
    seg2 = _segment(
        s2_start,
        [
            AxisGoal(p=lift_point[0]),
            AxisGoal(p=lift_point[1]),
            AxisGoal(p=lift_point[2], v=0.0),
        ],
        d2,
    )
    # lift -> exit: decelerate to a hover at the exit point
    s3_start = _end_states(seg2)
    seg3 = _segment(
        s3_start,
        [AxisGoal(p=exit_point[i], v=0.0, a=0.0) for i in range(3)],
        d3,
    )
    return SwoopPlan(
        segments=(seg1, seg2, seg3),
        approach_point=tuple(approach_point),
        grasp_point=tuple(obj),
        exit_point=tuple(exit_point),
        grasp_time=d1,
        approach_axis=tuple(u),
    )


def setpoint_stream(plan: SwoopPlan, rate: float = 50.0):
    """Uniform (t, SetpointMsg) samples covering the whole plan."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    n = int(math.ceil(plan.duration * rate)) + 1
    out = []
    for k in range(n):
        t = min(k / rate, plan.duration)
        p, v, a = plan.sample(t)
        out.append((t, SetpointMsg(position=p, velocity=v, acceleration=a)))
    return out
