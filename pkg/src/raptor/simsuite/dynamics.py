"""Quadrotor rigid-body model: semi-implicit Euler with quaternion attitude.

Motor thrusts map to collective force and body torques through a standard
X-mixer; near the floor the collective thrust is scaled by the ground
effect multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import GRAVITY, VehicleParams


class SimulationFault(RuntimeError):
    pass


# Quaternion helpers (w, x, y, z) ------------------------------------------


def quat_normalize(q):
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0 or not np.isfinite(n):
        raise SimulationFault("degenerate quaternion")
    return q / n


def quat_multiply(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q, v):
    """Rotate vector v from body to world frame."""
    qv = np.array([0.0, v[0], v[1], v[2]])
    r = quat_multiply(quat_multiply(q, qv), quat_conjugate(q))
    return r[1:]


def quat_from_rotvec(rv):
    rv = np.asarray(rv, dtype=float)
    angle = np.linalg.norm(rv)
    if angle < 1e-12:
        return np.array([1.0, rv[0] / 2.0, rv[1] / 2.0, rv[2] / 2.0])
    axis = rv / angle
    s = math.sin(angle / 2.0)
    return np.array([math.cos(angle / 2.0), axis[0] * s, axis[1] * s, axis[2] * s])


@dataclass
class RigidBodyState:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    body_rates: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def copy(self) -> "RigidBodyState":
        return RigidBodyState(
            self.position.copy(),
            self.velocity.copy(),
            self.orientation.copy(),
            self.body_rates.copy(),
        )


def ground_effect_multiplier(z_agl: float, rotor_radius: float) -> float:
    """Thrust gain near the floor: 1 / (1 - (R/4z)^2), clamped below z = R/2."""
    if rotor_radius <= 0:
        raise ValueError("rotor_radius must be positive")
    z = max(z_agl, rotor_radius / 2.0)
    ratio = rotor_radius / (4.0 * z)
    return 1.0 / (1.0 - ratio * ratio)


class Mixer:
    """Standard X configuration: motors at 45 deg on each arm.

    Motor order: 0 front-right, 1 back-left, 2 front-left, 3 back-right.
    """

    def __init__(self, params: VehicleParams):
        lx = params.arm_length / math.sqrt(2.0)
        c = params.yaw_torque_coeff
        # rows: total thrust, tau_x (roll), tau_y (pitch), tau_z (yaw)
        self.matrix = np.array(
            [
                [1.0, 1.0, 1.0, 1.0],
                [-lx, lx, lx, -lx],
                [lx, -lx, lx, -lx],
                [c, c, -c, -c],
            ]
        )
        self.inverse = np.linalg.inv(self.matrix)
        self.motor_max = params.max_thrust / 4.0

    def thrusts_from_wrench(self, collective: float, torques) -> np.ndarray:
        w = np.array([collective, torques[0], torques[1], torques[2]])
        f = self.inverse @ w
        return np.clip(f, 0.0, self.motor_max)

    def wrench_from_thrusts(self, thrusts) -> tuple[float, np.ndarray]:
        w = self.matrix @ np.asarray(thrusts, dtype=float)
        return float(w[0]), w[1:]


def step_dynamics(
    state: RigidBodyState,
    motor_thrusts,
    params: VehicleParams,
    dt: float,
    disturbance_accel=None,
    mixer: Mixer | None = None,
    ground_z: float | None = None,
) -> RigidBodyState:
    """One semi-implicit Euler step at dt <= 2 ms."""
    if not 0.0 < dt <= 0.002:
        raise ValueError("dt must be in (0, 2 ms]")
    thrusts = np.asarray(motor_thrusts, dtype=float)
    motor_max = params.max_thrust / 4.0
    if np.any(thrusts < -1e-12) or np.any(thrusts > motor_max + 1e-9):
        raise ValueError(f"motor thrusts outside [0, {motor_max}]")
    if not (
        np.all(np.isfinite(state.position))
        and np.all(np.isfinite(state.velocity))
        and np.all(np.isfinite(state.body_rates))
        and np.all(np.isfinite(state.orientation))
    ):
        raise SimulationFault("non-finite state")
    mixer = mixer or Mixer(params)

    collective, torques = mixer.wrench_from_thrusts(thrusts)
    if ground_z is not None:
        z_agl = state.position[2] - ground_z
        collective *= ground_effect_multiplier(z_agl, params.rotor_radius)

    m = params.total_mass
    body_z = quat_rotate(state.orientation, np.array([0.0, 0.0, 1.0]))
    accel = body_z * (collective / m)
    accel[2] -= GRAVITY
    accel -= params.drag_coeff * state.velocity
    if disturbance_accel is not None:
        accel = accel + np.asarray(disturbance_accel, dtype=float)

    inertia = np.asarray(params.inertia, dtype=float)
    omega = state.body_rates
    omega_dot = (torques - np.cross(omega, inertia * omega)) / inertia

    new = state.copy()
    new.velocity = state.velocity + accel * dt
    new.position = state.position + new.velocity * dt
    new.body_rates = omega + omega_dot * dt
    dq = quat_from_rotvec(new.body_rates * dt)
    new.orientation = quat_normalize(quat_multiply(state.orientation, dq))

    if not (
        np.all(np.isfinite(new.position))
        and np.all(np.isfinite(new.velocity))
        and np.all(np.isfinite(new.body_rates))
    ):
        raise SimulationFault("non-finite state")
    return new


def rotational_energy(state: RigidBodyState, params: VehicleParams) -> float:
    inertia = np.asarray(params.inertia, dtype=float)
    return 0.5 * float(np.dot(state.body_rates, inertia * state.body_rates))
