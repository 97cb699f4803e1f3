"""Three-loop cascade: position (50 Hz) -> attitude (500 Hz) -> rate (1000 Hz)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..messages import SetpointMsg
from .dynamics import Mixer, RigidBodyState, quat_conjugate, quat_multiply
from .params import GRAVITY, GainSet, VehicleParams


@dataclass
class PositionCommand:
    attitude_sp: np.ndarray  # quaternion (w, x, y, z)
    collective_thrust: float  # N
    saturated: bool


def position_ctl(
    setpoint: SetpointMsg,
    est: RigidBodyState,
    gains: GainSet,
    params: VehicleParams,
    accel_disturbance=None,
) -> PositionCommand:
    """PD on position/velocity with acceleration feedforward and gravity
    compensation, mapped to a tilt-limited attitude + collective thrust."""
    pos_err = np.asarray(setpoint.position) - est.position
    vel_err = np.asarray(setpoint.velocity) - est.velocity
    a_des = (
        np.asarray(setpoint.acceleration)
        + np.asarray(gains.pos_p) * pos_err
        + np.asarray(gains.pos_d) * vel_err
    )
    if accel_disturbance is not None:
        a_des = a_des + np.asarray(accel_disturbance)
    a_des = a_des + np.array([0.0, 0.0, GRAVITY])

    saturated = False
    # Tilt limit: cap the horizontal component relative to the vertical one.
    az = max(a_des[2], 1e-3)
    horiz = math.hypot(a_des[0], a_des[1])
    max_horiz = az * math.tan(params.max_tilt)
    if horiz > max_horiz:
        a_des[0] *= max_horiz / horiz
        a_des[1] *= max_horiz / horiz
        saturated = True

    thrust = params.total_mass * float(np.linalg.norm(a_des))
    if thrust > params.max_thrust:
        thrust = params.max_thrust
        saturated = True

    b3 = a_des / np.linalg.norm(a_des)
    yaw = setpoint.yaw
    # Desired frame from thrust direction + yaw (z-x convention).
    c1 = np.array([math.cos(yaw), math.sin(yaw), 0.0])
    b2 = np.cross(b3, c1)
    b2 /= np.linalg.norm(b2)
    b1 = np.cross(b2, b3)
    R = np.column_stack([b1, b2, b3])
    q = _quat_from_matrix(R)
    return PositionCommand(attitude_sp=q, collective_thrust=thrust, saturated=saturated)


def _quat_from_matrix(R):
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2.0
        w = 0.25 * s
        x = (R[2, 1] - R[1, 2]) / s
        y = (R[0, 2] - R[2, 0]) / s
        z = (R[1, 0] - R[0, 1]) / s
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        w = (R[2, 1] - R[1, 2]) / s
        x = 0.25 * s
        y = (R[0, 1] + R[1, 0]) / s
        z = (R[0, 2] + R[2, 0]) / s
    elif R[1, 1] > R[2, 2]:
        s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        w = (R[0, 2] - R[2, 0]) / s
        x = (R[0, 1] + R[1, 0]) / s
        y = 0.25 * s
        z = (R[1, 2] + R[2, 1]) / s
    else:
        s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        w = (R[1, 0] - R[0, 1]) / s
        x = (R[0, 2] + R[2, 0]) / s
        y = (R[1, 2] + R[2, 1]) / s
        z = 0.25 * s
    q = np.array([w, x, y, z])
    return q / np.linalg.norm(q)


class AttitudeController:
    """Nonlinear PD on the quaternion error, shortest-path corrected."""

    def __init__(self, gains: GainSet):
        self.gains = gains
        self._last_rate_sp = np.zeros(3)

    def update(self, q_sp, q, dt: float | None = None) -> np.ndarray:
        q_err = quat_multiply(quat_conjugate(q), q_sp)
        if q_err[0] < 0.0:
            q_err = -q_err  # double cover: always take the short way around
        rotvec = 2.0 * q_err[1:]
        rate_sp = np.asarray(self.gains.att_p) * rotvec
        if dt and dt > 0:
            rate_sp = rate_sp + np.asarray(self.gains.att_d) * (
                (rate_sp - self._last_rate_sp) / dt
            )
        self._last_rate_sp = rate_sp
        return rate_sp


def attitude_ctl(q_sp, q, gains: GainSet) -> np.ndarray:
    return AttitudeController(gains).update(q_sp, q)


class RateController:
    """Body-rate PID with clamped integrator; outputs motor thrusts."""

    def __init__(self, gains: GainSet, params: VehicleParams):
        self.gains = gains
        self.params = params
        self.mixer = Mixer(params)
        self.integral = np.zeros(3)
        self._last_err = None

    def reset(self):
        self.integral = np.zeros(3)
        self._last_err = None

    def update(self, omega_sp, omega, collective_thrust: float, dt: float) -> np.ndarray:
        if dt <= 0:
            raise ValueError("dt must be positive")
        err = np.asarray(omega_sp) - np.asarray(omega)
        self.integral = np.clip(
            self.integral + err * dt, -self.gains.rate_int_limit, self.gains.rate_int_limit
        )
        derr = np.zeros(3) if self._last_err is None else (err - self._last_err) / dt
        self._last_err = err
        angular_accel = (
            np.asarray(self.gains.rate_p) * err
            + np.asarray(self.gains.rate_i) * self.integral
            + np.asarray(self.gains.rate_d) * derr
        )
        torques = np.asarray(self.params.inertia) * angular_accel
        return self.mixer.thrusts_from_wrench(collective_thrust, torques)
