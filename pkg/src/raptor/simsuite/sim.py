"""Deterministic closed-loop simulation.

Single-context stepping at the body-rate period (1 kHz).  The attitude
loop runs every 2nd step, the position loop every 20th, matching the
500/50 Hz cascade.  The position loop consumes the mocap-fed estimator;
the attitude and rate loops consume the true rotational state (the
onboard-gyro path, which the architecture keeps off the mocap link).

Everything is a pure function of (config, seed): no wall clock, no
threads.  Mocap samples can be routed through an external hook (e.g. a
bus participant in synchronous-delivery mode) before reaching the
estimator.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from ..messages import SetpointMsg
from .control import AttitudeController, RateController, position_ctl
from .dynamics import Mixer, RigidBodyState, step_dynamics
from .params import SimConfig
from .sensors import LatencyCompensator, MocapSimulator

DT = 0.001
ATT_DIV = 2
POS_DIV = 20


class LateralWander:
    """Per-attempt lateral reference corruption: constant bias + smooth
    two-phase sinusoid, each Gaussian, so the offset at any instant is
    N(0, sqrt(sigma_bias^2 + sigma_wander^2))."""

    def __init__(self, cfg, rng: np.random.Generator):
        self.enabled = cfg.enabled
        self.bias = rng.normal(0.0, cfg.sigma_bias) if cfg.enabled else 0.0
        self.g1 = rng.normal(0.0, cfg.sigma_wander) if cfg.enabled else 0.0
        self.g2 = rng.normal(0.0, cfg.sigma_wander) if cfg.enabled else 0.0
        self.period = cfg.wander_period

    def offset(self, t):
        """Offset at time(s) t; accepts scalars or arrays."""
        if not self.enabled:
            return np.zeros_like(t, dtype=float) if np.ndim(t) else 0.0
        w = 2.0 * math.pi / self.period
        return self.bias + self.g1 * np.sin(w * t) + self.g2 * np.cos(w * t)


class ClosedLoopSim:
    def __init__(
        self,
        cfg: SimConfig,
        seed: int = 0,
        initial_state: RigidBodyState | None = None,
        mocap_hook=None,
    ):
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.truth = initial_state.copy() if initial_state else RigidBodyState()
        self.mocap = MocapSimulator(cfg.mocap)
        self.estimator = LatencyCompensator(cfg.estimator)
        self.attitude = AttitudeController(cfg.gains)
        self.rate = RateController(cfg.gains, cfg.vehicle)
        self.mixer = Mixer(cfg.vehicle)
        self.wander = LateralWander(cfg.lateral_noise, self.rng)
        self.mocap_hook = mocap_hook  # (sample_time, PoseMsg) -> forwarded elsewhere
        self.t = 0.0
        self._step_index = 0
        self._pending = []  # (delivery_time, counter, sample)
        self._pend_counter = 0
        self._q_sp = self.truth.orientation.copy()
        self._collective = cfg.vehicle.total_mass * 9.81
        self._rate_sp = np.zeros(3)
        self._setpoint = None
        self._thrusts = np.full(4, self._collective / 4.0)
        self.log: list[dict] = []
        self.gripper_events: list[dict] = []

    def deliver_pose(self, sample_time: float, pose) -> None:
        """Feed a pose measurement into the estimator (bus-side entry)."""
        self.estimator.update(sample_time, pose)

    def _process_mocap(self):
        sample = self.mocap.poll(self.truth, self.t)
        if sample is not None:
            self._pend_counter += 1
            heapq.heappush(self._pending, (sample.delivery_time, self._pend_counter, sample))
        while self._pending and self._pending[0][0] <= self.t + 1e-12:
            _, _, s = heapq.heappop(self._pending)
            if self.mocap_hook is not None:
                self.mocap_hook(s.sample_time, s.pose)
            else:
                self.deliver_pose(s.sample_time, s.pose)

    def run(self, setpoint_source, duration: float, on_pos_tick=None) -> list[dict]:
        """Step the closed loop for `duration` seconds.

        setpoint_source(t, est_state) -> SetpointMsg; est_state may be None
        before the first measurement.  on_pos_tick(sim, record) is called at
        50 Hz after each log record is appended.
        """
        n_steps = int(round(duration / DT))
        for _ in range(n_steps):
            self._process_mocap()
            est = self.estimator.state()
            if self._step_index % POS_DIV == 0:
                sp = setpoint_source(self.t, est)
                if sp is not None:
                    self._setpoint = sp
                if self._setpoint is not None and est is not None:
                    sp_used = self._apply_lateral_noise(self._setpoint)
                    cmd = position_ctl(sp_used, est, self.cfg.gains, self.cfg.vehicle)
                    self._q_sp = cmd.attitude_sp
                    self._collective = cmd.collective_thrust
                record = self._record(est)
                self.log.append(record)
                if on_pos_tick is not None:
                    on_pos_tick(self, record)
            if self._step_index % ATT_DIV == 0:
                self._rate_sp = self.attitude.update(
                    self._q_sp, self.truth.orientation, dt=ATT_DIV * DT
                )
            self._thrusts = self.rate.update(
                self._rate_sp, self.truth.body_rates, self._collective, DT
            )
            self.truth = step_dynamics(
                self.truth,
                self._thrusts,
                self.cfg.vehicle,
                DT,
                mixer=self.mixer,
                ground_z=self.cfg.ground_z if self.cfg.ground_effect_enabled else None,
            )
            self._step_index += 1
            self.t = self._step_index * DT
        return self.log

    def _apply_lateral_noise(self, sp: SetpointMsg) -> SetpointMsg:
        off = self.wander.offset(self.t)
        if off == 0.0:
            return sp
        p = (sp.position[0], sp.position[1] + off, sp.position[2])
        return SetpointMsg(
            position=p, velocity=sp.velocity, acceleration=sp.acceleration, yaw=sp.yaw
        )

    def _record(self, est) -> dict:
        sp = self._setpoint
        return {
            "t": round(self.t, 6),
            "pos": [float(x) for x in self.truth.position],
            "vel": [float(x) for x in self.truth.velocity],
            "est_pos": [float(x) for x in est.position] if est is not None else None,
            "est_vel": [float(x) for x in est.velocity] if est is not None else None,
            "sp_pos": [float(x) for x in sp.position] if sp is not None else None,
            "motors": [float(x) for x in self._thrusts],
            "lateral_offset": float(self.wander.offset(self.t)),
        }
