"""Simulated motion capture and the latency-compensating estimator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..messages import PoseMsg
from .dynamics import RigidBodyState, quat_normalize
from .params import CONSTANT_VELOCITY, EstimatorConfig, MocapConfig


@dataclass(frozen=True)
class MocapSample:
    sample_time: float  # when the pose was captured
    delivery_time: float  # sample_time + configured latency
    pose: PoseMsg


class MocapSimulator:
    """Fixed-rate pose source with Gaussian position noise, latency and
    dropouts.  Deterministic for a given config (seed included)."""

    def __init__(self, cfg: MocapConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self._next_sample_time = 0.0

    @property
    def period(self) -> float:
        return 1.0 / self.cfg.rate

    def poll(self, true_state: RigidBodyState, now: float):
        """Return a MocapSample if a sample instant passed, else None.
        Dropouts consume the instant and return None."""
        if now + 1e-12 < self._next_sample_time:
            return None
        t_sample = self._next_sample_time
        self._next_sample_time += self.period
        if self.cfg.dropout_prob > 0.0 and self.rng.random() < self.cfg.dropout_prob:
            return None
        pos = true_state.position.copy()
        if self.cfg.position_noise_sigma > 0.0:
            pos = pos + self.rng.normal(0.0, self.cfg.position_noise_sigma, size=3)
        q = quat_normalize(true_state.orientation)
        pose = PoseMsg(position=tuple(pos), orientation=tuple(q))
        return MocapSample(
            sample_time=t_sample, delivery_time=t_sample + self.cfg.latency, pose=pose
        )


class LatencyCompensator:
    """Velocity from pose differencing, forward-extrapolated by the
    configured compensation delay."""

    def __init__(self, cfg: EstimatorConfig):
        self.cfg = cfg
        self._last = None  # (t, position, orientation)
        self._velocity = np.zeros(3)
        self.out_of_order_discards = 0

    def update(self, sample_time: float, pose: PoseMsg) -> RigidBodyState | None:
        pos = np.asarray(pose.position, dtype=float)
        if self._last is not None and sample_time < self._last[0]:
            self.out_of_order_discards += 1
            return self.state()
        if self._last is not None:
            dt = sample_time - self._last[0]
            if dt > 1e-9:
                self._velocity = (pos - self._last[1]) / dt
        self._last = (sample_time, pos, np.asarray(pose.orientation, dtype=float))
        return self.state()

    def state(self) -> RigidBodyState | None:
        if self._last is None:
            return None
        _, pos, quat = self._last
        est = RigidBodyState()
        est.velocity = self._velocity.copy()
        est.orientation = quat.copy()
        if self.cfg.extrapolation == CONSTANT_VELOCITY:
            est.position = pos + self._velocity * self.cfg.compensation_delay
        else:
            est.position = pos.copy()
        return est
