from .params import (
    CONSTANT_VELOCITY,
    GRAVITY,
    HOLD,
    MAX_PAYLOAD_KG,
    EstimatorConfig,
    GainSet,
    LateralNoiseConfig,
    MocapConfig,
    PayloadLimitExceeded,
    SimConfig,
    VehicleParams,
    load_config,
    save_config,
)
from .dynamics import (
    Mixer,
    RigidBodyState,
    SimulationFault,
    ground_effect_multiplier,
    quat_from_rotvec,
    quat_multiply,
    quat_normalize,
    quat_rotate,
    rotational_energy,
    step_dynamics,
)
from .control import AttitudeController, PositionCommand, RateController, attitude_ctl, position_ctl
from .sensors import LatencyCompensator, MocapSample, MocapSimulator
from .sim import DT, ClosedLoopSim, LateralWander

__all__ = [
    "CONSTANT_VELOCITY",
    "GRAVITY",
    "HOLD",
    "MAX_PAYLOAD_KG",
    "EstimatorConfig",
    "GainSet",
    "LateralNoiseConfig",
    "MocapConfig",
    "PayloadLimitExceeded",
    "SimConfig",
    "VehicleParams",
    "load_config",
    "save_config",
    "Mixer",
    "RigidBodyState",
    "SimulationFault",
    "ground_effect_multiplier",
    "quat_from_rotvec",
    "quat_multiply",
    "quat_normalize",
    "quat_rotate",
    "rotational_energy",
    "step_dynamics",
    "AttitudeController",
    "PositionCommand",
    "RateController",
    "attitude_ctl",
    "position_ctl",
    "LatencyCompensator",
    "MocapSample",
    "MocapSimulator",
    "DT",
    "ClosedLoopSim",
    "LateralWander",
]
