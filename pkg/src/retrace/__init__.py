"""retrace: a deterministic teach-and-repeat driving simulator.

A demonstration drive is recorded as a reference path; the repeat phase
retraces it with Pure Pursuit steering and friction-bounded velocity
planning while a simulated ring LiDAR, an occupancy-grid danger analysis,
and a cascaded safety guard watch the road ahead.
"""

from ._kernels import backend_name
from .engine import RepeatResult, TeachResult, run_repeat, run_teach, summarize
from .grid import ObstacleReport, criticality, critical_limit
from .guard import GuardDecision, GuardInputs, GuardMode, Led, SafetyGuard
from .lidar import LidarConfig, OccupancyGrid, RingScan, simulate_scan
from .localization import LocalizationConfig, LocalizationEstimate, Localizer, LocMode
from .pathref import PathCursor, closest_point, curve_radius, lookahead_point
from .scenario import Scenario, ScenarioError, load_scenario
from .steering import SteeringConfig, SteeringController, pure_pursuit_angle
from .teachpath import PathTooShortError, SubMap, TeachPath, record_teach, split_into_submaps
from .vehicle import ActuatorCommand, VehicleParams, VehicleState, step_dynamics
from .velocity import (PenalizationConfig, VelocityConfig, apply_penalizations,
                       physical_velocity, reference_velocity)

__version__ = "0.1.0"

__all__ = [
    "ActuatorCommand", "GuardDecision", "GuardInputs", "GuardMode", "Led",
    "LidarConfig", "LocalizationConfig", "LocalizationEstimate", "LocMode",
    "Localizer", "ObstacleReport", "OccupancyGrid", "PathCursor",
    "PathTooShortError", "PenalizationConfig", "RepeatResult", "RingScan",
    "SafetyGuard", "Scenario", "ScenarioError", "SteeringConfig",
    "SteeringController", "SubMap", "TeachPath", "TeachResult",
    "VehicleParams", "VehicleState", "VelocityConfig", "apply_penalizations",
    "backend_name", "closest_point", "critical_limit", "criticality",
    "curve_radius", "load_scenario", "lookahead_point", "physical_velocity",
    "pure_pursuit_angle", "record_teach", "reference_velocity", "run_repeat",
    "run_teach", "simulate_scan", "split_into_submaps", "step_dynamics",
    "summarize",
]
