"""Scenario files: road, vehicle, obstacles, controller configs, seeds.

A scenario is a JSON document with one section per subsystem; unknown keys
are rejected so typos cannot silently fall back to defaults. All units SI,
angles in radians.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .grid import AnalyzerConfig
from .guard import GuardThresholds
from .lidar import GridConfig, LidarConfig
from .localization import LocalizationConfig
from .steering import SteeringConfig
from .teachpath import TeachPath
from .vehicle import OdometryNoise, VehicleParams
from .velocity import PenalizationConfig, PiecewiseMap, VelocityConfig


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ObstacleSpec:
    id: str
    x: float
    y: float
    size_x: float = 1.0
    size_y: float = 1.0
    height: float = 1.0
    spawn_time: float | None = None
    despawn_time: float | None = None
    blink_period: float | None = None  # alternating visibility, seconds
    blink_duty: float = 0.5

    def active(self, t: float) -> bool:
        if self.spawn_time is not None and t < self.spawn_time:
            return False
        if self.despawn_time is not None and t >= self.despawn_time:
            return False
        if self.blink_period is not None:
            return math.fmod(t, self.blink_period) < self.blink_duty * self.blink_period
        return True

    def aabb(self) -> tuple[float, float, float, float, float, float]:
        return (self.x - 0.5 * self.size_x, self.y - 0.5 * self.size_y, 0.0,
                self.x + 0.5 * self.size_x, self.y + 0.5 * self.size_y,
                self.height)


@dataclass(frozen=True)
class RoadSpec:
    kind: str = "straight"
    length: float = 200.0
    width: float = 6.0
    grade: float = 0.0
    amplitude: float = 6.0    # s_curve only
    wavelength: float = 100.0  # s_curve only
    radius: float = 30.0      # circle only
    arc_fraction: float = 1.0  # circle only
    points: tuple[tuple[float, float], ...] = ()  # polyline only

    def centerline(self, spacing: float = 0.5):
        """(xs, ys, headings) sampled at roughly ``spacing`` arclength."""
        if self.kind == "straight":
            n = max(math.ceil(self.length / spacing) + 1, 2)
            xs = np.linspace(0.0, self.length, n)
            ys = np.zeros(n)
        elif self.kind == "s_curve":
            step = spacing / 2.0
            xs = np.arange(0.0, self.length + step, step)
            ys = self.amplitude * np.sin(2.0 * math.pi * xs / self.wavelength)
            xs, ys = _resample(xs, ys, spacing)
        elif self.kind == "circle":
            arc = 2.0 * math.pi * self.radius * self.arc_fraction
            n = max(math.ceil(arc / spacing) + 1, 8)
            ang = np.linspace(0.0, arc / self.radius, n)
            xs = self.radius * np.sin(ang)
            ys = self.radius * (1.0 - np.cos(ang))
        elif self.kind == "polyline":
            if len(self.points) < 2:
                raise ScenarioError("polyline road needs >= 2 points")
            pts = np.asarray(self.points, dtype=np.float64)
            xs, ys = _resample(pts[:, 0], pts[:, 1], spacing)
        else:
            raise ScenarioError(f"unknown road kind {self.kind!r}")
        return xs, ys, _headings(xs, ys)


def _resample(xs, ys, spacing):
    seg = np.hypot(np.diff(xs), np.diff(ys))
    s = np.concatenate(([0.0], np.cumsum(seg)))
    total = s[-1]
    n = max(math.ceil(total / spacing) + 1, 2)
    si = np.linspace(0.0, total, n)
    return np.interp(si, s, xs), np.interp(si, s, ys)


def _headings(xs, ys):
    dx = np.gradient(xs)
    dy = np.gradient(ys)
    return np.arctan2(dy, dx)


@dataclass(frozen=True)
class TeachConfig:
    speed: float = 5.0
    max_drive_speed: float = 9.0   # live UI throttle scale
    min_spacing: float = 0.4
    max_spacing: float = 0.5


@dataclass(frozen=True)
class RunConfig:
    dt: float = 0.005
    lidar_every_ticks: int = 20        # 10 Hz
    localization_every_ticks: int = 10  # 20 Hz
    grid_delivery_ticks: int = 4       # snapshot handover delay
    submap_max_len: float = 3300.0
    submap_end_window: float = 5.0
    submap_load_rate: float = 0.5      # seconds per km of the next map
    end_stop_decel: float = 1.2        # comfort stopping ramp at path ends
    max_duration: float | None = None  # None: derived from path length
    events: tuple[dict, ...] = ()      # scripted torque/stop/fault events
    scan_dump_dir: str | None = None   # write one labeled-scan CSV per scan


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    road: RoadSpec = field(default_factory=RoadSpec)
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    initial_pose: tuple[float, float, float] = (0.0, 0.0, 0.0)
    obstacles: tuple[ObstacleSpec, ...] = ()
    seed: int = 0
    teach: TeachConfig = field(default_factory=TeachConfig)
    run: RunConfig = field(default_factory=RunConfig)
    steering: SteeringConfig = field(default_factory=SteeringConfig)
    velocity: VelocityConfig = field(default_factory=VelocityConfig)
    penalize: PenalizationConfig = field(default_factory=PenalizationConfig)
    localization: LocalizationConfig = field(default_factory=LocalizationConfig)
    odometry_noise: OdometryNoise = field(
        default_factory=lambda: OdometryNoise(wheel_speed_std=0.02,
                                              steering_std=0.002))
    lidar: LidarConfig = field(default_factory=LidarConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    guard: GuardThresholds = field(default_factory=GuardThresholds)

    def centerline_path(self) -> TeachPath:
        xs, ys, hs = self.road.centerline()
        return TeachPath(xs, ys, hs, np.full(len(xs), self.teach.speed))


class World:
    """Static road plus obstacle boxes, including live UI-placed ones."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self._ui_obstacles: dict[str, ObstacleSpec] = {}
        xs, ys, hs = scenario.road.centerline()
        self._road_xs, self._road_ys, self._road_hs = xs, ys, hs

    def place_obstacle(self, spec: ObstacleSpec) -> None:
        self._ui_obstacles[spec.id] = spec  # idempotent by id

    def remove_obstacle(self, obstacle_id: str) -> bool:
        return self._ui_obstacles.pop(obstacle_id, None) is not None

    def ui_obstacles(self) -> list[ObstacleSpec]:
        return list(self._ui_obstacles.values())

    def boxes_at(self, t: float) -> np.ndarray:
        active = [o.aabb() for o in self.scenario.obstacles if o.active(t)]
        active += [o.aabb() for o in self._ui_obstacles.values() if o.active(t)]
        if not active:
            return np.zeros((0, 6))
        return np.asarray(active, dtype=np.float64)

    def corridor_offset(self, x: float, y: float) -> float:
        """Unsigned distance from the road centerline (nearest sample)."""
        d2 = (self._road_xs - x) ** 2 + (self._road_ys - y) ** 2
        return float(math.sqrt(d2.min()))


_SECTION_TYPES = {
    "road": RoadSpec,
    "vehicle": VehicleParams,
    "teach": TeachConfig,
    "run": RunConfig,
    "steering": SteeringConfig,
    "velocity": VelocityConfig,
    "localization": LocalizationConfig,
    "odometry_noise": OdometryNoise,
    "lidar": LidarConfig,
    "grid": GridConfig,
    "analyzer": AnalyzerConfig,
    "guard": GuardThresholds,
}

_PENALIZE_DIRECTIONS = {"obstacle": True, "lateral": False,
                        "path_end": True, "shutdown": False}


def _build_section(cls, data: dict, section: str):
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - fields
    if unknown:
        raise ScenarioError(f"{section}: unknown key(s) {sorted(unknown)}")
    coerced = {}
    for key, value in data.items():
        if isinstance(value, list):
            value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        coerced[key] = value
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{section}: {exc}") from exc


def parse_scenario(data: dict[str, Any]) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario root must be an object")
    known = {"name", "initial_pose", "obstacles", "seed", "penalize",
             *_SECTION_TYPES}
    unknown = set(data) - known
    if unknown:
        raise ScenarioError(f"unknown top-level key(s) {sorted(unknown)}")

    kwargs: dict[str, Any] = {}
    for section, cls in _SECTION_TYPES.items():
        if section in data:
            kwargs[section] = _build_section(cls, data[section], section)
    if "name" in data:
        kwargs["name"] = str(data["name"])
    if "seed" in data:
        kwargs["seed"] = int(data["seed"])
    if "initial_pose" in data:
        pose = data["initial_pose"]
        if len(pose) != 3:
            raise ScenarioError("initial_pose must be [x, y, heading]")
        kwargs["initial_pose"] = tuple(float(v) for v in pose)
    if "obstacles" in data:
        specs = []
        for i, ob in enumerate(data["obstacles"]):
            ob = dict(ob)
            ob.setdefault("id", f"ob{i}")
            specs.append(_build_section(ObstacleSpec, ob, f"obstacles[{i}]"))
        kwargs["obstacles"] = tuple(specs)
    if "penalize" in data:
        maps = {}
        for name, pts in data["penalize"].items():
            if name not in _PENALIZE_DIRECTIONS:
                raise ScenarioError(f"penalize: unknown factor {name!r}")
            maps[name] = PiecewiseMap(pts, increasing=_PENALIZE_DIRECTIONS[name])
        kwargs["penalize"] = PenalizationConfig(**maps)
    return Scenario(**kwargs)


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"scenario file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON ({exc})") from exc
    scn = parse_scenario(data)
    if scn.name == "scenario":
        scn = dataclasses.replace(scn, name=p.stem)
    return scn


# keys settable from the CLI / UI at runtime
OVERRIDE_WHITELIST = {
    "seed", "teach.speed",
    "steering.k1_lad_s", "steering.k2_lad_s", "steering.lad_min",
    "steering.lad_max", "steering.gain",
    "velocity.mu", "velocity.v_freedom", "velocity.max_abs_vel",
    "velocity.k1_lad_v", "velocity.k2_lad_v",
    "localization.noise_xy_std", "localization.noise_heading_std",
    "analyzer.hold_time", "analyzer.creep_speed",
    "run.submap_max_len", "run.submap_end_window", "run.submap_load_rate",
}

_KEY_ALIASES = {
    "steering.gain": ("steering", "pursuit_gain"),
    "velocity.mu": ("velocity", "mu_fric"),
}


def apply_override(scenario: Scenario, key: str, value: Any) -> Scenario:
    """Set one whitelisted dotted config key, returning a new scenario."""
    if key not in OVERRIDE_WHITELIST:
        raise ScenarioError(f"unknown or non-overridable key {key!r}")
    if key == "seed":
        return dataclasses.replace(scenario, seed=int(value))
    section, attr = _KEY_ALIASES.get(key, tuple(key.split(".", 1)))
    old = getattr(scenario, section)
    try:
        new = dataclasses.replace(old, **{attr: type(getattr(old, attr))(value)})
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{key}: {exc}") from exc
    return dataclasses.replace(scenario, **{section: new})


def parse_override_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw
