"""Abstract localization simulator.

Models the operational envelope of the visual pipeline rather than its
internals: a pose fix is available while the vehicle stays within a lateral
and heading corridor around the taught path (and outside scripted dropout
windows); otherwise the estimate dead-reckons on wheel odometry, and a run
whose fix stays missing past the limit is lost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .geometry import wrap_angle
from .pathref import closest_point
from .teachpath import TeachPath
from .vehicle import OdometrySample, VehicleParams, VehicleState


class LocMode(Enum):
    LOCALIZED = "LOCALIZED"
    DEAD_RECKONING = "DEAD_RECKONING"
    LOST = "LOST"


@dataclass(frozen=True)
class LocalizationConfig:
    lateral_envelope: float = 2.0
    heading_envelope: float = math.radians(20.0)
    dead_reckoning_limit: float = 2.0
    noise_xy_std: float = 0.05
    noise_heading_std: float = math.radians(0.5)
    update_rate_hz: float = 20.0
    # half-open [start, end) intervals of scripted fix loss, seconds
    dropouts: tuple[tuple[float, float], ...] = ()

    def in_dropout(self, t: float) -> bool:
        return any(start <= t < end for start, end in self.dropouts)


@dataclass(frozen=True)
class LocalizationEstimate:
    x: float
    y: float
    heading: float
    mode: LocMode
    time_since_fix: float
    lateral_error_to_path: float


def envelope_ok(true_state: VehicleState, path: TeachPath | None,
                cfg: LocalizationConfig, prev_index: int | None = None) -> bool:
    """Whether the true pose is inside the re-localization envelope.

    Pathless operation (the teach phase, before any map exists) always has
    a fix; only scripted dropouts can take it away there.
    """
    if path is None:
        return True
    q = closest_point(path, true_state.x, true_state.y, true_state.heading,
                      prev_index=prev_index)
    return (abs(q.lateral_error) <= cfg.lateral_envelope
            and abs(q.heading_error) <= cfg.heading_envelope)


def dead_reckon(prev: LocalizationEstimate, odom: OdometrySample,
                params: VehicleParams, dt: float,
                cfg: LocalizationConfig) -> LocalizationEstimate:
    """Advance the estimate by integrating the odometry twist.

    Uses the same constant-twist arc step as the ground-truth integrator so
    noiseless dead reckoning reproduces the truth to integration tolerance.
    Crossing the dead-reckoning limit turns the estimate LOST.
    """
    if prev.mode == LocMode.LOCALIZED:
        raise ValueError("dead_reckon requires a DEAD_RECKONING/LOST estimate")
    v, _, omega = odom.body_twist(params)
    if abs(omega) < 1e-9:
        x = prev.x + v * math.cos(prev.heading) * dt
        y = prev.y + v * math.sin(prev.heading) * dt
        heading = prev.heading
    else:
        radius = v / omega
        h1 = prev.heading + omega * dt
        x = prev.x + radius * (math.sin(h1) - math.sin(prev.heading))
        y = prev.y - radius * (math.cos(h1) - math.cos(prev.heading))
        heading = h1
    tsf = prev.time_since_fix + dt
    mode = LocMode.LOST if tsf >= cfg.dead_reckoning_limit else LocMode.DEAD_RECKONING
    return LocalizationEstimate(x=x, y=y, heading=wrap_angle(heading), mode=mode,
                                time_since_fix=tsf,
                                lateral_error_to_path=prev.lateral_error_to_path)


@dataclass
class Localizer:
    """Owns the estimate stream; updated at the localization rate (20 Hz).

    The engine consumes the latest estimate between updates (zero-order
    hold). LOST is absorbing: the guard terminates the run.
    """

    cfg: LocalizationConfig
    params: VehicleParams
    rng: np.random.Generator
    path: TeachPath | None = None
    estimate: LocalizationEstimate | None = field(default=None)

    def estimate_pose(self, true_state: VehicleState, odom: OdometrySample,
                      t: float, dt: float) -> LocalizationEstimate:
        """One localization update; ``dt`` is the time since the previous one."""
        prev = self.estimate
        if prev is not None and prev.mode == LocMode.LOST:
            return prev

        fix = not self.cfg.in_dropout(t) and envelope_ok(
            true_state, self.path, self.cfg,
            prev_index=None)
        can_relocalize = prev is None or prev.mode == LocMode.LOCALIZED \
            or prev.time_since_fix + dt < self.cfg.dead_reckoning_limit

        if fix and can_relocalize:
            est = self._localized(true_state)
        else:
            if prev is None:
                raise ValueError("cannot start a run without an initial fix")
            seed = prev
            if prev.mode == LocMode.LOCALIZED:
                seed = LocalizationEstimate(
                    x=prev.x, y=prev.y, heading=prev.heading,
                    mode=LocMode.DEAD_RECKONING, time_since_fix=0.0,
                    lateral_error_to_path=prev.lateral_error_to_path)
            est = dead_reckon(seed, odom, self.params, dt, self.cfg)
        self.estimate = est
        return est

    def _localized(self, true_state: VehicleState) -> LocalizationEstimate:
        x = true_state.x + self.cfg.noise_xy_std * self.rng.standard_normal()
        y = true_state.y + self.cfg.noise_xy_std * self.rng.standard_normal()
        heading = wrap_angle(true_state.heading
                             + self.cfg.noise_heading_std * self.rng.standard_normal())
        lateral = 0.0
        if self.path is not None:
            q = closest_point(self.path, x, y, heading)
            lateral = q.lateral_error
        return LocalizationEstimate(x=x, y=y, heading=heading,
                                    mode=LocMode.LOCALIZED, time_since_fix=0.0,
                                    lateral_error_to_path=lateral)


@dataclass(frozen=True)
class TransitionPlan:
    """Stop-and-reload plan for a sub-map boundary."""

    stop_required: bool
    load_delay: float
    next_submap: int | None


def submap_transition(current_index: int, submap_count: int,
                      next_length: float | None,
                      load_rate_s_per_km: float = 0.5) -> TransitionPlan:
    """Plan the boundary handling at the end of the current sub-map.

    The vehicle stops, the map swap takes a delay proportional to the next
    sub-map's length, then the run resumes without operator input. The last
    sub-map has no successor: normal end of mission.
    """
    if current_index >= submap_count - 1:
        return TransitionPlan(stop_required=True, load_delay=0.0, next_submap=None)
    assert next_length is not None
    delay = load_rate_s_per_km * next_length / 1000.0
    return TransitionPlan(stop_required=True, load_delay=delay,
                          next_submap=current_index + 1)
