"""Occupancy-grid danger analysis along the predicted future path.

The dangerous zone is a corridor following the upcoming reference path
(not the vehicle heading), as wide as the car plus a tolerance that grows
with the current tracking error. Obstacle cells inside it yield the
shortest along-path blocking distance, classified critical against a
velocity-dependent interval, with a disappearance hold and a creep-forward
re-check for obstacles the beams keep losing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import world_to_frame
from .lidar import OccupancyGrid
from .teachpath import TeachPath


@dataclass(frozen=True)
class AnalyzerConfig:
    k_tol: float = 1.0          # corridor widening per meter of tracking error
    tol_min: float = 0.2
    horizon_margin: float = 5.0
    hold_time: float = 2.0
    creep_time: float = 3.0
    creep_speed: float = 0.5
    stop_eps: float = 0.05
    sample_step: float = 0.2    # corridor polyline sampling, meters


@dataclass
class DangerZone:
    """Corridor cells plus the sampled polyline they were built from."""

    half_width: float
    horizon: float
    mask: np.ndarray          # bool, same shape as the grid
    sample_x: np.ndarray      # grid (vehicle) frame
    sample_y: np.ndarray
    sample_s: np.ndarray      # along-path distance from the vehicle's closest point


def critical_limit(v_abs: float) -> float:
    """Upper end of the critical distance interval, meters."""
    return (v_abs * 3.6 / 10.0) ** 2


def criticality(distance: float | None, v_abs: float) -> bool:
    """Critical iff the blocking distance falls in [0, critical_limit].

    The upper end is inclusive (fail-safe); a stationary vehicle has a zero
    interval, so nothing is critical at standstill.
    """
    if distance is None or v_abs <= 0.0:
        return False
    return 0.0 <= distance <= critical_limit(v_abs)


def danger_horizon(v_abs: float, lookahead_vel: float, max_decel: float,
                   margin: float) -> float:
    """Corridor length: sensing window or stopping distance, plus a margin."""
    stopping = v_abs * v_abs / (2.0 * max_decel)
    return max(lookahead_vel, stopping) + margin


def _resample_ahead(path: TeachPath, closest_index: int, horizon: float,
                    step: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """World-frame samples of the path over the next ``horizon`` meters."""
    s0 = float(path.s[closest_index])
    s_end = min(s0 + horizon, float(path.s[-1]))
    n = max(int((s_end - s0) / step) + 1, 2)
    s = np.linspace(s0, s_end, n)
    x = np.interp(s, path.s, path.xs)
    y = np.interp(s, path.s, path.ys)
    return x, y, s - s0


def build_danger_zone(path: TeachPath, closest_index: int, horizon: float,
                      tracking_error: float, body_width: float,
                      grid: OccupancyGrid, cfg: AnalyzerConfig) -> DangerZone:
    """Corridor around the upcoming reference path, in the grid frame.

    half_width = body_width / 2 + k_tol * |tracking_error| + tol_min. The
    path is transformed into the grid's vehicle frame via its pose tag, so
    the zone bends with the path instead of extrapolating the heading.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be > 0")
    half_width = 0.5 * body_width + cfg.k_tol * abs(tracking_error) + cfg.tol_min
    wx, wy, s_rel = _resample_ahead(path, closest_index, horizon, cfg.sample_step)
    tx, ty, th = grid.pose_tag
    gx, gy = world_to_frame(wx, wy, tx, ty, th)

    mask = np.zeros_like(grid.cells)
    res = grid.cfg.resolution
    nx, ny = grid.cfg.nx, grid.cfg.ny
    for px, py in zip(gx, gy):
        i0 = int(math.floor((px - half_width - grid.cfg.x_min) / res))
        i1 = int(math.floor((px + half_width - grid.cfg.x_min) / res))
        j0 = int(math.floor((py - half_width - grid.cfg.y_min) / res))
        j1 = int(math.floor((py + half_width - grid.cfg.y_min) / res))
        i0, i1 = max(i0, 0), min(i1, nx - 1)
        j0, j1 = max(j0, 0), min(j1, ny - 1)
        if i0 > i1 or j0 > j1:
            continue
        cx = grid.cfg.x_min + (np.arange(i0, i1 + 1) + 0.5) * res
        cy = grid.cfg.y_min + (np.arange(j0, j1 + 1) + 0.5) * res
        d2 = (cx[:, None] - px) ** 2 + (cy[None, :] - py) ** 2
        mask[i0:i1 + 1, j0:j1 + 1] |= d2 <= half_width * half_width
    return DangerZone(half_width=half_width, horizon=horizon, mask=mask,
                      sample_x=gx, sample_y=gy, sample_s=s_rel)


def blocking_distance(grid: OccupancyGrid, zone: DangerZone) -> float | None:
    """Shortest along-path distance to an obstacle cell inside the zone."""
    ox, oy = grid.occupied_xy()
    d = _kernels.corridor_min_blocking(ox, oy, zone.sample_x, zone.sample_y,
                                       zone.sample_s, zone.half_width)
    return None if math.isinf(d) else float(d)


@dataclass(frozen=True)
class ObstacleReport:
    blocking_distance: float | None
    critical: bool
    held: bool
    creep_active: bool
    timestamp: float


class ObstaclePersistence:
    """Disappearance hold plus the post-stop creep re-check.

    A vanished obstacle keeps its last blocking distance for ``hold_time``
    so beam-gap flicker cannot gate the velocity. If the hold expires while
    the vehicle is stopped (it was stopped by something the beams can no
    longer see), a single creep phase of ``creep_time`` allows slow forward
    motion to re-check; a reappearing obstacle cancels the creep and the
    hold starts over on the next disappearance.
    """

    def __init__(self, cfg: AnalyzerConfig):
        self.cfg = cfg
        self._last_distance: float | None = None
        self._last_seen: float | None = None
        self._expiry_handled = False
        self._creep_until: float | None = None

    def update(self, raw_distance: float | None, now: float, speed: float,
               v_abs_for_crit: float | None = None) -> ObstacleReport:
        v_crit = speed if v_abs_for_crit is None else v_abs_for_crit
        if raw_distance is not None:
            self._last_distance = raw_distance
            self._last_seen = now
            self._expiry_handled = False
            self._creep_until = None
            return ObstacleReport(raw_distance, criticality(raw_distance, v_crit),
                                  held=False, creep_active=False, timestamp=now)

        if self._last_seen is not None \
                and now - self._last_seen < self.cfg.hold_time:
            d = self._last_distance
            return ObstacleReport(d, criticality(d, v_crit),
                                  held=True, creep_active=False, timestamp=now)

        if self._last_seen is not None and not self._expiry_handled:
            # the hold just ran out; creep only if the obstacle had us stopped
            self._expiry_handled = True
            if speed <= self.cfg.stop_eps:
                self._creep_until = now + self.cfg.creep_time

        if self._creep_until is not None and now < self._creep_until:
            return ObstacleReport(None, False, held=False, creep_active=True,
                                  timestamp=now)
        self._creep_until = None
        return ObstacleReport(None, False, held=False, creep_active=False,
                              timestamp=now)
