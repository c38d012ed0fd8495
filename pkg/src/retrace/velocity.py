"""Reference-velocity planning.

The planner takes the Coulomb-friction cornering limit over the fitted
curve radius ahead, bounds it by the teach velocity plus a user freedom and
by an absolute user maximum, then scales the result by four multiplicative
penalization factors (obstacle clearance, lateral error, distance to the
path end, shutdown ramp), any of which can pull it to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geometry import clamp

G_EARTH = 9.81


@dataclass(frozen=True)
class VelocityConfig:
    mu_fric: float = 0.8
    g_earth: float = G_EARTH
    v_freedom: float = 1.0
    max_abs_vel: float = 35.0 / 3.6
    k1_lad_v: float = 0.8   # seconds
    k2_lad_v: float = 4.0   # meters
    lad_v_min: float = 3.5
    lad_v_max: float = 40.0

    def __post_init__(self):
        if not 0.0 < self.mu_fric <= 1.5:
            raise ValueError("mu_fric must lie in (0, 1.5]")
        for name in ("g_earth", "v_freedom", "max_abs_vel",
                     "k1_lad_v", "k2_lad_v", "lad_v_min", "lad_v_max"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")


def physical_velocity(mu: float, g: float, radius: float) -> float:
    """Coulomb-friction cornering speed sqrt(mu * g * R); inf on a straight."""
    if radius <= 0.0:
        raise ValueError("radius must be > 0")
    if math.isinf(radius):
        return math.inf
    return math.sqrt(mu * g * radius)


def lookahead_distance_vel(v_abs: float, cfg: VelocityConfig) -> float:
    """Region-of-interest length for the curve fit, linear in speed.

    Clamped to [lad_v_min, lad_v_max]: an unclamped window at high speed
    would outrun the synthetic sensing/path horizon.
    """
    if v_abs < 0.0:
        raise ValueError("v_abs must be >= 0")
    return clamp(cfg.k2_lad_v + cfg.k1_lad_v * v_abs, cfg.lad_v_min, cfg.lad_v_max)


def reference_velocity(v_phys: float, v_teach: float, cfg: VelocityConfig) -> float:
    """Three-way minimum of the physical, teach-bound, and user limits."""
    if v_phys < 0.0 or v_teach < 0.0:
        raise ValueError("velocities must be >= 0")
    return min(v_phys, v_teach + cfg.v_freedom, cfg.max_abs_vel)


class PiecewiseMap:
    """Monotone piecewise-linear map with clamped ends, range within [0, 1]."""

    def __init__(self, points, increasing: bool):
        pts = [(float(x), float(y)) for x, y in points]
        if len(pts) < 2:
            raise ValueError("need at least two breakpoints")
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoint x values must be strictly increasing")
        if any(not 0.0 <= y <= 1.0 for y in ys):
            raise ValueError("factors must lie in [0, 1]")
        steps = [b - a for a, b in zip(ys, ys[1:])]
        if increasing and any(s < 0 for s in steps):
            raise ValueError("map must be non-decreasing")
        if not increasing and any(s > 0 for s in steps):
            raise ValueError("map must be non-increasing")
        self._xs = np.array(xs)
        self._ys = np.array(ys)
        self.points = tuple(pts)

    def __call__(self, x: float) -> float:
        if math.isinf(x):
            return float(self._ys[-1]) if x > 0 else float(self._ys[0])
        return float(np.interp(x, self._xs, self._ys))


def _default_obstacle() -> PiecewiseMap:
    # zero through a 3 m standoff beyond the critical limit, then a 15 m
    # ramp: without the standoff the commanded speed stays positive all the
    # way to contact instead of stopping short of the obstacle
    return PiecewiseMap([(3.0, 0.0), (18.0, 1.0)], increasing=True)


def _default_lateral() -> PiecewiseMap:
    return PiecewiseMap([(0.3, 1.0), (2.0, 0.0)], increasing=False)


def _default_path_end() -> PiecewiseMap:
    return PiecewiseMap([(0.0, 0.0), (10.0, 1.0)], increasing=True)


def _default_shutdown() -> PiecewiseMap:
    return PiecewiseMap([(0.0, 1.0), (3.0, 0.0)], increasing=False)


@dataclass(frozen=True)
class PenalizationConfig:
    """The four velocity penalization factors as breakpoint maps.

    ``obstacle`` is evaluated on the clearance beyond the critical distance
    (blocking distance minus the speed-dependent critical limit), so the
    factor is pinned to zero anywhere inside the critical interval.
    """

    obstacle: PiecewiseMap = field(default_factory=_default_obstacle)
    lateral: PiecewiseMap = field(default_factory=_default_lateral)
    path_end: PiecewiseMap = field(default_factory=_default_path_end)
    shutdown: PiecewiseMap = field(default_factory=_default_shutdown)


class PenalizedVelocity(NamedTuple):
    velocity: float
    f_obstacle: float
    f_lateral: float
    f_path_end: float
    f_shutdown: float


def apply_penalizations(v_ref: float, obstacle_clearance: float | None,
                        lateral_err: float, remaining_dist: float,
                        shutdown_elapsed: float | None,
                        pcfg: PenalizationConfig) -> PenalizedVelocity:
    """Scale ``v_ref`` by the four factors; each lies in [0, 1].

    ``obstacle_clearance`` is None when nothing blocks the path and
    ``shutdown_elapsed`` is None while no stop was requested; both default
    to a factor of one.
    """
    if v_ref < 0.0:
        raise ValueError("v_ref must be >= 0")
    f_obst = 1.0 if obstacle_clearance is None else pcfg.obstacle(obstacle_clearance)
    f_lat = pcfg.lateral(abs(lateral_err))
    f_end = pcfg.path_end(remaining_dist)
    f_stop = 1.0 if shutdown_elapsed is None else pcfg.shutdown(shutdown_elapsed)
    return PenalizedVelocity(v_ref * f_obst * f_lat * f_end * f_stop,
                             f_obst, f_lat, f_end, f_stop)
