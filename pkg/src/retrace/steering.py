"""Pure Pursuit steering with a velocity-scaled, clamped look-ahead.

The steering law is the geometric bicycle chord relation scaled by a
pursuit gain below one, which softens the response; the look-ahead distance
grows linearly with speed between fixed bounds so the controller neither
oscillates at crawl speeds nor cuts curves at the top of the range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import clamp, world_to_frame
from .pathref import PathQueryResult, lookahead_index
from .teachpath import TeachPath
from .vehicle import VehicleParams


@dataclass(frozen=True)
class SteeringConfig:
    k1_lad_s: float = 0.45  # seconds; dynamic look-ahead gain
    k2_lad_s: float = 2.0   # meters; static look-ahead offset
    lad_min: float = 3.5
    lad_max: float = 13.0
    pursuit_gain: float = 0.8

    def __post_init__(self):
        if self.lad_min > self.lad_max:
            raise ValueError("lad_min must be <= lad_max")
        if min(self.k1_lad_s, self.k2_lad_s, self.lad_min) < 0.0:
            raise ValueError("look-ahead parameters must be >= 0")
        if not 0.0 < self.pursuit_gain <= 1.0:
            raise ValueError("pursuit_gain must lie in (0, 1]")


def lookahead_distance_steer(v_abs: float, cfg: SteeringConfig) -> float:
    """Velocity-proportional look-ahead, clamped to [lad_min, lad_max]."""
    if v_abs < 0.0:
        raise ValueError("v_abs must be >= 0")
    return clamp(cfg.k2_lad_s + cfg.k1_lad_s * v_abs, cfg.lad_min, cfg.lad_max)


def pure_pursuit_angle(alpha: float, l_d: float, wheelbase: float,
                       gain: float) -> float:
    """Steering angle for a target at bearing ``alpha`` and distance ``l_d``."""
    if l_d <= 0.0 or wheelbase <= 0.0:
        raise ValueError("l_d and wheelbase must be > 0")
    return gain * math.atan(2.0 * wheelbase * math.sin(alpha) / l_d)


class SteeringController:
    """Full steering pipeline from pose estimate to steering reference.

    closest point -> look-ahead distance -> along-path target -> vehicle
    frame -> chord angle -> clamped command. Holds the previous command when
    the path ends inside the minimum look-ahead so the velocity controller
    can bring the vehicle to rest without the geometry degenerating.
    """

    def __init__(self, cfg: SteeringConfig, params: VehicleParams):
        self.cfg = cfg
        self.params = params
        self._last = 0.0

    def command(self, est_x: float, est_y: float, est_heading: float,
                v_abs: float, path: TeachPath, query: PathQueryResult) -> float:
        l_d = lookahead_distance_steer(v_abs, self.cfg)
        target_i = lookahead_index(path, query.closest_index, l_d)
        at_end = target_i == len(path) - 1 \
            and query.remaining_distance <= self.cfg.lad_min
        if at_end:
            return self._last

        lx, ly = world_to_frame(float(path.xs[target_i]), float(path.ys[target_i]),
                                est_x, est_y, est_heading)
        dist = math.hypot(lx, ly)
        if dist < 1e-9:
            return self._last
        alpha = math.atan2(ly, lx)
        delta = pure_pursuit_angle(alpha, dist, self.params.wheelbase,
                                   self.cfg.pursuit_gain)
        delta = clamp(delta, -self.params.max_steering, self.params.max_steering)
        self._last = delta
        return delta
