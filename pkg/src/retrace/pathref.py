"""Geometric queries against the teach path.

Closest point, along-path look-ahead (summed over path segments, never the
straight-line chord), algebraic least-squares curve radius, and remaining
distance. All queries are read-only over an immutable path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .geometry import angle_diff
from .teachpath import PathPoint, TeachPath

RADIUS_CAP = 1e4  # fits beyond this count as straight
# windows whose sagitta never exceeds this are straight: the algebraic fit
# on noise-only deviations is biased toward absurdly small circles
DEFAULT_SAGITTA_FLOOR = 0.15
DEFAULT_SEARCH_WINDOW = 30.0


@dataclass(frozen=True)
class PathQueryResult:
    closest_index: int
    lateral_error: float  # signed, positive left of path
    heading_error: float
    remaining_distance: float


class CurveFit(NamedTuple):
    radius: float  # may be +inf
    degenerate: bool  # fewer than 3 points in the window


def closest_point(path: TeachPath, x: float, y: float, heading: float,
                  prev_index: int | None = None,
                  window: float = DEFAULT_SEARCH_WINDOW) -> PathQueryResult:
    """Closest path point to the pose, with signed lateral error.

    The first query scans the whole path; afterwards the search is limited
    to ``window`` meters of arclength around ``prev_index`` so localization
    jumps cannot snap to a far segment of a self-crossing route. Distance
    ties resolve toward the larger index (forward progress).
    """
    n = len(path)
    if prev_index is None:
        lo, hi = 0, n - 1
    else:
        s0 = path.s[prev_index]
        lo = int(np.searchsorted(path.s, s0 - window, side="left"))
        hi = int(np.searchsorted(path.s, s0 + window, side="right")) - 1
        lo, hi = max(lo, 0), min(hi, n - 1)
    k = _kernels.closest_index(path.xs, path.ys, x, y, lo, hi)

    tx, ty = math.cos(path.headings[k]), math.sin(path.headings[k])
    dx, dy = x - path.xs[k], y - path.ys[k]
    lateral = tx * dy - ty * dx
    return PathQueryResult(
        closest_index=k,
        lateral_error=float(lateral),
        heading_error=angle_diff(heading, float(path.headings[k])),
        remaining_distance=float(path.s[-1] - path.s[k]),
    )


def lookahead_point(path: TeachPath, start_index: int, l_d: float) -> PathPoint:
    """First point at least ``l_d`` meters ahead along the path.

    Distance is accumulated over path segments from ``start_index``, so on a
    hairpin the returned point is the one down the path, not the point a
    short straight-line chord away. Clamps to the last point.
    """
    if l_d <= 0.0:
        raise ValueError("l_d must be > 0")
    return path.point(lookahead_index(path, start_index, l_d))


def lookahead_index(path: TeachPath, start_index: int, l_d: float) -> int:
    target = path.s[start_index] + l_d
    i = int(np.searchsorted(path.s, target, side="left"))
    return min(i, len(path) - 1)


def curve_radius(path: TeachPath, start_index: int, window: float,
                 sagitta_floor: float = DEFAULT_SAGITTA_FLOOR) -> CurveFit:
    """Radius of the algebraic least-squares circle over the upcoming window.

    Fits the Kasa circle to the points within ``window`` meters along-path
    ahead of ``start_index``. Collinear or near-straight geometry reports
    +inf; fewer than 3 points reports +inf with the degenerate flag set.
    A window counts as straight when no point deviates from the chord by
    more than ``sagitta_floor``: recorded paths carry estimate noise, and
    fitting a circle to noise-only deviations yields small bogus radii.
    """
    if window <= 0.0:
        raise ValueError("window must be > 0")
    end = int(np.searchsorted(path.s, path.s[start_index] + window, side="right"))
    xs = path.xs[start_index:end]
    ys = path.ys[start_index:end]
    if len(xs) < 3:
        return CurveFit(math.inf, True)
    cx, cy = xs[-1] - xs[0], ys[-1] - ys[0]
    chord = math.hypot(cx, cy)
    if chord > 1e-9:
        sagitta = np.abs(cx * (ys - ys[0]) - cy * (xs - xs[0])) / chord
        if float(sagitta.max()) <= sagitta_floor:
            return CurveFit(math.inf, False)
    radius = kasa_circle_fit(xs, ys)[2]
    if not math.isfinite(radius) or radius > RADIUS_CAP:
        return CurveFit(math.inf, False)
    return CurveFit(radius, False)


def kasa_circle_fit(xs, ys) -> tuple[float, float, float]:
    """Closed-form algebraic circle fit; returns (xc, yc, radius).

    Centers the data and solves the 2x2 normal equations. A singular system
    (collinear points) yields an infinite radius.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    xm, ym = xs.mean(), ys.mean()
    u, v = xs - xm, ys - ym
    suu, svv, suv = (u * u).sum(), (v * v).sum(), (u * v).sum()
    suuu, svvv = (u * u * u).sum(), (v * v * v).sum()
    suvv, svvu = (u * v * v).sum(), (v * u * u).sum()
    det = suu * svv - suv * suv
    scale = suu + svv
    if det <= 1e-12 * scale * scale:
        return math.inf, math.inf, math.inf
    rhs_u = 0.5 * (suuu + suvv)
    rhs_v = 0.5 * (svvv + svvu)
    uc = (svv * rhs_u - suv * rhs_v) / det
    vc = (suu * rhs_v - suv * rhs_u) / det
    radius = math.sqrt(uc * uc + vc * vc + scale / len(xs))
    return float(xm + uc), float(ym + vc), float(radius)


def remaining_distance(path: TeachPath, index: int) -> float:
    if not 0 <= index < len(path):
        raise ValueError(f"index {index} out of range")
    return float(path.s[-1] - path.s[index])


class PathCursor:
    """Stateful closest-point helper owning the previous-index hint."""

    def __init__(self, path: TeachPath, window: float = DEFAULT_SEARCH_WINDOW):
        self.path = path
        self.window = window
        self._prev: int | None = None

    def query(self, x: float, y: float, heading: float) -> PathQueryResult:
        q = closest_point(self.path, x, y, heading,
                          prev_index=self._prev, window=self.window)
        self._prev = q.closest_index
        return q

    def reset(self) -> None:
        self._prev = None
