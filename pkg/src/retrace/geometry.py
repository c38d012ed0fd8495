"""Planar geometry helpers shared across the simulator."""

from __future__ import annotations

import math

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return math.pi - (math.pi - a) % TWO_PI


def angle_diff(a: float, b: float) -> float:
    """Shortest signed difference a - b."""
    return wrap_angle(a - b)


def clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def world_to_frame(px, py, fx: float, fy: float, fheading: float):
    """Express world point(s) (px, py) in the frame at (fx, fy, fheading).

    Accepts scalars or numpy arrays for px/py.
    """
    c, s = math.cos(fheading), math.sin(fheading)
    dx, dy = px - fx, py - fy
    return c * dx + s * dy, -s * dx + c * dy


def frame_to_world(lx, ly, fx: float, fy: float, fheading: float):
    """Inverse of :func:`world_to_frame`."""
    c, s = math.cos(fheading), math.sin(fheading)
    return fx + c * lx - s * ly, fy + s * lx + c * ly
