"""Pure Pursuit steering tests, including the closed-loop convergence check."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from retrace.pathref import PathCursor
from retrace.steering import (SteeringConfig, SteeringController,
                              lookahead_distance_steer, pure_pursuit_angle)
from retrace.teachpath import TeachPath
from retrace.vehicle import ActuatorCommand, VehicleParams, VehicleState, step_dynamics

PARAMS = VehicleParams()


def straight_path(length=120.0, spacing=0.5):
    n = int(length / spacing) + 1
    xs = np.arange(n) * spacing
    return TeachPath(xs, np.zeros(n), np.zeros(n), np.full(n, 5.0))


def circle_path(radius, spacing=0.5, fraction=1.0):
    n = int(2.0 * math.pi * radius * fraction / spacing)
    theta = np.arange(n + 1) * spacing / radius
    return TeachPath(radius * np.sin(theta), radius * (1.0 - np.cos(theta)),
                     theta, np.full(n + 1, 5.0))


def test_lookahead_clamps():
    cfg = SteeringConfig(k1_lad_s=0.5, k2_lad_s=2.0)
    assert lookahead_distance_steer(1.0, cfg) == 3.5     # raw 2.5 under floor
    assert lookahead_distance_steer(30.0, cfg) == 13.0   # raw 17 over cap
    assert lookahead_distance_steer(10.0, cfg) == pytest.approx(7.0)


def test_pure_pursuit_formula_value():
    delta = pure_pursuit_angle(0.1, 5.0, 1.9, 0.8)
    assert delta == pytest.approx(
        0.8 * math.atan(2.0 * 1.9 * math.sin(0.1) / 5.0), rel=1e-12)
    assert delta == pytest.approx(0.0606, abs=1e-4)


def test_pure_pursuit_zero_alpha():
    assert pure_pursuit_angle(0.0, 5.0, 1.9, 0.8) == 0.0


@given(st.floats(-1.4, 1.4), st.floats(0.5, 30.0))
def test_pure_pursuit_odd_symmetry(alpha, l_d):
    d1 = pure_pursuit_angle(alpha, l_d, 1.9, 0.8)
    d2 = pure_pursuit_angle(-alpha, l_d, 1.9, 0.8)
    assert d1 == pytest.approx(-d2, abs=1e-15)
    if alpha != 0.0:
        assert math.copysign(1.0, d1) == math.copysign(1.0, math.sin(alpha))


@given(st.floats(-1.4, 1.4), st.floats(0.5, 30.0), st.floats(0.05, 1.0))
def test_gain_scales_linearly(alpha, l_d, gain):
    base = pure_pursuit_angle(alpha, l_d, 1.9, 1.0)
    assert pure_pursuit_angle(alpha, l_d, 1.9, gain) == pytest.approx(
        gain * base, rel=1e-12, abs=1e-15)


def command_on(path, x, y, heading, v):
    ctl = SteeringController(SteeringConfig(), PARAMS)
    q = PathCursor(path).query(x, y, heading)
    return ctl.command(x, y, heading, v, path, q)


def test_straight_on_path_zero_command():
    path = straight_path()
    assert command_on(path, 10.0, 0.0, 0.0, 5.0) == pytest.approx(0.0, abs=1e-12)


def test_circle_matches_chord_geometry():
    # on-path on a circle the chord relation collapses to atan(L / R)
    radius = 30.0
    path = circle_path(radius)
    k = 40
    x, y, h = float(path.xs[k]), float(path.ys[k]), float(path.headings[k])
    delta = command_on(path, x, y, h, 5.0)
    assert delta == pytest.approx(0.8 * math.atan(PARAMS.wheelbase / radius),
                                  abs=1e-6)


def test_offset_left_steers_right():
    path = straight_path()
    delta = command_on(path, 10.0, 1.0, 0.0, 3.0)
    assert delta < 0.0


def test_command_always_clamped():
    path = circle_path(8.0, fraction=0.5)
    ctl = SteeringController(SteeringConfig(), PARAMS)
    cursor = PathCursor(path)
    rng = np.random.default_rng(5)
    for _ in range(200):
        x = rng.uniform(-5.0, 20.0)
        y = rng.uniform(-5.0, 20.0)
        h = rng.uniform(-math.pi, math.pi)
        q = cursor.query(x, y, h)
        delta = ctl.command(x, y, h, rng.uniform(0.0, 12.0), path, q)
        assert abs(delta) <= PARAMS.max_steering + 1e-12


def test_mirror_symmetry():
    path = circle_path(25.0, fraction=0.3)
    mirrored = TeachPath(path.xs, -path.ys, -path.headings, path.v_teach)
    d1 = command_on(path, 4.0, 1.0, 0.3, 5.0)
    d2 = command_on(mirrored, 4.0, -1.0, -0.3, 5.0)
    assert d2 == pytest.approx(-d1, rel=1e-9)


def test_holds_last_command_at_path_end():
    path = straight_path(length=20.0)
    ctl = SteeringController(SteeringConfig(), PARAMS)
    cursor = PathCursor(path)
    q = cursor.query(10.0, 0.5, 0.0)
    mid = ctl.command(10.0, 0.5, 0.0, 3.0, path, q)
    q_end = cursor.query(18.0, 0.5, 0.0)  # within lad_min of the end
    assert ctl.command(18.0, 0.5, 0.0, 3.0, path, q_end) == mid


def test_closed_loop_convergence_from_offset():
    """1 m offset at 3 m/s settles below 5 cm within 30 m and stays there."""
    path = straight_path(length=150.0)
    ctl = SteeringController(SteeringConfig(), PARAMS)
    cursor = PathCursor(path)
    state = VehicleState(x=0.0, y=1.0, heading=0.0, speed=3.0,
                         steering_angle=0.0, timestamp=0.0)
    worst_after_30m = 0.0
    worst_overall = 0.0
    while state.x < 120.0:
        q = cursor.query(state.x, state.y, state.heading)
        delta = ctl.command(state.x, state.y, state.heading, state.speed,
                            path, q)
        state = step_dynamics(state, ActuatorCommand(delta, 3.0), PARAMS, 0.005)
        worst_overall = max(worst_overall, abs(state.y))
        if state.x > 30.0:
            worst_after_30m = max(worst_after_30m, abs(state.y))
    assert worst_after_30m < 0.05
    assert worst_overall <= 1.05  # no divergence / overshoot blow-up


def test_config_validation():
    with pytest.raises(ValueError):
        SteeringConfig(lad_min=5.0, lad_max=3.0)
    with pytest.raises(ValueError):
        SteeringConfig(pursuit_gain=0.0)
