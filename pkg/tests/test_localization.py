"""Localization envelope, dead reckoning, and sub-map transition tests."""

import math

import numpy as np
import pytest

from retrace.localization import (LocalizationConfig, LocalizationEstimate,
                                  Localizer, LocMode, dead_reckon, envelope_ok,
                                  submap_transition)
from retrace.teachpath import TeachPath
from retrace.vehicle import (OdometryNoise, VehicleParams, VehicleState,
                             wheel_odometry)

PARAMS = VehicleParams()


def straight_path(length=200.0, spacing=0.5):
    n = int(length / spacing) + 1
    xs = np.arange(n) * spacing
    return TeachPath(xs, np.zeros(n), np.zeros(n), np.full(n, 5.0))


def state_at(x, y=0.0, heading=0.0, speed=5.0):
    return VehicleState(x=x, y=y, heading=heading, speed=speed,
                        steering_angle=0.0, timestamp=0.0)


def make_localizer(path, noiseless=True, seed=0, **cfg_kw):
    if noiseless:
        cfg_kw.setdefault("noise_xy_std", 0.0)
        cfg_kw.setdefault("noise_heading_std", 0.0)
    return Localizer(cfg=LocalizationConfig(**cfg_kw), params=PARAMS,
                     rng=np.random.default_rng(seed), path=path)


def odom_for(state, seed=0):
    return wheel_odometry(state, PARAMS, OdometryNoise(),
                          np.random.default_rng(seed))


def test_on_path_aligned_is_localized():
    path = straight_path()
    cfg = LocalizationConfig()
    assert envelope_ok(state_at(50.0), path, cfg)
    loc = make_localizer(path)
    est = loc.estimate_pose(state_at(50.0), odom_for(state_at(50.0)), 0.0, 0.05)
    assert est.mode == LocMode.LOCALIZED
    assert est.time_since_fix == 0.0


def test_lateral_error_beyond_2m_drops_fix():
    path = straight_path()
    cfg = LocalizationConfig()
    assert not envelope_ok(state_at(50.0, y=2.5), path, cfg)
    assert envelope_ok(state_at(50.0, y=1.99), path, cfg)
    assert envelope_ok(state_at(50.0, y=2.0), path, cfg)  # boundary inside


def test_heading_error_beyond_20deg_drops_fix():
    path = straight_path()
    cfg = LocalizationConfig()
    assert not envelope_ok(state_at(50.0, heading=math.radians(25.0)), path, cfg)
    assert envelope_ok(state_at(50.0, heading=math.radians(19.0)), path, cfg)


def test_mode_transitions_to_dead_reckoning():
    path = straight_path()
    loc = make_localizer(path)
    s = state_at(50.0)
    loc.estimate_pose(s, odom_for(s), 0.0, 0.05)
    off = state_at(52.0, y=2.5)
    est = loc.estimate_pose(off, odom_for(off), 0.05, 0.05)
    assert est.mode == LocMode.DEAD_RECKONING


def test_noiseless_dead_reckoning_tracks_truth():
    path = straight_path()
    loc = make_localizer(path, dropouts=((0.5, 2.5),))
    state = state_at(10.0, speed=5.0)
    dt = 0.05
    for k in range(40):  # 2.0 s; dropout covers [0.5, 2.5)
        t = k * dt
        est = loc.estimate_pose(state, odom_for(state), t, dt)
        if t < 0.45:
            assert est.mode == LocMode.LOCALIZED
        state = VehicleState(x=state.x + 5.0 * dt, y=0.0, heading=0.0,
                             speed=5.0, steering_angle=0.0, timestamp=t)
    assert est.mode == LocMode.DEAD_RECKONING
    # straight constant-speed reckoning is exact
    assert est.x == pytest.approx(state.x - 5.0 * dt, abs=1e-9)
    assert est.y == 0.0


def test_dropout_2s_goes_lost_and_absorbs():
    path = straight_path()
    loc = make_localizer(path, dropouts=((0.0, 2.0),))
    state = state_at(10.0, speed=0.0)
    est = None
    loc.estimate = LocalizationEstimate(10.0, 0.0, 0.0, LocMode.LOCALIZED,
                                        0.0, 0.0)
    for k in range(60):
        est = loc.estimate_pose(state, odom_for(state), k * 0.05, 0.05)
    assert est.mode == LocMode.LOST
    # absorbing even though the dropout is over and the pose is fine
    est = loc.estimate_pose(state, odom_for(state), 3.5, 0.05)
    assert est.mode == LocMode.LOST


def test_fix_regained_just_before_limit():
    path = straight_path()
    loc = make_localizer(path, dropouts=((0.0, 1.9),))
    state = state_at(10.0, speed=0.0)
    loc.estimate = LocalizationEstimate(10.0, 0.0, 0.0, LocMode.LOCALIZED,
                                        0.0, 0.0)
    modes = []
    for k in range(42):
        est = loc.estimate_pose(state, odom_for(state), k * 0.05, 0.05)
        modes.append(est.mode)
    assert LocMode.DEAD_RECKONING in modes
    assert LocMode.LOST not in modes
    assert modes[-1] == LocMode.LOCALIZED
    assert est.time_since_fix == 0.0


def test_dead_reckon_requires_dr_mode():
    est = LocalizationEstimate(0.0, 0.0, 0.0, LocMode.LOCALIZED, 0.0, 0.0)
    odom = odom_for(state_at(0.0))
    with pytest.raises(ValueError):
        dead_reckon(est, odom, PARAMS, 0.05, LocalizationConfig())


def test_localized_noise_is_seeded():
    path = straight_path()
    a = make_localizer(path, noiseless=False, seed=3)
    b = make_localizer(path, noiseless=False, seed=3)
    s = state_at(50.0)
    ea = a.estimate_pose(s, odom_for(s), 0.0, 0.05)
    eb = b.estimate_pose(s, odom_for(s), 0.0, 0.05)
    assert (ea.x, ea.y, ea.heading) == (eb.x, eb.y, eb.heading)
    assert ea.x != 50.0  # noise actually applied


def test_mode_is_pure_function_of_envelope():
    path = straight_path()
    cfg = LocalizationConfig()
    for y, heading, expect in [
        (0.0, 0.0, True),
        (2.0, 0.0, True),
        (2.01, 0.0, False),
        (0.0, math.radians(20.0) - 1e-9, True),
        (0.0, math.radians(20.1), False),
        (-2.01, 0.0, False),
        (0.0, -math.radians(20.1), False),
    ]:
        assert envelope_ok(state_at(50.0, y=y, heading=heading), path, cfg) \
            == expect


def test_submap_transition_plan():
    plan = submap_transition(0, 3, next_length=1700.0, load_rate_s_per_km=0.5)
    assert plan.stop_required
    assert plan.load_delay == pytest.approx(0.85)
    assert plan.next_submap == 1


def test_submap_transition_end_of_mission():
    plan = submap_transition(2, 3, next_length=None)
    assert plan.next_submap is None
    assert plan.load_delay == 0.0
