"""Grid analyzer tests: danger zone, blocking distance, persistence."""

import math

import numpy as np
import pytest

from retrace.grid import (AnalyzerConfig, ObstaclePersistence, blocking_distance,
                          build_danger_zone, critical_limit, criticality,
                          danger_horizon)
from retrace.lidar import GridConfig, OccupancyGrid
from retrace.teachpath import TeachPath

CFG = AnalyzerConfig()


def straight_path(length=60.0, spacing=0.5):
    n = int(length / spacing) + 1
    xs = np.arange(n) * spacing
    return TeachPath(xs, np.zeros(n), np.zeros(n), np.full(n, 5.0))


def bend_path(radius=15.0):
    theta = np.arange(0.0, math.pi / 2, 0.5 / radius)
    xs = radius * np.sin(theta)
    ys = radius * (1.0 - np.cos(theta))
    return TeachPath(xs, ys, theta, np.full(len(theta), 5.0))


def empty_grid(pose=(0.0, 0.0, 0.0)):
    cfg = GridConfig()
    return OccupancyGrid(cfg=cfg, cells=np.zeros((cfg.nx, cfg.ny), bool),
                         pose_tag=pose, timestamp=0.0)


def grid_with_cells(points, pose=(0.0, 0.0, 0.0)):
    grid = empty_grid(pose)
    for x, y in points:
        ix, iy = grid.index_of(x, y)
        grid.cells[int(ix), int(iy)] = True
    return grid


def test_half_width_composition():
    grid = empty_grid()
    zone = build_danger_zone(straight_path(), 0, 20.0, tracking_error=0.0,
                             body_width=1.6, grid=grid, cfg=CFG)
    assert zone.half_width == pytest.approx(1.0)  # 0.8 + 0.2
    zone2 = build_danger_zone(straight_path(), 0, 20.0, tracking_error=0.5,
                              body_width=1.6, grid=grid, cfg=CFG)
    assert zone2.half_width == pytest.approx(1.5)  # + 1.0 * 0.5


def test_zone_follows_straight_corridor():
    grid = empty_grid()
    zone = build_danger_zone(straight_path(), 0, 20.0, 0.0, 1.6, grid, CFG)
    ix, iy = grid.index_of(10.0, 0.0)
    assert zone.mask[int(ix), int(iy)]
    ix, iy = grid.index_of(10.0, 2.5)  # outside half-width 1.0
    assert not zone.mask[int(ix), int(iy)]
    ix, iy = grid.index_of(30.0, 0.0)  # beyond the horizon
    assert not zone.mask[int(ix), int(iy)]


def test_zone_bends_with_path_not_chord():
    grid = empty_grid()
    path = bend_path(radius=15.0)
    zone = build_danger_zone(path, 0, 23.0, 0.0, 1.6, grid, CFG)
    # a point on the chord between path start and its 90-degree end,
    # far inside the curve, is not part of the corridor
    ix, iy = grid.index_of(7.5, 7.5)
    assert not zone.mask[int(ix), int(iy)]
    # while the mid-arc point is
    mid_x, mid_y = 15.0 * math.sin(math.pi / 4), 15.0 * (1 - math.cos(math.pi / 4))
    ix, iy = grid.index_of(mid_x, mid_y)
    assert zone.mask[int(ix), int(iy)]


def test_blocking_distance_empty_grid():
    grid = empty_grid()
    zone = build_danger_zone(straight_path(), 0, 20.0, 0.0, 1.6, grid, CFG)
    assert blocking_distance(grid, zone) is None


def test_blocking_distance_on_path():
    grid = grid_with_cells([(12.0, 0.0)])
    zone = build_danger_zone(straight_path(), 0, 20.0, 0.0, 1.6, grid, CFG)
    d = blocking_distance(grid, zone)
    assert d == pytest.approx(12.0, abs=0.35)


def test_blocking_ignores_lateral_outlier():
    grid = grid_with_cells([(12.0, 3.0)])
    zone = build_danger_zone(straight_path(), 0, 20.0, 0.0, 1.6, grid, CFG)
    assert blocking_distance(grid, zone) is None


def test_blocking_takes_nearest():
    grid = grid_with_cells([(8.0, 0.0), (14.0, 0.3)])
    zone = build_danger_zone(straight_path(), 0, 20.0, 0.0, 1.6, grid, CFG)
    assert blocking_distance(grid, zone) == pytest.approx(8.0, abs=0.35)


def test_blocking_soundness_against_cell_scan():
    """NONE only when no obstacle cell lies inside the corridor."""
    rng = np.random.default_rng(11)
    path = bend_path()
    for _ in range(25):
        pts = rng.uniform([-2.0, -5.0], [25.0, 15.0], size=(4, 2))
        grid = grid_with_cells([tuple(p) for p in pts])
        zone = build_danger_zone(path, 0, 20.0, 0.0, 1.6, grid, CFG)
        d = blocking_distance(grid, zone)
        # oracle: exhaustive scan over occupied cell centers
        ox, oy = grid.occupied_xy()
        hits = []
        for x, y in zip(ox, oy):
            d2 = (zone.sample_x - x) ** 2 + (zone.sample_y - y) ** 2
            j = int(np.argmin(d2))
            if math.sqrt(d2[j]) <= zone.half_width:
                hits.append(zone.sample_s[j])
        if d is None:
            assert not hits
        else:
            assert d == pytest.approx(min(hits), abs=1e-9)


def test_critical_limit_formula():
    v = 30.0 / 3.6
    assert critical_limit(v) == pytest.approx(9.0, rel=1e-9)


def test_criticality_interval():
    v30 = 30.0 / 3.6
    assert criticality(8.0, v30) is True
    assert criticality(10.0, v30) is False
    assert criticality(9.0, v30) is True      # closed upper end
    assert criticality(9.000001, v30) is False
    assert criticality(None, v30) is False
    assert criticality(5.0, 0.0) is False     # stationary: nothing critical


def test_persistence_holds_after_disappearance():
    p = ObstaclePersistence(CFG)
    r = p.update(10.0, 0.0, speed=5.0)
    assert (r.blocking_distance, r.held) == (10.0, False)
    for t in np.arange(0.1, 1.95, 0.1):
        r = p.update(None, float(t), speed=5.0)
        assert r.blocking_distance == 10.0
        assert r.held
    r = p.update(None, 2.05, speed=5.0)
    assert r.blocking_distance is None


def test_persistence_bridges_flicker():
    p = ObstaclePersistence(CFG)
    t = 0.0
    gaps = 0
    for frame in range(40):  # 10 Hz frames, alternating visibility
        raw = 12.0 if frame % 2 == 0 else None
        for _ in range(20):  # 200 Hz ticks per frame
            r = p.update(raw, t, speed=3.0)
            if r.blocking_distance is None:
                gaps += 1
            t += 0.005
    assert gaps == 0


def test_creep_after_post_stop_hold_expiry():
    p = ObstaclePersistence(CFG)
    p.update(6.0, 0.0, speed=2.0)
    # vehicle stops; the obstacle is gone from the scans
    t = 0.0
    creep_ticks = []
    for _ in range(1800):  # 9 s at 200 Hz
        t += 0.005
        r = p.update(None, t, speed=0.0)
        if r.creep_active:
            creep_ticks.append(t)
    assert creep_ticks  # creep happened
    assert creep_ticks[0] == pytest.approx(2.005, abs=0.01)
    assert creep_ticks[-1] - creep_ticks[0] == pytest.approx(3.0, abs=0.02)
    # exactly one phase: no creep after it ended
    assert all(b - a < 0.01 for a, b in zip(creep_ticks, creep_ticks[1:]))


def test_no_creep_when_moving():
    p = ObstaclePersistence(CFG)
    p.update(6.0, 0.0, speed=5.0)
    t, creeps = 0.0, 0
    for _ in range(1200):
        t += 0.005
        r = p.update(None, t, speed=5.0)
        creeps += int(r.creep_active)
    assert creeps == 0


def test_reappearance_cancels_creep():
    p = ObstaclePersistence(CFG)
    p.update(6.0, 0.0, speed=0.0)
    r = p.update(None, 2.1, speed=0.0)
    assert r.creep_active
    r = p.update(5.5, 2.3, speed=0.0)  # obstacle seen again
    assert (r.blocking_distance, r.creep_active) == (5.5, False)
    # and the hold restarts on the next disappearance
    r = p.update(None, 2.5, speed=0.0)
    assert r.held and r.blocking_distance == 5.5


def test_persistence_monotone_in_detections():
    """Extra detections never lengthen a NONE gap in the held stream."""
    rng = np.random.default_rng(7)
    base = [(6.0 if rng.random() < 0.3 else None) for _ in range(300)]
    extra = [d if d is not None else (6.0 if rng.random() < 0.3 else None)
             for d in base]

    def gaps(stream):
        p = ObstaclePersistence(CFG)
        return [p.update(raw, i * 0.05, speed=3.0).blocking_distance is None
                for i, raw in enumerate(stream)]

    for gap_base, gap_extra in zip(gaps(base), gaps(extra)):
        if gap_extra:
            assert gap_base  # a gap with extra detections implies one without


def test_danger_horizon():
    assert danger_horizon(6.0, 9.0, 6.0, 5.0) == pytest.approx(14.0)
    assert danger_horizon(12.0, 9.0, 6.0, 5.0) == pytest.approx(17.0)
