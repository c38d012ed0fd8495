"""Simulated multi-ring LiDAR and the ring-based road/obstacle classifier.

Each beam elevation sweeps a circle on flat ground (an ellipse on a grade),
so per ring the planar ranges cluster in a narrow interval. The classifier
finds that interval from a range histogram, seeds road labels inside it,
and spreads them between azimuth-adjacent points whose x/z step stays
within a tolerance; everything else, plus anything on the horizontal ring,
is an obstacle. Obstacle points are projected to a vehicle-frame occupancy
grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import _kernels


def _vlp16_elevations() -> tuple[float, ...]:
    return tuple(math.radians(d) for d in range(-15, 16, 2))


class PointLabel(IntEnum):
    IGNORED = 0
    ROAD = 1
    OBSTACLE = 2


@dataclass(frozen=True)
class LidarConfig:
    ring_elevations: tuple[float, ...] = field(default_factory=_vlp16_elevations)
    azimuth_step: float = math.radians(0.4)
    range_max: float = 60.0
    mount_height: float = 1.8
    mount_forward: float = 1.0  # forward of the rear axle
    range_noise_std: float = 0.01
    scan_rate_hz: float = 10.0
    # classifier knobs
    wedge_half_angle: float = math.radians(45.0)
    histogram_bin: float = 0.25
    min_ring_points: int = 20
    adjacency_tol: float = 0.5
    max_road_grade: float = math.radians(4.0)  # slack for the ring prior

    def __post_init__(self):
        if list(self.ring_elevations) != sorted(self.ring_elevations):
            raise ValueError("ring elevations must be sorted ascending")
        if self.azimuth_step <= 0.0:
            raise ValueError("azimuth_step must be > 0")


@dataclass
class RingPoints:
    """Returns of one beam elevation, sorted by azimuth, sensor frame.

    ``source`` is simulation ground truth (0 ground, 1 + box index) kept for
    oracle tests and never read by the classifier.
    """

    elevation: float
    azimuth: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    source: np.ndarray

    def __len__(self) -> int:
        return len(self.azimuth)

    @property
    def planar_range(self) -> np.ndarray:
        return np.hypot(self.x, self.y)


@dataclass
class RingScan:
    rings: list[RingPoints]
    timestamp: float

    def total_points(self) -> int:
        return sum(len(r) for r in self.rings)


@dataclass
class LabeledScan:
    """Per-point labels over the same points as the source scan."""

    scan: RingScan
    labels: list[np.ndarray]  # uint8 PointLabel per ring

    def obstacle_xy(self, mount_forward: float) -> tuple[np.ndarray, np.ndarray]:
        """Vehicle-frame x/y of all OBSTACLE points."""
        xs, ys = [], []
        for ring, lab in zip(self.scan.rings, self.labels):
            m = lab == PointLabel.OBSTACLE
            xs.append(ring.x[m] + mount_forward)
            ys.append(ring.y[m])
        if not xs:
            return np.zeros(0), np.zeros(0)
        return np.concatenate(xs), np.concatenate(ys)


_DIR_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _ray_table(cfg: LidarConfig) -> tuple[np.ndarray, np.ndarray]:
    """(azimuths (A,), sensor-frame dirs (R*A, 3)) for the scan pattern."""
    key = (cfg.ring_elevations, cfg.azimuth_step)
    cached = _DIR_CACHE.get(key)
    if cached is not None:
        return cached
    n_az = int(round(2.0 * math.pi / cfg.azimuth_step))
    az = -math.pi + (np.arange(n_az) + 1) * (2.0 * math.pi / n_az)  # (-pi, pi]
    elevations = np.array(cfg.ring_elevations)
    cos_e = np.cos(elevations)[:, None]
    sin_e = np.sin(elevations)[:, None]
    dirs = np.empty((len(elevations), n_az, 3))
    dirs[:, :, 0] = cos_e * np.cos(az)[None, :]
    dirs[:, :, 1] = cos_e * np.sin(az)[None, :]
    dirs[:, :, 2] = np.broadcast_to(sin_e, (len(elevations), n_az))
    out = (az, dirs.reshape(-1, 3))
    _DIR_CACHE[key] = out
    return out


def simulate_scan(x: float, y: float, heading: float, boxes: np.ndarray,
                  cfg: LidarConfig, rng: np.random.Generator, timestamp: float,
                  grade: float = 0.0) -> RingScan:
    """Ray-cast one full revolution against the ground plane and boxes.

    The ground plane passes through the vehicle's ground contact and is
    pitched by ``grade`` about the vehicle's lateral axis (uphill ahead for
    positive grade), which turns the flat-ground ring circles into
    ellipses. Rays that hit nothing are dropped. Gaussian range noise is
    applied along the ray; a fixed seed gives a fixed scan.
    """
    az, dirs_sensor = _ray_table(cfg)
    n_rings = len(cfg.ring_elevations)
    n_az = len(az)

    c, s = math.cos(heading), math.sin(heading)
    dirs_world = np.empty_like(dirs_sensor)
    dirs_world[:, 0] = c * dirs_sensor[:, 0] - s * dirs_sensor[:, 1]
    dirs_world[:, 1] = s * dirs_sensor[:, 0] + c * dirs_sensor[:, 1]
    dirs_world[:, 2] = dirs_sensor[:, 2]

    origin = np.array([x + c * cfg.mount_forward,
                       y + s * cfg.mount_forward,
                       cfg.mount_height])
    plane_point = np.array([x, y, 0.0])
    sg, cg = math.sin(grade), math.cos(grade)
    plane_normal = np.array([-sg * c, -sg * s, cg])

    t, hit = _kernels.cast_rays(origin, dirs_world, plane_point, plane_normal,
                                boxes, cfg.range_max)
    if cfg.range_noise_std > 0.0:
        t = t + cfg.range_noise_std * rng.standard_normal(len(t))

    t = t.reshape(n_rings, n_az)
    hit = hit.reshape(n_rings, n_az)
    dirs_sensor = dirs_sensor.reshape(n_rings, n_az, 3)

    rings = []
    for r in range(n_rings):
        keep = hit[r] >= 0
        tr = t[r][keep]
        dr = dirs_sensor[r][keep]
        rings.append(RingPoints(
            elevation=cfg.ring_elevations[r],
            azimuth=az[keep],
            x=dr[:, 0] * tr,
            y=dr[:, 1] * tr,
            z=dr[:, 2] * tr,
            source=hit[r][keep].astype(np.int32),
        ))
    return RingScan(rings=rings, timestamp=timestamp)


def frontal_mask(ring: RingPoints, steering_angle: float,
                 cfg: LidarConfig) -> np.ndarray:
    """Points inside the forward wedge steered with the front wheels.

    The wedge spans +-wedge_half_angle around the current steering
    direction, measured as vehicle-frame azimuth, so only the road region
    ahead is analyzed.
    """
    az_vehicle = np.arctan2(ring.y, ring.x + cfg.mount_forward)
    diff = np.abs(np.arctan2(np.sin(az_vehicle - steering_angle),
                             np.cos(az_vehicle - steering_angle)))
    return diff <= cfg.wedge_half_angle


def frontal_filter(scan: RingScan, steering_angle: float,
                   cfg: LidarConfig) -> RingScan:
    """Filtered copy of the scan keeping only the frontal wedge."""
    rings = []
    for ring in scan.rings:
        m = frontal_mask(ring, steering_angle, cfg)
        rings.append(RingPoints(elevation=ring.elevation, azimuth=ring.azimuth[m],
                                x=ring.x[m], y=ring.y[m], z=ring.z[m],
                                source=ring.source[m]))
    return RingScan(rings=rings, timestamp=scan.timestamp)


def ring_ground_window(elevation: float,
                       cfg: LidarConfig) -> tuple[float, float] | None:
    """Planar distances where this ring can legitimately meet the road.

    A beam at the given elevation sweeps a circle on level ground and an
    ellipse on a grade; over grades within ``max_road_grade`` its ground
    returns stay inside this window. None means the beam cannot reach the
    road at all (horizontal and upward rings over admissible grades).
    """
    steepest = -elevation + cfg.max_road_grade
    if steepest <= 0.0:
        return None
    lo = cfg.mount_height / math.tan(steepest)
    if lo >= cfg.range_max:
        return None
    shallowest = -elevation - cfg.max_road_grade
    hi = cfg.range_max if shallowest <= 0.0 \
        else min(cfg.mount_height / math.tan(shallowest), cfg.range_max)
    return lo, hi


def road_distance(planar_ranges: np.ndarray, cfg: LidarConfig,
                  elevation: float | None = None) -> tuple[float, float] | None:
    """Modal planar-range interval of a ring, or None for a sparse ring.

    Histograms the ranges at ``histogram_bin`` width and returns the modal
    bin widened by one bin on each side; with no obstacle blocking the
    majority of the wedge this interval is where the road lies. When the
    beam elevation is given, the mode must fall inside the ring's ground
    window: a ring whose flat-ground circle lies beyond the sensor range
    sees nothing but obstacles, and its mode must not become "road".
    """
    if len(planar_ranges) < cfg.min_ring_points:
        return None
    bins = np.floor(planar_ranges / cfg.histogram_bin).astype(np.int64)
    values, counts = np.unique(bins, return_counts=True)
    mode = values[np.argmax(counts)]
    lo = float((mode - 1) * cfg.histogram_bin)
    hi = float((mode + 2) * cfg.histogram_bin)
    if elevation is not None:
        window = ring_ground_window(elevation, cfg)
        if window is None or hi < window[0] or lo > window[1]:
            return None
    return lo, hi


def classify(filtered: RingScan, intervals: list[tuple[float, float] | None],
             cfg: LidarConfig) -> list[np.ndarray]:
    """Label every retained point ROAD or OBSTACLE.

    Points inside their ring's road interval seed ROAD; labels spread to
    azimuth-adjacent neighbors while |dx| + |dz| stays within the adjacency
    tolerance (the y step is ignored: dropped beams leave azimuth gaps that
    would fake large lateral jumps). Runs never reached from a seed are
    obstacles, as is the entire horizontal (0 degree) ring.
    """
    labels = []
    for ring, interval in zip(filtered.rings, intervals):
        n = len(ring)
        if n == 0:
            labels.append(np.zeros(0, dtype=np.uint8))
            continue
        if abs(ring.elevation) < 1e-12:
            labels.append(np.full(n, PointLabel.OBSTACLE, dtype=np.uint8))
            continue
        if interval is None:
            seed = np.zeros(n, dtype=np.uint8)
        else:
            pr = ring.planar_range
            seed = ((pr >= interval[0]) & (pr <= interval[1])).astype(np.uint8)
        labels.append(_kernels.chain_labels(seed, ring.x, ring.z,
                                            cfg.adjacency_tol))
    return labels


def classify_scan(scan: RingScan, steering_angle: float,
                  cfg: LidarConfig) -> LabeledScan:
    """Full classification pipeline; out-of-wedge points stay IGNORED."""
    labels = []
    masks = []
    filtered_rings = []
    for ring in scan.rings:
        m = frontal_mask(ring, steering_angle, cfg)
        masks.append(m)
        filtered_rings.append(RingPoints(
            elevation=ring.elevation, azimuth=ring.azimuth[m], x=ring.x[m],
            y=ring.y[m], z=ring.z[m], source=ring.source[m]))
    filtered = RingScan(rings=filtered_rings, timestamp=scan.timestamp)
    intervals = [road_distance(r.planar_range, cfg, r.elevation)
                 for r in filtered.rings]
    wedge_labels = classify(filtered, intervals, cfg)
    for ring, m, wl in zip(scan.rings, masks, wedge_labels):
        full = np.full(len(ring), PointLabel.IGNORED, dtype=np.uint8)
        full[m] = wl
        labels.append(full)
    return LabeledScan(scan=scan, labels=labels)


@dataclass(frozen=True)
class GridConfig:
    resolution: float = 0.2
    x_min: float = -5.0
    x_max: float = 60.0
    y_min: float = -60.0
    y_max: float = 60.0

    @property
    def nx(self) -> int:
        return int(round((self.x_max - self.x_min) / self.resolution))

    @property
    def ny(self) -> int:
        return int(round((self.y_max - self.y_min) / self.resolution))


@dataclass
class OccupancyGrid:
    """Vehicle-frame obstacle cells tagged with the pose at scan time."""

    cfg: GridConfig
    cells: np.ndarray  # bool (nx, ny)
    pose_tag: tuple[float, float, float]
    timestamp: float

    def index_of(self, x, y):
        ix = np.floor((np.asarray(x) - self.cfg.x_min) / self.cfg.resolution)
        iy = np.floor((np.asarray(y) - self.cfg.y_min) / self.cfg.resolution)
        return ix.astype(np.int64), iy.astype(np.int64)

    @property
    def origin_cell(self) -> tuple[int, int]:
        ix, iy = self.index_of(0.0, 0.0)
        return int(ix), int(iy)

    def occupied_xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Vehicle-frame centers of occupied cells."""
        ix, iy = np.nonzero(self.cells)
        x = self.cfg.x_min + (ix + 0.5) * self.cfg.resolution
        y = self.cfg.y_min + (iy + 0.5) * self.cfg.resolution
        return x, y


def dump_labeled_scan(labeled: LabeledScan, path) -> None:
    """Write one scan as CSV rows ``ring,azimuth,x,y,z,label``."""
    from pathlib import Path

    lines = ["ring,azimuth,x,y,z,label"]
    for ri, (ring, lab) in enumerate(zip(labeled.scan.rings, labeled.labels)):
        for i in range(len(ring)):
            lines.append(f"{ri},{ring.azimuth[i]:.6f},{ring.x[i]:.4f},"
                         f"{ring.y[i]:.4f},{ring.z[i]:.4f},"
                         f"{PointLabel(lab[i]).name}")
    Path(path).write_text("\n".join(lines) + "\n")


def project_to_grid(labeled: LabeledScan, grid_cfg: GridConfig,
                    lidar_cfg: LidarConfig,
                    pose_tag: tuple[float, float, float]) -> OccupancyGrid:
    """Mark the grid cell under every OBSTACLE point; marking is idempotent."""
    cells = np.zeros((grid_cfg.nx, grid_cfg.ny), dtype=bool)
    x, y = labeled.obstacle_xy(lidar_cfg.mount_forward)
    if len(x):
        ix = np.floor((x - grid_cfg.x_min) / grid_cfg.resolution).astype(np.int64)
        iy = np.floor((y - grid_cfg.y_min) / grid_cfg.resolution).astype(np.int64)
        ok = (ix >= 0) & (ix < grid_cfg.nx) & (iy >= 0) & (iy < grid_cfg.ny)
        cells[ix[ok], iy[ok]] = True
    return OccupancyGrid(cfg=grid_cfg, cells=cells, pose_tag=pose_tag,
                         timestamp=labeled.scan.timestamp)
