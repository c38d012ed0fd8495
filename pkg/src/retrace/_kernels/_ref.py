"""Pure-numpy kernel implementations.

Same contracts as the compiled core in ``_core.pyx``; used as the fallback
when the extension is unavailable and as the parity reference in tests.
"""

from __future__ import annotations

import numpy as np

_T_MIN = 1e-6


def cast_rays(origin, dirs, plane_point, plane_normal, boxes, t_max):
    """Intersect rays with a ground plane and axis-aligned boxes.

    origin: (3,), dirs: (N, 3) unit vectors, boxes: (M, 6) rows of
    [xmin, ymin, zmin, xmax, ymax, zmax]. Returns (t, hit) where t[i] is the
    nearest hit distance (inf for a miss) and hit[i] identifies the surface:
    -1 miss, 0 ground, 1 + box row index otherwise.
    """
    origin = np.asarray(origin, dtype=np.float64)
    dirs = np.asarray(dirs, dtype=np.float64)
    n_rays = dirs.shape[0]
    best_t = np.full(n_rays, np.inf)
    best_hit = np.full(n_rays, -1, dtype=np.int32)

    normal = np.asarray(plane_normal, dtype=np.float64)
    denom = dirs @ normal
    numer = float(np.dot(np.asarray(plane_point) - origin, normal))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_plane = numer / denom
    ok = np.isfinite(t_plane) & (t_plane > _T_MIN) & (t_plane <= t_max)
    best_t[ok] = t_plane[ok]
    best_hit[ok] = 0

    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 6)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
    for i in range(boxes.shape[0]):
        lo = (boxes[i, :3] - origin) * inv
        hi = (boxes[i, 3:] - origin) * inv
        t_near = np.nanmax(np.minimum(lo, hi), axis=1)
        t_far = np.nanmin(np.maximum(lo, hi), axis=1)
        ok = (t_near <= t_far) & (t_near > _T_MIN) & (t_near <= t_max) \
            & (t_near < best_t)
        best_t[ok] = t_near[ok]
        best_hit[ok] = 1 + i
    return best_t, best_hit


def chain_labels(seed, x, z, tol):
    """Label an azimuth-ordered point chain as road (1) or obstacle (2).

    Adjacent points whose |dx| + |dz| exceeds ``tol`` break the chain; a
    contiguous run is road iff it contains at least one seed point, which is
    equivalent to propagating road labels outward from the seeds across
    in-tolerance links.
    """
    seed = np.asarray(seed, dtype=bool)
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    n = len(x)
    if n == 0:
        return np.zeros(0, dtype=np.uint8)
    breaks = (np.abs(np.diff(x)) + np.abs(np.diff(z))) > tol
    seg = np.concatenate(([0], np.cumsum(breaks)))
    seg_is_road = np.zeros(int(seg[-1]) + 1, dtype=bool)
    np.logical_or.at(seg_is_road, seg[seed], True)
    return np.where(seg_is_road[seg], 1, 2).astype(np.uint8)


def closest_index(xs, ys, px, py, lo, hi):
    """Index of the nearest point within [lo, hi]; ties go to the larger index."""
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    d2 = (xs[lo:hi + 1] - px) ** 2 + (ys[lo:hi + 1] - py) ** 2
    # argmin on the reversed slice returns the last minimum of the original
    return int(hi - np.argmin(d2[::-1]))


def corridor_min_blocking(ox, oy, px, py, ps, half_width):
    """Shortest along-path distance to a point inside the corridor.

    ox/oy are candidate obstacle positions, px/py/ps the corridor polyline
    samples with their along-path distances. A candidate blocks if its
    nearest polyline sample lies within ``half_width``. Returns inf when
    nothing blocks.
    """
    ox = np.asarray(ox, dtype=np.float64)
    oy = np.asarray(oy, dtype=np.float64)
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    ps = np.asarray(ps, dtype=np.float64)
    if len(ox) == 0 or len(px) == 0:
        return float("inf")
    d2 = (ox[:, None] - px[None, :]) ** 2 + (oy[:, None] - py[None, :]) ** 2
    nearest = np.argmin(d2, axis=1)
    dmin2 = d2[np.arange(len(ox)), nearest]
    inside = dmin2 <= half_width * half_width
    if not np.any(inside):
        return float("inf")
    return float(np.min(ps[nearest[inside]]))
