# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the simulator's hot loops.

Contracts match ``_ref.py``; the reference implementation is the authority
on semantics and the parity tests compare the two.
"""

import numpy as np

from libc.math cimport INFINITY, fabs, isfinite

DEF T_MIN = 1e-6


def cast_rays(origin, dirs, plane_point, plane_normal, boxes, double t_max):
    cdef double[::1] o = np.ascontiguousarray(origin, dtype=np.float64)
    cdef double[:, ::1] d = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef double[::1] pp = np.ascontiguousarray(plane_point, dtype=np.float64)
    cdef double[::1] pn = np.ascontiguousarray(plane_normal, dtype=np.float64)
    cdef double[:, ::1] bx = np.ascontiguousarray(
        np.asarray(boxes, dtype=np.float64).reshape(-1, 6))
    cdef Py_ssize_t n = d.shape[0], m = bx.shape[0], i, j, a
    t_out = np.full(n, np.inf)
    hit_out = np.full(n, -1, dtype=np.int32)
    cdef double[::1] t = t_out
    cdef int[::1] hit = hit_out
    cdef double numer = (pp[0] - o[0]) * pn[0] + (pp[1] - o[1]) * pn[1] \
        + (pp[2] - o[2]) * pn[2]
    cdef double denom, tp, t_near, t_far, t1, t2, dd, lo, hi, tmp

    for i in range(n):
        denom = d[i, 0] * pn[0] + d[i, 1] * pn[1] + d[i, 2] * pn[2]
        if denom != 0.0:
            tp = numer / denom
            if isfinite(tp) and tp > T_MIN and tp <= t_max:
                t[i] = tp
                hit[i] = 0
        for j in range(m):
            t_near = -INFINITY
            t_far = INFINITY
            for a in range(3):
                dd = d[i, a]
                lo = bx[j, a]
                hi = bx[j, a + 3]
                if dd != 0.0:
                    t1 = (lo - o[a]) / dd
                    t2 = (hi - o[a]) / dd
                    if t1 > t2:
                        tmp = t1
                        t1 = t2
                        t2 = tmp
                    if t1 > t_near:
                        t_near = t1
                    if t2 < t_far:
                        t_far = t2
                elif o[a] < lo or o[a] > hi:
                    t_near = INFINITY
                    t_far = -INFINITY
                    break
            if t_near <= t_far and t_near > T_MIN and t_near <= t_max \
                    and t_near < t[i]:
                t[i] = t_near
                hit[i] = 1 + <int>j
    return t_out, hit_out


def chain_labels(seed, x, z, double tol):
    cdef unsigned char[::1] sd = np.ascontiguousarray(seed, dtype=np.uint8)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i, k, seg_start = 0
    out = np.empty(n, dtype=np.uint8)
    if n == 0:
        return out
    cdef unsigned char[::1] lab = out
    cdef bint has_seed = sd[0] != 0
    cdef unsigned char value
    for i in range(1, n):
        if fabs(xv[i] - xv[i - 1]) + fabs(zv[i] - zv[i - 1]) > tol:
            value = 1 if has_seed else 2
            for k in range(seg_start, i):
                lab[k] = value
            seg_start = i
            has_seed = sd[i] != 0
        elif sd[i] != 0:
            has_seed = True
    value = 1 if has_seed else 2
    for k in range(seg_start, n):
        lab[k] = value
    return out


def closest_index(xs, ys, double px, double py, Py_ssize_t lo, Py_ssize_t hi):
    cdef double[::1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t i, best = lo
    cdef double dx, dy, d2, best_d2 = INFINITY
    for i in range(lo, hi + 1):
        dx = x[i] - px
        dy = y[i] - py
        d2 = dx * dx + dy * dy
        if d2 <= best_d2:  # ties resolve toward the larger index
            best_d2 = d2
            best = i
    return int(best)


def corridor_min_blocking(ox, oy, px, py, ps, double half_width):
    cdef double[::1] cx = np.ascontiguousarray(ox, dtype=np.float64)
    cdef double[::1] cy = np.ascontiguousarray(oy, dtype=np.float64)
    cdef double[::1] qx = np.ascontiguousarray(px, dtype=np.float64)
    cdef double[::1] qy = np.ascontiguousarray(py, dtype=np.float64)
    cdef double[::1] qs = np.ascontiguousarray(ps, dtype=np.float64)
    cdef Py_ssize_t nk = cx.shape[0], np_ = qx.shape[0], k, p, best_p
    cdef double hw2 = half_width * half_width
    cdef double best = INFINITY, dx, dy, d2, dmin
    if nk == 0 or np_ == 0:
        return float("inf")
    for k in range(nk):
        dmin = INFINITY
        best_p = 0
        for p in range(np_):
            dx = cx[k] - qx[p]
            dy = cy[k] - qy[p]
            d2 = dx * dx + dy * dy
            if d2 < dmin:
                dmin = d2
                best_p = p
        if dmin <= hw2 and qs[best_p] < best:
            best = qs[best_p]
    return float(best)
