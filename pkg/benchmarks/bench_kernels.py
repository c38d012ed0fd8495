#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times each hot kernel on a scan-sized synthetic workload and, optionally,
a short end-to-end repeat run under both backends. Run from the repo root:

    python3 benchmarks/bench_kernels.py [--end-to-end]
"""

import argparse
import math
import os
import subprocess
import sys
import time

import numpy as np

from retrace._kernels import _ref

try:
    from retrace._kernels import _core
except ImportError:
    _core = None


def timeit(fn, *args, repeat=30):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def scan_workload():
    rng = np.random.default_rng(0)
    n_rings, n_az = 16, 900
    az = np.linspace(-math.pi, math.pi, n_az, endpoint=False)
    el = np.radians(np.arange(-15, 16, 2, dtype=float))
    dirs = np.empty((n_rings * n_az, 3))
    k = 0
    for e in el:
        dirs[k:k + n_az, 0] = math.cos(e) * np.cos(az)
        dirs[k:k + n_az, 1] = math.cos(e) * np.sin(az)
        dirs[k:k + n_az, 2] = math.sin(e)
        k += n_az
    origin = np.array([0.0, 0.0, 1.8])
    boxes = np.array([[10.0, -1.0, 0.0, 11.0, 1.0, 1.5],
                      [20.0, 2.0, 0.0, 21.5, 4.0, 1.0],
                      [15.0, -4.0, 0.0, 16.0, -3.0, 2.0]])
    plane_p = np.zeros(3)
    plane_n = np.array([0.0, 0.0, 1.0])
    rng.shuffle(dirs)  # avoid branch-prediction flattery
    return origin, dirs, plane_p, plane_n, boxes, 60.0


def chain_workload():
    rng = np.random.default_rng(1)
    n = 4000
    x = np.cumsum(rng.uniform(0.01, 0.05, n)) + 8.0
    z = np.full(n, -1.8) + rng.normal(0, 0.02, n)
    seed = (rng.random(n) < 0.6).astype(np.uint8)
    return seed, x, z, 0.5


def closest_workload():
    n = 4000
    xs = np.cumsum(np.full(n, 0.4))
    ys = np.sin(xs / 30.0) * 6.0
    return xs, ys, 612.3, 4.1, 0, n - 1


def corridor_workload():
    rng = np.random.default_rng(2)
    ox = rng.uniform(0, 30, 300)
    oy = rng.uniform(-8, 8, 300)
    px = np.linspace(0, 30, 160)
    py = np.sin(px / 8.0)
    ps = px.copy()
    return ox, oy, px, py, ps, 1.2


def bench_kernels():
    workloads = {
        "cast_rays (16x900 rays, 3 boxes)": scan_workload(),
        "chain_labels (4000 pts)": chain_workload(),
        "closest_index (4000 pts)": closest_workload(),
        "corridor_min_blocking (300x160)": corridor_workload(),
    }
    names = ["cast_rays", "chain_labels", "closest_index",
             "corridor_min_blocking"]
    print(f"{'kernel':<36} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for label, args in workloads.items():
        fn_name = label.split(" ")[0]
        assert fn_name in names
        t_ref = timeit(getattr(_ref, fn_name), *args)
        if _core is None:
            print(f"{label:<36} {t_ref * 1e3:9.3f}ms {'n/a':>10} {'-':>8}")
            continue
        t_core = timeit(getattr(_core, fn_name), *args)
        print(f"{label:<36} {t_ref * 1e3:9.3f}ms {t_core * 1e3:9.3f}ms "
              f"{t_ref / t_core:7.1f}x")


def bench_end_to_end():
    """Time a short repeat run per backend in fresh interpreters."""
    code = (
        "import time, json\n"
        "from retrace.scenario import parse_scenario\n"
        "from retrace.engine import run_teach, run_repeat\n"
        "scn = parse_scenario({'name': 'bench', 'seed': 3,\n"
        "    'road': {'kind': 's_curve', 'length': 200.0, 'amplitude': 5.0,\n"
        "             'wavelength': 80.0, 'width': 6.0},\n"
        "    'teach': {'speed': 6.0}})\n"
        "teach = run_teach(scn)\n"
        "t0 = time.perf_counter()\n"
        "rep = run_repeat(scn, teach.path)\n"
        "print(json.dumps({'wall_s': time.perf_counter() - t0,\n"
        "                  'status': rep.status}))\n"
    )
    print(f"\n{'end-to-end 200 m repeat':<36} {'wall':>10}")
    for label, force in (("compiled", "0"), ("pure-python", "1")):
        env = dict(os.environ, RETRACE_PURE_PYTHON=force)
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        import json as _json
        result = _json.loads(out.stdout.strip().splitlines()[-1])
        assert result["status"] == "completed"
        print(f"  {label:<34} {result['wall_s']:9.2f}s")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--end-to-end", action="store_true",
                        help="also time a short repeat run per backend")
    args = parser.parse_args()
    if _core is None:
        print("note: compiled kernels unavailable; showing numpy only\n")
    bench_kernels()
    if args.end_to_end:
        bench_end_to_end()
