"""Deterministic fixed-timestep teach and repeat orchestration.

One 200 Hz control loop drives everything: the LiDAR runs every 20 ticks
(10 Hz) with its grid delivered 4 ticks after the scan, localization every
10 ticks (20 Hz, zero-order held in between), the guard and both
controllers every tick, all from seeded generators, so a scenario plus a
seed reproduces a run byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .geometry import clamp
from .grid import (ObstaclePersistence, blocking_distance, build_danger_zone,
                   critical_limit, danger_horizon)
from .guard import (GuardDecision, GuardInputs, GuardMode, GuardReason, Led,
                    SafetyGuard)
from .lidar import classify_scan, dump_labeled_scan, project_to_grid, simulate_scan
from .localization import Localizer, LocMode
from .pathref import PathCursor, curve_radius
from .scenario import ObstacleSpec, Scenario, World, apply_override
from .steering import SteeringController
from .teachpath import (SubMap, TeachPath, record_teach, split_into_submaps)
from .vehicle import ActuatorCommand, VehicleState, step_dynamics, wheel_odometry
from .velocity import (apply_penalizations, lookahead_distance_vel,
                       physical_velocity, reference_velocity)

TELEMETRY_COLUMNS = [
    "t", "x", "y", "heading", "speed", "steering_angle",
    "est_x", "est_y", "est_heading", "loc_mode", "time_since_fix",
    "closest_index", "lat_err_true", "lat_err_est", "heading_err_est",
    "remaining_m", "steering_ref", "v_plan", "v_cmd", "v_phys", "v_teach",
    "f_obstacle", "f_lateral", "f_path_end", "f_shutdown",
    "obst_dist", "obst_critical", "obst_held", "creep_active",
    "guard_mode", "guard_reason", "led", "velocity_override", "emergency",
    "submap_index", "submap_loading", "torque", "watchdog_ok", "interface_ok",
]

_FLOAT_COLUMNS = {
    "t", "x", "y", "heading", "speed", "steering_angle", "est_x", "est_y",
    "est_heading", "time_since_fix", "lat_err_true", "lat_err_est",
    "heading_err_est", "remaining_m", "steering_ref", "v_plan", "v_cmd",
    "v_phys", "v_teach", "f_obstacle", "f_lateral", "f_path_end",
    "f_shutdown", "torque",
}
_OPTIONAL_FLOAT_COLUMNS = {"obst_dist", "velocity_override"}
_BOOL_COLUMNS = {"obst_critical", "obst_held", "creep_active", "emergency",
                 "submap_loading", "watchdog_ok", "interface_ok"}
_INT_COLUMNS = {"closest_index", "submap_index"}


class TeachAbortError(RuntimeError):
    """Teach driver left the road corridor or the session broke off."""


class Telemetry:
    """Columnar per-tick record with deterministic CSV formatting."""

    def __init__(self):
        self.rows: dict[str, list] = {c: [] for c in TELEMETRY_COLUMNS}

    def add(self, **values: Any) -> None:
        for col in TELEMETRY_COLUMNS:
            self.rows[col].append(values[col])

    def __len__(self) -> int:
        return len(self.rows["t"])

    def column(self, name: str) -> np.ndarray:
        vals = self.rows[name]
        if name in _FLOAT_COLUMNS:
            return np.asarray(vals, dtype=np.float64)
        if name in _OPTIONAL_FLOAT_COLUMNS:
            return np.asarray([math.nan if v is None else v for v in vals])
        if name in _BOOL_COLUMNS:
            return np.asarray(vals, dtype=bool)
        if name in _INT_COLUMNS:
            return np.asarray(vals, dtype=np.int64)
        return np.asarray(vals, dtype=object)

    @staticmethod
    def _format(col: str, v: Any) -> str:
        if col in _FLOAT_COLUMNS:
            return f"{v:.6f}"
        if col in _OPTIONAL_FLOAT_COLUMNS:
            return "" if v is None else f"{v:.6f}"
        if col in _BOOL_COLUMNS:
            return "1" if v else "0"
        if col in _INT_COLUMNS:
            return str(int(v))
        return str(v)

    def to_csv(self) -> str:
        lines = [",".join(TELEMETRY_COLUMNS)]
        n = len(self)
        for i in range(n):
            lines.append(",".join(
                self._format(c, self.rows[c][i]) for c in TELEMETRY_COLUMNS))
        return "\n".join(lines) + "\n"

    def save_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


@dataclass
class TeachResult:
    path: TeachPath
    telemetry: Telemetry
    summary: dict
    flags: list[str]


@dataclass
class RepeatResult:
    status: str  # completed | manual | lost | timeout | aborted_nan
    telemetry: Telemetry
    summary: dict
    submaps: list[SubMap]


class EngineHooks:
    """Optional live-session bridge; the default is fully headless."""

    state_every_ticks = 10  # 20 Hz

    def on_state(self, frame: dict) -> None:
        pass

    def poll_commands(self) -> list[dict]:
        return []

    def on_end(self, summary: dict) -> None:
        pass


def _spawn_rngs(seed: int) -> dict[str, np.random.Generator]:
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(6)
    names = ["teach_loc", "teach_odom", "repeat_loc", "repeat_odom",
             "lidar", "spare"]
    return {n: np.random.Generator(np.random.PCG64(c))
            for n, c in zip(names, children)}


@dataclass
class _EventBoard:
    """Scripted fault/operator events plus live UI state."""

    scripted: tuple[dict, ...] = ()
    live_torque: float = 0.0
    ui_stop: bool = False

    def torque(self, t: float) -> float:
        v = self.live_torque
        for ev in self.scripted:
            if ev.get("type") == "steer_torque" and self._active(ev, t):
                v = max(v, float(ev.get("value", 0.0)), key=abs)
        return v

    def interface_ok(self, t: float) -> bool:
        return not any(ev.get("type") == "interface_fail" and self._active(ev, t)
                       for ev in self.scripted)

    def watchdog_scripted_fail(self, t: float) -> bool:
        return any(ev.get("type") == "watchdog_fail" and self._active(ev, t)
                   for ev in self.scripted)

    def stop_requested(self, t: float) -> bool:
        if self.ui_stop:
            return True
        return any(ev.get("type") == "ui_stop" and t >= float(ev["t"])
                   for ev in self.scripted)

    @staticmethod
    def _active(ev: dict, t: float) -> bool:
        t0 = float(ev.get("t", 0.0))
        return t0 <= t < t0 + float(ev.get("duration", math.inf))


def run_teach(scenario: Scenario,
              hooks: EngineHooks | None = None) -> TeachResult:
    """Drive the demonstration and record the estimate stream as the path.

    The scripted driver is a pure-pursuit autopilot on the road centerline
    at the teach speed; with hooks attached, inbound drive frames replace it
    (the live operator). Leaving the road corridor aborts the teach.
    """
    rngs = _spawn_rngs(scenario.seed)
    rc = scenario.run
    dt = rc.dt
    world = World(scenario)
    centerline = scenario.centerline_path()
    params = scenario.vehicle
    localizer = Localizer(cfg=scenario.localization, params=params,
                          rng=rngs["teach_loc"], path=None)
    cursor = PathCursor(centerline)
    steer_ctl = SteeringController(scenario.steering, params)
    board = _EventBoard(scripted=scenario.run.events)

    state = VehicleState(x=scenario.initial_pose[0], y=scenario.initial_pose[1],
                         heading=scenario.initial_pose[2], speed=0.0,
                         steering_angle=0.0, timestamp=0.0)
    est = localizer.estimate_pose(
        state, wheel_odometry(state, params, scenario.odometry_noise,
                              rngs["teach_odom"]), 0.0, dt * rc.localization_every_ticks)

    telem = Telemetry()
    samples: list[tuple[float, float, float, float]] = []
    flags: list[str] = []
    live_drive = {"steer": 0.0, "throttle": 0.0, "brake": 0.0}
    live_mode = hooks is not None
    stop_requested = False

    max_ticks = int((rc.max_duration or
                     (3.0 * centerline.total_length
                      / max(scenario.teach.speed, 0.5) + 90.0)) / dt)
    status = "timeout"
    for k in range(max_ticks):
        t = k * dt
        if hooks is not None:
            for cmd in hooks.poll_commands():
                kind = cmd.get("type")
                if kind == "drive":
                    live_drive = {
                        "steer": clamp(float(cmd.get("steer", 0.0)), -1.0, 1.0),
                        "throttle": clamp(float(cmd.get("throttle", 0.0)), 0.0, 1.0),
                        "brake": clamp(float(cmd.get("brake", 0.0)), 0.0, 1.0),
                    }
                elif kind == "request_stop":
                    stop_requested = True
                elif kind == "disconnect":
                    raise TeachAbortError("client disconnected mid-teach")

        odom = wheel_odometry(state, params, scenario.odometry_noise,
                              rngs["teach_odom"])
        if k % rc.localization_every_ticks == 0:
            est = localizer.estimate_pose(state, odom, t,
                                          dt * rc.localization_every_ticks)
            samples.append((est.x, est.y, est.heading, state.speed))
            if est.mode != LocMode.LOCALIZED and "teach_dead_reckoning" not in flags:
                flags.append("teach_dead_reckoning")

        q = cursor.query(state.x, state.y, state.heading)
        if world.corridor_offset(state.x, state.y) > scenario.road.width / 2.0:
            raise TeachAbortError(
                f"teach driver left the road corridor at t={t:.2f}s "
                f"(tick {k}, pose {state.x:.2f},{state.y:.2f})")

        if live_mode:
            steering_ref = live_drive["steer"] * params.max_steering
            v_cmd = max(0.0, live_drive["throttle"] - live_drive["brake"]) \
                * scenario.teach.max_drive_speed
        else:
            steering_ref = steer_ctl.command(state.x, state.y, state.heading,
                                             state.speed, centerline, q)
            v_cmd = scenario.teach.speed
            v_cmd = min(v_cmd, math.sqrt(
                2.0 * rc.end_stop_decel * max(q.remaining_distance - 0.2, 0.0)))
        if stop_requested or board.stop_requested(t):
            v_cmd = 0.0

        _record_tick(telem, t, state, est, q, q.lateral_error, steering_ref,
                     v_plan=v_cmd, v_cmd=v_cmd, v_phys=math.inf,
                     v_teach=scenario.teach.speed,
                     factors=(1.0, 1.0, 1.0, 1.0), report=None,
                     decision=GuardDecision(GuardMode.AUTONOMOUS, None,
                                            led=_LED_BLUE, reason=_REASON_NONE),
                     submap_index=0, submap_loading=False,
                     torque=0.0, watchdog_ok=True, interface_ok=True)

        if hooks is not None and k % hooks.state_every_ticks == 0:
            hooks.on_state(_state_frame("teach", t, state, est, q, None, None,
                                        GuardMode.AUTONOMOUS, _REASON_NONE,
                                        steering_ref, v_cmd, 0, 1, False, world))

        state = step_dynamics(state, ActuatorCommand(steering_ref, v_cmd), params, dt)

        done_scripted = not live_mode and q.remaining_distance <= 0.5 \
            and state.speed <= 0.05 and k > 10
        done_live = (stop_requested or board.stop_requested(t)) \
            and state.speed <= 0.05
        if done_scripted or done_live:
            status = "completed"
            break

    path = record_teach(samples, scenario.teach.min_spacing,
                        scenario.teach.max_spacing)
    summary = summarize(telem, status=status, path=None)
    summary["teach_length_m"] = round(path.total_length, 6)
    result = TeachResult(path=path, telemetry=telem, summary=summary,
                         flags=flags)
    if hooks is not None:
        hooks.on_end(summary)
    return result


def run_repeat(scenario: Scenario, teach_path: TeachPath,
               hooks: EngineHooks | None = None) -> RepeatResult:
    """Autonomously retrace the teach path; see the module doc for rates.

    Per tick: sensors, localization, path query, grid analysis on the
    latest snapshot, guard, steering and velocity control, penalizations
    and overrides, actuation, dynamics. Terminates on mission completion,
    manual takeover, or a lost localization.
    """
    rngs = _spawn_rngs(scenario.seed)
    rc = scenario.run
    dt = rc.dt
    params = scenario.vehicle
    world = World(scenario)
    live = {"scenario": scenario}  # set_param swaps in updated configs

    submaps = split_into_submaps(teach_path, rc.submap_max_len)
    active_idx = 0
    active = submaps[0].extract(teach_path) if len(submaps) > 1 else teach_path

    cursor = PathCursor(active)
    true_cursor = PathCursor(active)
    steer_ctl = SteeringController(scenario.steering, params)
    localizer = Localizer(cfg=scenario.localization, params=params,
                          rng=rngs["repeat_loc"], path=active)
    persistence = ObstaclePersistence(scenario.analyzer)
    guard = SafetyGuard(scenario.guard)
    board = _EventBoard(scripted=rc.events)

    p0 = teach_path.point(0)
    state = VehicleState(x=p0.x, y=p0.y, heading=p0.heading, speed=0.0,
                         steering_angle=0.0, timestamp=0.0)
    loc_dt = dt * rc.localization_every_ticks
    est = localizer.estimate_pose(
        state, wheel_odometry(state, params, scenario.odometry_noise,
                              rngs["repeat_odom"]), 0.0, loc_dt)

    telem = Telemetry()
    latest_grid = None
    pending_grid: tuple[int, Any] | None = None
    raw_block: float | None = None
    last_loc_t = 0.0
    loading_until: float | None = None
    shutdown_started: float | None = None
    status = "timeout"
    n_scans = 0
    n_loc_updates = 0

    max_ticks = int((rc.max_duration or
                     (3.0 * teach_path.total_length
                      / max(float(np.min(teach_path.v_teach)), 0.5) + 120.0)) / dt)

    for k in range(max_ticks):
        t = k * dt

        if hooks is not None:
            for cmd in hooks.poll_commands():
                _apply_live_command(cmd, world, board, live)
        scn_now = live["scenario"]
        velocity_cfg = scn_now.velocity
        pen_cfg = scn_now.penalize
        analyzer_cfg = scn_now.analyzer
        steer_ctl.cfg = scn_now.steering

        # --- sensors ---------------------------------------------------
        if k % rc.lidar_every_ticks == 0:
            scan = simulate_scan(state.x, state.y, state.heading,
                                 world.boxes_at(t), scenario.lidar,
                                 rngs["lidar"], t, grade=scenario.road.grade)
            labeled = classify_scan(scan, state.steering_angle, scenario.lidar)
            grid_snap = project_to_grid(labeled, scenario.grid, scenario.lidar,
                                        pose_tag=(est.x, est.y, est.heading))
            pending_grid = (k + rc.grid_delivery_ticks, grid_snap)
            if rc.scan_dump_dir is not None:
                dump_dir = Path(rc.scan_dump_dir)
                dump_dir.mkdir(parents=True, exist_ok=True)
                dump_labeled_scan(labeled, dump_dir / f"scan_{n_scans:05d}.csv")
            n_scans += 1
        grid_is_new = False
        if pending_grid is not None and k >= pending_grid[0]:
            latest_grid = pending_grid[1]
            pending_grid = None
            grid_is_new = True

        # --- localization (zero-order hold between updates) -------------
        odom = wheel_odometry(state, params, scenario.odometry_noise,
                              rngs["repeat_odom"])
        loading = loading_until is not None
        if k % rc.localization_every_ticks == 0 and k > 0 and not loading:
            est = localizer.estimate_pose(state, odom, t, loc_dt)
            last_loc_t = t
            n_loc_updates += 1

        # --- path queries ----------------------------------------------
        q = cursor.query(est.x, est.y, est.heading)
        q_true = true_cursor.query(state.x, state.y, state.heading)
        v_abs = state.speed

        # --- grid analysis on the latest snapshot -----------------------
        lad_v = lookahead_distance_vel(v_abs, velocity_cfg)
        if grid_is_new and latest_grid is not None:
            horizon = danger_horizon(v_abs, lad_v, params.max_decel,
                                     analyzer_cfg.horizon_margin)
            zone = build_danger_zone(active, q.closest_index, horizon,
                                     q.lateral_error, params.body_width,
                                     latest_grid, analyzer_cfg)
            raw_block = blocking_distance(latest_grid, zone)
        report = persistence.update(raw_block, t, state.speed)

        # --- guard -------------------------------------------------------
        grid_age = t - (latest_grid.timestamp if latest_grid is not None else 0.0)
        watchdog_ok = (not board.watchdog_scripted_fail(t)
                       and grid_age <= 3.0 * rc.lidar_every_ticks * dt
                       + rc.grid_delivery_ticks * dt
                       and t - last_loc_t <= 3.0 * loc_dt) or loading
        on_last = active_idx == len(submaps) - 1
        stop_req = board.stop_requested(t)
        if stop_req and shutdown_started is None:
            shutdown_started = t
        mission_done = (on_last and q.remaining_distance <= rc.submap_end_window
                        and state.speed <= analyzer_cfg.stop_eps and k > 10) \
            or (stop_req and state.speed <= analyzer_cfg.stop_eps
                and shutdown_started is not None and t - shutdown_started > 0.5)
        inputs = GuardInputs(
            obstacle_critical=report.critical,
            tracking_error=q.lateral_error,
            orientation_error=q.heading_error,
            localization_mode=est.mode,
            watchdog_ok=watchdog_ok,
            steering_torque=board.torque(t),
            ui_stop_requested=stop_req,
            interface_ok=board.interface_ok(t),
            speed=state.speed,
            mission_done=mission_done,
        )
        decision = guard.step(inputs)

        # --- controllers --------------------------------------------------
        steering_ref = steer_ctl.command(est.x, est.y, est.heading, v_abs,
                                         active, q)
        fit = curve_radius(active, q.closest_index, lad_v)
        v_phys = physical_velocity(velocity_cfg.mu_fric, velocity_cfg.g_earth,
                                   fit.radius)
        v_teach = float(active.v_teach[q.closest_index])
        v_plan = reference_velocity(v_phys, v_teach, velocity_cfg)
        clearance = None if report.blocking_distance is None \
            else report.blocking_distance - critical_limit(v_abs)
        shutdown_elapsed = None if shutdown_started is None else t - shutdown_started
        pen = apply_penalizations(v_plan, clearance, q.lateral_error,
                                  q.remaining_distance, shutdown_elapsed, pen_cfg)
        v_cmd = pen.velocity

        # --- overrides: creep, sub-map schedule, guard ---------------------
        if report.creep_active:
            v_cmd = min(v_cmd, analyzer_cfg.creep_speed)
        if loading:
            v_cmd = 0.0
            if t >= loading_until:
                active_idx += 1
                active = submaps[active_idx].extract(teach_path)
                cursor = PathCursor(active)
                true_cursor = PathCursor(active)
                localizer.path = active
                loading_until = None
        elif not on_last and q.remaining_distance <= rc.submap_end_window:
            v_cmd = min(v_cmd, math.sqrt(
                2.0 * rc.end_stop_decel * max(q.remaining_distance - 0.2, 0.0)))
            if state.speed <= analyzer_cfg.stop_eps:
                next_len = submaps[active_idx + 1].length
                loading_until = t + rc.submap_load_rate * next_len / 1000.0
        elif on_last and q.remaining_distance <= rc.submap_end_window:
            v_cmd = min(v_cmd, math.sqrt(
                2.0 * rc.end_stop_decel * max(q.remaining_distance - 0.2, 0.0)))
        if decision.velocity_override is not None:
            v_cmd = min(v_cmd, decision.velocity_override)

        emergency = decision.mode == GuardMode.EMERGENCY_STOPPING
        cmd = ActuatorCommand(steering_ref=steering_ref, velocity_ref=v_cmd,
                              emergency=emergency)

        _record_tick(telem, t, state, est, q, q_true.lateral_error,
                     steering_ref, v_plan=v_plan, v_cmd=v_cmd, v_phys=v_phys,
                     v_teach=v_teach,
                     factors=(pen.f_obstacle, pen.f_lateral, pen.f_path_end,
                              pen.f_shutdown),
                     report=report, decision=decision, submap_index=active_idx,
                     submap_loading=loading, torque=inputs.steering_torque,
                     watchdog_ok=watchdog_ok, interface_ok=inputs.interface_ok)

        if hooks is not None and k % hooks.state_every_ticks == 0:
            hooks.on_state(_state_frame(
                "repeat", t, state, est, q, report, latest_grid, decision.mode,
                decision.reason, steering_ref, v_cmd, active_idx, len(submaps),
                loading, world))

        state = step_dynamics(state, cmd, params, dt)
        if not all(map(math.isfinite, (state.x, state.y, state.heading,
                                       state.speed, state.steering_angle))):
            status = "aborted_nan"
            break

        if decision.terminal:
            status = {GuardMode.MANUAL: "manual",
                      GuardMode.MISSION_COMPLETE: "completed",
                      GuardMode.EMERGENCY_STOPPING: "lost"}[decision.mode]
            break

    summary = summarize(telem, status=status,
                        path=teach_path if len(submaps) == 1 else None)
    summary["submap_count"] = len(submaps)
    summary["lidar_scans"] = n_scans
    summary["localization_updates"] = n_loc_updates
    result = RepeatResult(status=status, telemetry=telem, summary=summary,
                          submaps=submaps)
    if hooks is not None:
        hooks.on_end(summary)
    return result


_LED_BLUE = Led.BLUE
_REASON_NONE = GuardReason.NONE


def _record_tick(telem, t, state, est, q, lat_true, steering_ref, *, v_plan,
                 v_cmd, v_phys, v_teach, factors, report, decision,
                 submap_index, submap_loading, torque, watchdog_ok,
                 interface_ok):
    telem.add(
        t=t, x=state.x, y=state.y, heading=state.heading, speed=state.speed,
        steering_angle=state.steering_angle, est_x=est.x, est_y=est.y,
        est_heading=est.heading, loc_mode=est.mode.value,
        time_since_fix=est.time_since_fix, closest_index=q.closest_index,
        lat_err_true=lat_true, lat_err_est=q.lateral_error,
        heading_err_est=q.heading_error, remaining_m=q.remaining_distance,
        steering_ref=steering_ref, v_plan=v_plan, v_cmd=v_cmd, v_phys=v_phys,
        v_teach=v_teach, f_obstacle=factors[0], f_lateral=factors[1],
        f_path_end=factors[2], f_shutdown=factors[3],
        obst_dist=None if report is None else report.blocking_distance,
        obst_critical=bool(report.critical) if report else False,
        obst_held=bool(report.held) if report else False,
        creep_active=bool(report.creep_active) if report else False,
        guard_mode=decision.mode.value, guard_reason=decision.reason.value,
        led=decision.led.value, velocity_override=decision.velocity_override,
        emergency=decision.mode == GuardMode.EMERGENCY_STOPPING,
        submap_index=submap_index, submap_loading=submap_loading,
        torque=torque, watchdog_ok=watchdog_ok, interface_ok=interface_ok,
    )


def _apply_live_command(cmd: dict, world: World, board: _EventBoard,
                        live: dict) -> None:
    kind = cmd.get("type")
    if kind == "place_obstacle":
        world.place_obstacle(ObstacleSpec(
            id=str(cmd["id"]), x=float(cmd["x"]), y=float(cmd["y"]),
            size_x=float(cmd.get("sx", 1.0)), size_y=float(cmd.get("sy", 1.0)),
            height=float(cmd.get("h", 1.0))))
    elif kind == "remove_obstacle":
        world.remove_obstacle(str(cmd["id"]))
    elif kind == "steer_torque":
        board.live_torque = float(cmd.get("nm", 0.0))
    elif kind == "request_stop":
        board.ui_stop = True
    elif kind == "set_param":
        live["scenario"] = apply_override(live["scenario"], str(cmd["key"]),
                                          cmd["value"])


def _state_frame(mode, t, state, est, q, report, latest_grid, guard_mode,
                 guard_reason, steering_ref, v_cmd, submap_index, submap_count,
                 loading, world) -> dict:
    cells: list[list[float]] = []
    if latest_grid is not None:
        gx, gy = latest_grid.occupied_xy()
        cells = [[round(float(a), 3), round(float(b), 3)]
                 for a, b in zip(gx[:512], gy[:512])]
    return {
        "v": 1,
        "type": "state",
        "session": mode,
        "t": round(t, 6),
        "truth": {"x": state.x, "y": state.y, "heading": state.heading,
                  "speed": state.speed},
        "estimate": {"x": est.x, "y": est.y, "heading": est.heading,
                     "loc_mode": est.mode.value,
                     "lateral_error": q.lateral_error},
        "steering": {"ref": steering_ref, "actual": state.steering_angle},
        "velocity": {"ref": v_cmd, "actual": state.speed},
        "guard": {"mode": guard_mode.value, "reason": guard_reason.value,
                  "led": "BLUE" if guard_mode == GuardMode.AUTONOMOUS else "GREEN"},
        "obstacle": None if report is None else {
            "distance": report.blocking_distance,
            "critical": report.critical,
            "held": report.held,
            "creep": report.creep_active,
        },
        "grid": {"cells": cells},
        "path": {"closest_index": q.closest_index,
                 "remaining": q.remaining_distance},
        "submap": {"index": submap_index, "count": submap_count,
                   "loading": loading},
        "obstacles": [{"id": o.id, "x": o.x, "y": o.y, "sx": o.size_x,
                       "sy": o.size_y, "h": o.height}
                      for o in world.ui_obstacles()],
    }


# ---------------------------------------------------------------------------
# metrics


def _apex_arclengths(path: TeachPath) -> np.ndarray:
    """Arclength positions of curvature apexes along the path.

    Curvature from recorded headings is heavily smoothed (10 m window) so
    teach-phase estimate noise does not fake apexes, and the first and last
    10 m are excluded: start/stop maneuvering spikes the raw curvature.
    """
    n = len(path)
    s = path.s
    if n < 5 or s[-1] < 40.0:
        return np.zeros(0)
    h = path.headings
    dh = np.arctan2(np.sin(h[2:] - h[:-2]), np.cos(h[2:] - h[:-2]))
    ds = np.maximum(s[2:] - s[:-2], 1e-9)
    kappa = np.zeros(n)
    kappa[1:-1] = np.abs(dh / ds)
    win = max(int(10.0 / max(float(np.median(np.diff(s))), 1e-6)), 1)
    kernel = np.ones(win) / win
    kappa = np.convolve(kappa, kernel, mode="same")
    interior = (s >= 10.0) & (s <= s[-1] - 10.0)
    if not interior.any():
        return np.zeros(0)
    k_max = kappa[interior].max()
    if k_max < 1e-4:
        return np.zeros(0)
    apexes: list[float] = []
    for i in np.nonzero(interior)[0]:
        if kappa[i] >= 0.6 * k_max and kappa[i] >= kappa[i - 1] \
                and kappa[i] > kappa[i + 1]:
            if not apexes or s[i] - apexes[-1] >= 10.0:
                apexes.append(float(s[i]))
    return np.asarray(apexes)


def summarize(telem: Telemetry, status: str,
              path: TeachPath | None = None) -> dict:
    """Run summary statistics; tracking errors over LOCALIZED ticks only."""
    n = len(telem)
    if n == 0:
        raise ValueError("empty telemetry")
    t = telem.column("t")
    speed = telem.column("speed")
    lat = np.abs(telem.column("lat_err_true"))
    loc_mode = telem.column("loc_mode")
    localized = loc_mode == LocMode.LOCALIZED.value
    emergency = telem.column("emergency")
    creep = telem.column("creep_active")
    submap = telem.column("submap_index")
    dt = float(t[1] - t[0]) if n > 1 else 0.0

    lat_loc = lat[localized] if localized.any() else lat
    summary: dict[str, Any] = {
        "status": status,
        "completed": status == "completed",
        "ticks": int(n),
        "duration_s": round(float(t[-1] + dt), 6),
        "distance_m": round(float(np.sum(speed) * dt), 6),
        "median_abs_lateral_error_m": round(float(np.median(lat_loc)), 6),
        "mean_abs_lateral_error_m": round(float(np.mean(lat_loc)), 6),
        "max_abs_lateral_error_m": round(float(np.max(lat_loc)), 6),
        "localized_fraction": round(float(np.mean(localized)), 6),
        "mean_speed_mps": round(float(np.mean(speed)), 6),
        "max_speed_mps": round(float(np.max(speed)), 6),
        "emergency_events": int(np.sum(np.diff(emergency.astype(int)) == 1)
                                + int(emergency[0])),
        "creep_phases": int(np.sum(np.diff(creep.astype(int)) == 1)
                            + int(creep[0])),
        "submap_stops": int(np.sum(np.diff(submap) != 0)),
        "stop_events": _count_stop_events(speed, dt),
    }

    bins: dict[str, float] = {}
    kmh = speed * 3.6
    for lo in range(0, 40, 5):
        mask = localized & (kmh >= lo) & (kmh < lo + 5)
        if mask.sum() > 10:
            bins[f"{lo}-{lo + 5}"] = round(float(np.median(lat[mask])), 6)
    summary["lateral_error_by_speed_kmh"] = bins

    if path is not None:
        apexes = _apex_arclengths(path)
        if len(apexes):
            s_tick = path.s[telem.column("closest_index")]
            near = np.zeros(n, dtype=bool)
            for sa in apexes:
                near |= np.abs(s_tick - sa) <= 5.0
            near &= localized
            if near.any():
                summary["apex_mean_abs_lateral_error_m"] = round(
                    float(np.mean(lat[near])), 6)
                summary["apex_count"] = int(len(apexes))
    return summary


def _count_stop_events(speed: np.ndarray, dt: float) -> int:
    """Mid-run full stops: at rest >= 0.05 s, then moving again."""
    stopped = speed < 0.05
    events = 0
    i, n = 0, len(speed)
    min_len = max(int(0.05 / dt), 1) if dt > 0 else 1
    while i < n:
        if stopped[i]:
            j = i
            while j < n and stopped[j]:
                j += 1
            if j - i >= min_len and j < n and i > 0:
                events += 1
            i = j
        else:
            i += 1
    return events
