"""Live operator bridge: newline-delimited JSON frames over local TCP.

The server runs one engine session in lockstep with a single client.
Outbound ``state`` frames leave at 20 Hz of simulated time (optionally
paced to the wall clock); inbound frames drive the teach phase, place and
remove obstacles, apply steering torque, request stops, and set
whitelisted parameters. Frames carry a protocol version and malformed
input is answered with an ``error`` frame, never a crash.
"""

from __future__ import annotations

import json
import socket
import threading
import time
from collections import deque
from pathlib import Path

from .engine import EngineHooks, run_repeat, run_teach
from .scenario import OVERRIDE_WHITELIST, Scenario
from .teachpath import (PathTooShortError, TeachPath, save_submap_index,
                        split_into_submaps)

PROTOCOL_VERSION = 1

_LIVE_PARAM_KEYS = {
    k for k in OVERRIDE_WHITELIST
    if k.startswith(("velocity.", "steering.")) or k == "analyzer.creep_speed"
}

_INBOUND_REQUIRED: dict[str, tuple[str, ...]] = {
    "drive": (),
    "place_obstacle": ("id", "x", "y"),
    "remove_obstacle": ("id",),
    "request_stop": (),
    "steer_torque": ("nm",),
    "set_param": ("key", "value"),
    "bye": (),
}


def encode_frame(frame: dict) -> bytes:
    return (json.dumps(frame, sort_keys=True, separators=(",", ":")) + "\n").encode()


def validate_inbound(frame: dict) -> str | None:
    """Returns an error code for a bad frame, None when acceptable."""
    if not isinstance(frame, dict):
        return "bad_frame"
    if frame.get("v") != PROTOCOL_VERSION:
        return "bad_version"
    kind = frame.get("type")
    if kind not in _INBOUND_REQUIRED:
        return "unknown_type"
    missing = [f for f in _INBOUND_REQUIRED[kind] if f not in frame]
    if missing:
        return "missing_fields"
    if kind == "set_param" and frame["key"] not in _LIVE_PARAM_KEYS:
        return "param_not_allowed"
    return None


class BridgeHooks(EngineHooks):
    """Engine hooks bound to one connected client socket."""

    def __init__(self, conn: socket.socket, rt_factor: float):
        self.conn = conn
        self.rt_factor = rt_factor
        self._queue: deque[dict] = deque()
        self._lock = threading.Lock()
        self._closed = threading.Event()
        self._wall_start: float | None = None
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    # -- socket side -------------------------------------------------------
    def _read_loop(self) -> None:
        buf = b""
        try:
            while True:
                chunk = self.conn.recv(65536)
                if not chunk:
                    break
                buf += chunk
                while b"\n" in buf:
                    line, buf = buf.split(b"\n", 1)
                    if line.strip():
                        self._handle_line(line)
        except OSError:
            pass
        self._closed.set()

    def _handle_line(self, line: bytes) -> None:
        try:
            frame = json.loads(line)
        except json.JSONDecodeError:
            self.send({"v": PROTOCOL_VERSION, "type": "error",
                       "code": "bad_json"})
            return
        code = validate_inbound(frame)
        if code is not None:
            self.send({"v": PROTOCOL_VERSION, "type": "error", "code": code,
                       "frame_type": str(frame.get("type")) if isinstance(frame, dict) else None})
            return
        if frame["type"] == "bye":
            self._closed.set()
            return
        with self._lock:
            self._queue.append(frame)
        if frame["type"] in ("place_obstacle", "remove_obstacle", "set_param"):
            self.send({"v": PROTOCOL_VERSION, "type": "ack",
                       "op": frame["type"], "id": frame.get("id"),
                       "key": frame.get("key")})

    def send(self, frame: dict) -> None:
        try:
            self.conn.sendall(encode_frame(frame))
        except OSError:
            self._closed.set()

    # -- engine side ---------------------------------------------------------
    def poll_commands(self) -> list[dict]:
        cmds: list[dict] = []
        with self._lock:
            while self._queue:
                cmds.append(self._queue.popleft())
        if self._closed.is_set():
            cmds.append({"type": "disconnect"})
        return cmds

    def on_state(self, frame: dict) -> None:
        self.send(frame)
        if self.rt_factor > 0.0:
            if self._wall_start is None:
                self._wall_start = time.monotonic()
            target = self._wall_start + frame["t"] / self.rt_factor
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(min(delay, 1.0))

    def on_end(self, summary: dict) -> None:
        pass  # the end frame carries the run status; sent by run_serve


def run_serve(scenario: Scenario, mode: str, teach_path: TeachPath | None,
              port: int, rt_factor: float, out_dir: Path) -> None:
    """Accept one client on localhost:``port`` and run the session."""
    listener = socket.create_server(("127.0.0.1", port))
    listener.settimeout(60.0)
    print(f"serving {mode} session on 127.0.0.1:{port}")
    try:
        conn, addr = listener.accept()
    finally:
        listener.close()
    conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    hooks = BridgeHooks(conn, rt_factor)
    preview = None
    if teach_path is not None:
        stride = max(len(teach_path) // 400, 1)
        preview = [[round(float(x), 2), round(float(y), 2)]
                   for x, y in zip(teach_path.xs[::stride],
                                   teach_path.ys[::stride])]
    hooks.send({
        "v": PROTOCOL_VERSION, "type": "hello", "session": mode,
        "scenario": scenario.name, "dt": scenario.run.dt,
        "state_rate_hz": 1.0 / (scenario.run.dt * hooks.state_every_ticks),
        "path_length_m": None if teach_path is None else teach_path.total_length,
        "path_preview": preview,
        "road_width_m": scenario.road.width,
    })
    try:
        if mode == "teach":
            try:
                result = run_teach(scenario, hooks=hooks)
            except PathTooShortError as exc:
                hooks.send({"v": PROTOCOL_VERSION, "type": "error",
                            "code": "path_too_short", "detail": str(exc)})
                raise
            result.path.save_csv(out_dir / "teach_path.csv")
            submaps = split_into_submaps(result.path,
                                         scenario.run.submap_max_len)
            save_submap_index(submaps, out_dir / "teach_path.submaps")
            result.telemetry.save_csv(out_dir / "teach_telemetry.csv")
            hooks.send({"v": PROTOCOL_VERSION, "type": "end",
                        "status": "completed", "summary": result.summary})
        else:
            assert teach_path is not None
            result = run_repeat(scenario, teach_path, hooks=hooks)
            result.telemetry.save_csv(out_dir / "telemetry.csv")
            hooks.send({"v": PROTOCOL_VERSION, "type": "end",
                        "status": result.status, "summary": result.summary})
    finally:
        time.sleep(0.05)  # let the last frame flush before teardown
        try:
            conn.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        conn.close()
