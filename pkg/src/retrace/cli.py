"""Command-line entry point: teach, repeat, bench, replay, serve.

Every subcommand is deterministic given its inputs and seed. Errors are
reported as machine-readable JSON on stderr with stable identifiers and
exit codes (documented in the README).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .engine import TELEMETRY_COLUMNS, TeachAbortError, Telemetry, run_repeat, run_teach, summarize
from .scenario import (Scenario, ScenarioError, World, apply_override,
                       load_scenario, parse_override_value)
from .teachpath import PathTooShortError, TeachPath, save_submap_index, split_into_submaps

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SCENARIO_NOT_FOUND = 2
EXIT_PATH_MISMATCH = 3
EXIT_CORRUPT_TELEMETRY = 4
EXIT_TEACH_ABORTED = 5
EXIT_OUTPUT_EXISTS = 6


class CliError(Exception):
    def __init__(self, code: int, error_id: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.error_id = error_id


def _fail(code: int, error_id: str, detail: str) -> "CliError":
    return CliError(code, error_id, detail)


def _load_scenario_arg(path: str, overrides: list[str], seed: int | None) -> Scenario:
    try:
        scn = load_scenario(path)
    except FileNotFoundError as exc:
        raise _fail(EXIT_SCENARIO_NOT_FOUND, "scenario_not_found", str(exc))
    except ScenarioError as exc:
        raise _fail(EXIT_ERROR, "scenario_invalid", str(exc))
    for item in overrides or []:
        if "=" not in item:
            raise _fail(EXIT_ERROR, "bad_param", f"--param needs key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            scn = apply_override(scn, key.strip(), parse_override_value(raw.strip()))
        except ScenarioError as exc:
            raise _fail(EXIT_ERROR, "bad_param", str(exc))
    if seed is not None:
        scn = apply_override(scn, "seed", seed)
    return scn


def _prepare_out(out: str, names: list[str], force: bool) -> Path:
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not force:
        clashes = [n for n in names if (out_dir / n).exists()]
        if clashes:
            raise _fail(EXIT_OUTPUT_EXISTS, "output_exists",
                        f"{', '.join(clashes)} already in {out_dir}; use --force")
    return out_dir


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def cmd_teach(args) -> int:
    scn = _load_scenario_arg(args.scenario, args.param, args.seed)
    out = _prepare_out(args.out, ["teach_path.csv", "teach_path.submaps",
                                  "teach_telemetry.csv", "teach_summary.json"],
                       args.force)
    try:
        result = run_teach(scn)
    except TeachAbortError as exc:
        raise _fail(EXIT_TEACH_ABORTED, "teach_aborted", str(exc))
    except PathTooShortError as exc:
        raise _fail(EXIT_ERROR, "path_too_short", str(exc))
    result.path.save_csv(out / "teach_path.csv")
    submaps = split_into_submaps(result.path, scn.run.submap_max_len)
    save_submap_index(submaps, out / "teach_path.submaps")
    result.telemetry.save_csv(out / "teach_telemetry.csv")
    _write_json(out / "teach_summary.json", result.summary)
    print(f"teach path: {result.path.total_length:.1f} m, "
          f"{len(result.path)} points, {len(submaps)} submap(s) -> {out}")
    return EXIT_OK


def _check_path_matches(scn: Scenario, path: TeachPath) -> None:
    world = World(scn)
    start_offset = world.corridor_offset(float(path.xs[0]), float(path.ys[0]))
    if start_offset > scn.road.width:
        raise _fail(EXIT_PATH_MISMATCH, "path_scenario_mismatch",
                    f"teach path starts {start_offset:.1f} m from the scenario "
                    "road; wrong path or scenario?")


def cmd_repeat(args) -> int:
    scn = _load_scenario_arg(args.scenario, args.param, args.seed)
    try:
        path = TeachPath.load_csv(args.path)
    except FileNotFoundError as exc:
        raise _fail(EXIT_SCENARIO_NOT_FOUND, "path_not_found", str(exc))
    except ValueError as exc:
        raise _fail(EXIT_ERROR, "path_invalid", str(exc))
    _check_path_matches(scn, path)
    out = _prepare_out(args.out, ["telemetry.csv", "summary.json"], args.force)
    result = run_repeat(scn, path)
    result.telemetry.save_csv(out / "telemetry.csv")
    _write_json(out / "summary.json", result.summary)
    print(f"repeat {result.status}: median |lat err| "
          f"{result.summary['median_abs_lateral_error_m']:.3f} m, "
          f"max {result.summary['max_abs_lateral_error_m']:.3f} m -> {out}")
    return EXIT_OK if result.status in ("completed", "manual", "lost") else EXIT_ERROR


def cmd_bench(args) -> int:
    suite_path = Path(args.suite)
    if not suite_path.is_file():
        raise _fail(EXIT_SCENARIO_NOT_FOUND, "suite_not_found", str(suite_path))
    try:
        suite = json.loads(suite_path.read_text())
        runs = suite["runs"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise _fail(EXIT_ERROR, "suite_invalid", f"{suite_path}: {exc}")

    out = _prepare_out(args.out, ["bench_results.json", "bench_results.csv"],
                       args.force)
    results = []
    teach_cache: dict[tuple, TeachPath] = {}
    for entry in runs:
        scn_path = str(suite_path.parent / entry["scenario"]) \
            if not Path(entry["scenario"]).is_absolute() else entry["scenario"]
        lo, hi = entry["bin_kmh"]
        mid_ms = (lo + hi) / 2.0 / 3.6
        # teach at mid-bin, cap at the bin top; the default v_freedom keeps
        # the launch alive (the recorded path starts at standstill)
        scn = _load_scenario_arg(scn_path, args.param, args.seed)
        scn = apply_override(scn, "teach.speed", mid_ms)
        scn = apply_override(scn, "velocity.max_abs_vel", hi / 3.6)

        cache_key = (scn_path, round(mid_ms, 6), scn.seed)
        if cache_key not in teach_cache:
            teach_cache[cache_key] = run_teach(scn).path
        path = teach_cache[cache_key]
        result = run_repeat(scn, path)

        run_name = f"{scn.name}_{lo}-{hi}kmh"
        run_dir = out / "runs" / run_name
        run_dir.mkdir(parents=True, exist_ok=True)
        result.telemetry.save_csv(run_dir / "telemetry.csv")
        _write_json(run_dir / "summary.json", result.summary)
        results.append({
            "scenario": scn.name,
            "bin_kmh": [lo, hi],
            "median_abs_lateral_error_m": result.summary["median_abs_lateral_error_m"],
            "mean_abs_lateral_error_m": result.summary["mean_abs_lateral_error_m"],
            "max_abs_lateral_error_m": result.summary["max_abs_lateral_error_m"],
            "apex_mean_abs_lateral_error_m": result.summary.get(
                "apex_mean_abs_lateral_error_m"),
            "completed": result.summary["completed"],
            "stop_events": result.summary["stop_events"],
            "emergency_events": result.summary["emergency_events"],
        })

    _write_json(out / "bench_results.json", {"runs": results})
    header = ["scenario", "bin_kmh", "median_m", "mean_m", "max_m", "apex_m",
              "completed", "stops", "emergencies"]
    csv_lines = [",".join(header)]
    fmt = "{:<18} {:>9} {:>9} {:>9} {:>9} {:>9} {:>10} {:>6} {:>12}"
    print(fmt.format(*header))
    for r in results:
        apex = r["apex_mean_abs_lateral_error_m"]
        row = [r["scenario"], f"{r['bin_kmh'][0]}-{r['bin_kmh'][1]}",
               f"{r['median_abs_lateral_error_m']:.3f}",
               f"{r['mean_abs_lateral_error_m']:.3f}",
               f"{r['max_abs_lateral_error_m']:.3f}",
               "-" if apex is None else f"{apex:.3f}",
               str(r["completed"]), str(r["stop_events"]),
               str(r["emergency_events"])]
        print(fmt.format(*row))
        csv_lines.append(",".join(row))
    (out / "bench_results.csv").write_text("\n".join(csv_lines) + "\n")
    return EXIT_OK


def load_telemetry_csv(path: str | Path) -> tuple[Telemetry, list[str]]:
    """Parse a telemetry CSV back into a Telemetry object.

    Returns (telemetry, warnings). A clean header with a damaged final row
    counts as truncation (warning); anything else malformed is corrupt.
    """
    p = Path(path)
    if not p.is_file():
        raise _fail(EXIT_SCENARIO_NOT_FOUND, "telemetry_not_found", str(p))
    lines = p.read_text().splitlines()
    if not lines or lines[0].split(",") != TELEMETRY_COLUMNS:
        raise _fail(EXIT_CORRUPT_TELEMETRY, "corrupt_telemetry",
                    f"{p}: missing or unexpected header")
    telem = Telemetry()
    warnings: list[str] = []
    n_cols = len(TELEMETRY_COLUMNS)
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != n_cols:
            if i == len(lines):
                warnings.append(f"row {i} truncated; summarizing {i - 2} ticks")
                break
            raise _fail(EXIT_CORRUPT_TELEMETRY, "corrupt_telemetry",
                        f"{p}: row {i} has {len(parts)} fields, expected {n_cols}")
        try:
            row = _parse_row(parts)
        except ValueError as exc:
            if i == len(lines):
                warnings.append(f"row {i} unparseable ({exc}); "
                                f"summarizing {i - 2} ticks")
                break
            raise _fail(EXIT_CORRUPT_TELEMETRY, "corrupt_telemetry",
                        f"{p}: row {i}: {exc}")
        telem.add(**row)
    if len(telem) == 0:
        raise _fail(EXIT_CORRUPT_TELEMETRY, "corrupt_telemetry", f"{p}: no data rows")
    return telem, warnings


def _parse_row(parts: list[str]) -> dict:
    from .engine import _BOOL_COLUMNS, _FLOAT_COLUMNS, _INT_COLUMNS, _OPTIONAL_FLOAT_COLUMNS

    row = {}
    for col, raw in zip(TELEMETRY_COLUMNS, parts):
        if col in _FLOAT_COLUMNS:
            row[col] = float(raw)
        elif col in _OPTIONAL_FLOAT_COLUMNS:
            row[col] = None if raw == "" else float(raw)
        elif col in _BOOL_COLUMNS:
            if raw not in ("0", "1"):
                raise ValueError(f"{col}: bad boolean {raw!r}")
            row[col] = raw == "1"
        elif col in _INT_COLUMNS:
            row[col] = int(raw)
        else:
            row[col] = raw
    return row


def cmd_replay(args) -> int:
    telem, warnings = load_telemetry_csv(args.telemetry)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    summary = summarize(telem, status="replay")
    text = json.dumps(summary, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = _prepare_out(args.out, ["replay_summary.json"], args.force)
        (out / "replay_summary.json").write_text(text + "\n")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import run_serve  # deferred: sockets unneeded elsewhere

    scn = _load_scenario_arg(args.scenario, args.param, args.seed)
    path = None
    if args.path:
        try:
            path = TeachPath.load_csv(args.path)
        except (FileNotFoundError, ValueError) as exc:
            raise _fail(EXIT_ERROR, "path_invalid", str(exc))
        _check_path_matches(scn, path)
    mode = args.mode or ("repeat" if path is not None else "teach")
    if mode == "repeat" and path is None:
        raise _fail(EXIT_ERROR, "missing_path", "serve --mode repeat needs --path")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        run_serve(scn, mode=mode, teach_path=path, port=args.port,
                  rt_factor=args.rt_factor, out_dir=out)
    except TeachAbortError as exc:
        raise _fail(EXIT_TEACH_ABORTED, "teach_aborted", str(exc))
    except PathTooShortError as exc:
        raise _fail(EXIT_ERROR, "path_too_short", str(exc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retrace", description="teach-and-repeat driving simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--param", action="append", default=[], metavar="K=V",
                       help="config override, repeatable")
        p.add_argument("--force", action="store_true",
                       help="overwrite existing outputs")

    p = sub.add_parser("teach", help="record a teach path with the scripted driver")
    common(p)
    p.set_defaults(func=cmd_teach)

    p = sub.add_parser("repeat", help="autonomously retrace a teach path")
    common(p)
    p.add_argument("--path", required=True, help="teach path CSV")
    p.set_defaults(func=cmd_repeat)

    p = sub.add_parser("bench", help="run a suite of scenario x speed-bin repeats")
    common(p, scenario=False)
    p.add_argument("--suite", required=True, help="bench suite JSON file")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="recompute a summary from stored telemetry")
    p.add_argument("--telemetry", required=True, help="telemetry CSV")
    p.add_argument("--out", default=None)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run with the live UI bridge on a TCP port")
    common(p)
    p.add_argument("--path", default=None, help="teach path CSV (repeat mode)")
    p.add_argument("--mode", choices=["teach", "repeat"], default=None)
    p.add_argument("--port", type=int, default=8023)
    p.add_argument("--rt-factor", type=float, default=1.0,
                   help="sim seconds per wall second; 0 = free run")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(json.dumps({"error": exc.error_id, "detail": str(exc)}),
              file=sys.stderr)
        return exc.code
    except Exception as exc:  # stable generic failure surface
        print(json.dumps({"error": "internal", "detail": f"{type(exc).__name__}: {exc}"}),
              file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
