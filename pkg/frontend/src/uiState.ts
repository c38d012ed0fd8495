/**
 * Pure console state: everything rendered originates from server frames.
 *
 * The reducer owns no physics. Obstacles render only once the server echoes
 * them back in a state frame (acknowledged placement), and a connection is
 * flagged stale after one second without frames.
 */

import type { HelloFrame, ServerFrame, StateFrame } from "./protocol.js";

export const STALE_AFTER_MS = 1000;

export interface SpeedSample {
  t: number;
  actual: number;
  ref: number;
}

export interface UiState {
  connection: "connecting" | "live" | "ended" | "closed";
  hello: HelloFrame | null;
  latest: StateFrame | null;
  endStatus: string | null;
  endSummary: Record<string, unknown> | null;
  lastError: string | null;
  /** ids we asked to place and the server acknowledged */
  ackedObstacles: Set<string>;
  speedTrace: SpeedSample[];
  lastFrameAtMs: number;
}

export function initialUiState(): UiState {
  return {
    connection: "connecting",
    hello: null,
    latest: null,
    endStatus: null,
    endSummary: null,
    lastError: null,
    ackedObstacles: new Set(),
    speedTrace: [],
    lastFrameAtMs: 0,
  };
}

const TRACE_LIMIT = 600; // 30 s of 20 Hz samples

export function applyFrame(state: UiState, frame: ServerFrame,
                           nowMs: number): UiState {
  const next: UiState = { ...state, lastFrameAtMs: nowMs };
  switch (frame.type) {
    case "hello":
      next.hello = frame;
      next.connection = "live";
      break;
    case "state": {
      next.latest = frame;
      const trace = state.speedTrace.concat({
        t: frame.t,
        actual: frame.velocity.actual,
        ref: frame.velocity.ref,
      });
      next.speedTrace = trace.length > TRACE_LIMIT
        ? trace.slice(trace.length - TRACE_LIMIT) : trace;
      break;
    }
    case "ack":
      if (frame.op === "place_obstacle" && frame.id) {
        next.ackedObstacles = new Set(state.ackedObstacles).add(frame.id);
      }
      if (frame.op === "remove_obstacle" && frame.id) {
        const acked = new Set(state.ackedObstacles);
        acked.delete(frame.id);
        next.ackedObstacles = acked;
      }
      break;
    case "error":
      next.lastError = frame.code;
      break;
    case "end":
      next.endStatus = frame.status;
      next.endSummary = frame.summary;
      next.connection = "ended";
      break;
  }
  return next;
}

export function markClosed(state: UiState): UiState {
  return {
    ...state,
    connection: state.connection === "ended" ? "ended" : "closed",
  };
}

export function isStale(state: UiState, nowMs: number): boolean {
  return state.connection === "live"
    && nowMs - state.lastFrameAtMs > STALE_AFTER_MS;
}

/**
 * Operator-facing mode label. A steering-wheel intervention reads MANUAL
 * from the moment it trips, even while the emergency stop is still
 * bringing the car to rest.
 */
export function modeIndicator(state: UiState): string {
  const latest = state.latest;
  if (!latest) return "-";
  if (latest.guard.reason === "torque_override") return "MANUAL";
  return latest.guard.mode;
}

/** Obstacles to draw: only those the server echoed back. */
export function renderedObstacles(state: UiState) {
  return state.latest?.obstacles ?? [];
}
