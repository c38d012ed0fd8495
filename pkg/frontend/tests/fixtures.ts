import type { HelloFrame, StateFrame } from "../src/protocol.js";

export function helloFixture(over: Partial<HelloFrame> = {}): HelloFrame {
  return {
    v: 1,
    type: "hello",
    session: "repeat",
    scenario: "fixture",
    dt: 0.005,
    state_rate_hz: 20,
    path_length_m: 150,
    path_preview: [[0, 0], [50, 0], [100, 0]],
    road_width_m: 6,
    ...over,
  };
}

export function stateFixture(over: Partial<StateFrame> = {}): StateFrame {
  return {
    v: 1,
    type: "state",
    session: "repeat",
    t: 1.0,
    truth: { x: 10, y: 0, heading: 0, speed: 5 },
    estimate: {
      x: 10.02, y: 0.01, heading: 0.001,
      loc_mode: "LOCALIZED", lateral_error: 0.01,
    },
    steering: { ref: 0.0, actual: 0.0 },
    velocity: { ref: 5.0, actual: 5.0 },
    guard: { mode: "AUTONOMOUS", reason: "none", led: "BLUE" },
    obstacle: null,
    grid: { cells: [] },
    path: { closest_index: 20, remaining: 140 },
    submap: { index: 0, count: 1, loading: false },
    obstacles: [],
    ...over,
  };
}
