/**
 * Wire protocol for the simulator's UI bridge.
 *
 * Frames are newline-delimited JSON, version-tagged with `v: 1`. The server
 * streams `hello`, `state` (20 Hz), `ack`, `error`, and a final `end`;
 * the client sends `drive`, `place_obstacle`, `remove_obstacle`,
 * `steer_torque`, `request_stop`, `set_param`, and `bye`.
 */

import { z } from "zod";

export const PROTOCOL_VERSION = 1;

const pose = z.object({
  x: z.number(),
  y: z.number(),
  heading: z.number(),
});

export const helloFrame = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("hello"),
  session: z.enum(["teach", "repeat"]),
  scenario: z.string(),
  dt: z.number(),
  state_rate_hz: z.number(),
  path_length_m: z.number().nullable(),
  path_preview: z.array(z.tuple([z.number(), z.number()])).nullable(),
  road_width_m: z.number(),
});

export const stateFrame = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("state"),
  session: z.string(),
  t: z.number(),
  truth: pose.extend({ speed: z.number() }),
  estimate: pose.extend({
    loc_mode: z.enum(["LOCALIZED", "DEAD_RECKONING", "LOST"]),
    lateral_error: z.number(),
  }),
  steering: z.object({ ref: z.number(), actual: z.number() }),
  velocity: z.object({ ref: z.number(), actual: z.number() }),
  guard: z.object({
    mode: z.enum(["AUTONOMOUS", "EMERGENCY_STOPPING", "MANUAL",
      "MISSION_COMPLETE"]),
    reason: z.string(),
    led: z.enum(["BLUE", "GREEN"]),
  }),
  obstacle: z.object({
    distance: z.number().nullable(),
    critical: z.boolean(),
    held: z.boolean(),
    creep: z.boolean(),
  }).nullable(),
  grid: z.object({ cells: z.array(z.tuple([z.number(), z.number()])) }),
  path: z.object({ closest_index: z.number(), remaining: z.number() }),
  submap: z.object({
    index: z.number(),
    count: z.number(),
    loading: z.boolean(),
  }),
  obstacles: z.array(z.object({
    id: z.string(),
    x: z.number(),
    y: z.number(),
    sx: z.number(),
    sy: z.number(),
    h: z.number(),
  })),
});

export const ackFrame = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("ack"),
  op: z.string(),
  id: z.string().nullable().optional(),
  key: z.string().nullable().optional(),
});

export const errorFrame = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("error"),
  code: z.string(),
}).passthrough();

export const endFrame = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("end"),
  status: z.string(),
  summary: z.record(z.unknown()),
});

export const serverFrame = z.discriminatedUnion("type", [
  helloFrame, stateFrame, ackFrame, errorFrame, endFrame,
]);

export type HelloFrame = z.infer<typeof helloFrame>;
export type StateFrame = z.infer<typeof stateFrame>;
export type AckFrame = z.infer<typeof ackFrame>;
export type ErrorFrame = z.infer<typeof errorFrame>;
export type EndFrame = z.infer<typeof endFrame>;
export type ServerFrame = z.infer<typeof serverFrame>;

export interface DriveInput {
  steer: number;     // -1 .. 1, positive left
  throttle: number;  // 0 .. 1
  brake: number;     // 0 .. 1
}

export interface ObstacleSpec {
  id: string;
  x: number;
  y: number;
  sx?: number;
  sy?: number;
  h?: number;
}

/** Parse one NDJSON line into a typed server frame; null if malformed. */
export function parseServerLine(line: string): ServerFrame | null {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return null;
  }
  const result = serverFrame.safeParse(raw);
  return result.success ? result.data : null;
}

export function encodeFrame(frame: Record<string, unknown>): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, ...frame }) + "\n";
}

export const clientFrames = {
  drive(input: DriveInput): string {
    return encodeFrame({ type: "drive", ...input });
  },
  placeObstacle(spec: ObstacleSpec): string {
    return encodeFrame({
      type: "place_obstacle", id: spec.id, x: spec.x, y: spec.y,
      sx: spec.sx ?? 1.0, sy: spec.sy ?? 1.0, h: spec.h ?? 1.0,
    });
  },
  removeObstacle(id: string): string {
    return encodeFrame({ type: "remove_obstacle", id });
  },
  steerTorque(nm: number): string {
    return encodeFrame({ type: "steer_torque", nm });
  },
  requestStop(): string {
    return encodeFrame({ type: "request_stop" });
  },
  setParam(key: string, value: number): string {
    return encodeFrame({ type: "set_param", key, value });
  },
  bye(): string {
    return encodeFrame({ type: "bye" });
  },
};
