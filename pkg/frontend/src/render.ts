/**
 * Canvas 2D top-down rendering. Pure draw functions over UiState; the
 * camera follows the vehicle.
 */

import type { UiState } from "./uiState.js";
import { isStale, modeIndicator, renderedObstacles } from "./uiState.js";

export interface Camera {
  cx: number;       // world meters at the view center
  cy: number;
  pxPerMeter: number;
}

export function cameraOn(state: UiState, pxPerMeter = 8): Camera {
  const truth = state.latest?.truth;
  return { cx: truth?.x ?? 0, cy: truth?.y ?? 0, pxPerMeter };
}

function toPx(cam: Camera, w: number, h: number, x: number, y: number) {
  // world x to the right, world y up
  return [
    w / 2 + (x - cam.cx) * cam.pxPerMeter,
    h / 2 - (y - cam.cy) * cam.pxPerMeter,
  ] as const;
}

export function draw(ctx: CanvasRenderingContext2D, state: UiState,
                     nowMs: number): void {
  const { width: w, height: h } = ctx.canvas;
  const cam = cameraOn(state);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, w, h);

  const hello = state.hello;
  if (hello?.path_preview) {
    // road ribbon then the reference line
    ctx.strokeStyle = "#2a3442";
    ctx.lineWidth = hello.road_width_m * cam.pxPerMeter;
    ctx.lineCap = "round";
    pathStroke(ctx, cam, w, h, hello.path_preview);
    ctx.strokeStyle = "#5b88c9";
    ctx.lineWidth = 1.5;
    pathStroke(ctx, cam, w, h, hello.path_preview);
  }

  const latest = state.latest;
  if (!latest) return;

  // occupied grid cells, vehicle frame -> world via the estimate pose
  const est = latest.estimate;
  const cosH = Math.cos(est.heading);
  const sinH = Math.sin(est.heading);
  ctx.fillStyle = latest.obstacle?.critical ? "#ff5544" : "#e0a030";
  for (const [gx, gy] of latest.grid.cells) {
    const wx = est.x + cosH * gx - sinH * gy;
    const wy = est.y + sinH * gx + cosH * gy;
    const [px, py] = toPx(cam, w, h, wx, wy);
    ctx.fillRect(px - 2, py - 2, 4, 4);
  }

  // placed obstacles (server echo only)
  ctx.strokeStyle = "#ff8866";
  ctx.lineWidth = 1.5;
  for (const ob of renderedObstacles(state)) {
    const [px, py] = toPx(cam, w, h, ob.x, ob.y);
    ctx.strokeRect(px - (ob.sx / 2) * cam.pxPerMeter,
                   py - (ob.sy / 2) * cam.pxPerMeter,
                   ob.sx * cam.pxPerMeter, ob.sy * cam.pxPerMeter);
  }

  drawVehicle(ctx, cam, w, h, latest.truth.x, latest.truth.y,
              latest.truth.heading, "#6fe38f");
  drawVehicle(ctx, cam, w, h, est.x, est.y, est.heading, "#6fe38f55");

  drawHud(ctx, state, nowMs);
}

function pathStroke(ctx: CanvasRenderingContext2D, cam: Camera, w: number,
                    h: number, pts: ReadonlyArray<readonly [number, number]>) {
  ctx.beginPath();
  pts.forEach(([x, y], i) => {
    const [px, py] = toPx(cam, w, h, x, y);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
}

function drawVehicle(ctx: CanvasRenderingContext2D, cam: Camera, w: number,
                     h: number, x: number, y: number, heading: number,
                     color: string) {
  const [px, py] = toPx(cam, w, h, x, y);
  ctx.save();
  ctx.translate(px, py);
  ctx.rotate(-heading);
  ctx.fillStyle = color;
  ctx.beginPath();
  const s = cam.pxPerMeter;
  ctx.moveTo(2.2 * s, 0);
  ctx.lineTo(-0.8 * s, 0.8 * s);
  ctx.lineTo(-0.8 * s, -0.8 * s);
  ctx.closePath();
  ctx.fill();
  ctx.restore();
}

function drawHud(ctx: CanvasRenderingContext2D, state: UiState,
                 nowMs: number) {
  const latest = state.latest;
  if (!latest) return;
  const led = latest.guard.led;
  ctx.fillStyle = led === "BLUE" ? "#4a7dff" : "#3ddc5a";
  ctx.beginPath();
  ctx.arc(18, 18, 8, 0, 2 * Math.PI);
  ctx.fill();

  ctx.fillStyle = "#dde4ee";
  ctx.font = "13px monospace";
  const kmh = latest.velocity.actual * 3.6;
  const lines = [
    `${modeIndicator(state)}  (${latest.guard.reason})`,
    `t ${latest.t.toFixed(1)} s   v ${kmh.toFixed(1)} km/h  ` +
    `ref ${(latest.velocity.ref * 3.6).toFixed(1)}`,
    `loc ${latest.estimate.loc_mode}   lat ` +
    `${latest.estimate.lateral_error.toFixed(2)} m`,
    `submap ${latest.submap.index + 1}/${latest.submap.count}` +
    (latest.submap.loading ? " loading" : ""),
    latest.obstacle?.distance != null
      ? `obstacle ${latest.obstacle.distance.toFixed(1)} m` +
        (latest.obstacle.held ? " (held)" : "") +
        (latest.obstacle.creep ? " creep" : "")
      : "no obstacle",
  ];
  lines.forEach((text, i) => ctx.fillText(text, 34, 14 + 16 * i));

  if (isStale(state, nowMs)) {
    ctx.fillStyle = "#ff5544";
    ctx.fillText("STALE CONNECTION", 34, 14 + 16 * lines.length);
  }
  if (state.endStatus) {
    ctx.fillStyle = "#ffd75e";
    ctx.fillText(`run ended: ${state.endStatus}`, 34, 14 + 16 * (lines.length + 1));
  }

  // speed trace sparkline along the bottom
  const trace = state.speedTrace;
  if (trace.length > 1) {
    const w = ctx.canvas.width;
    const h = ctx.canvas.height;
    const vmax = Math.max(...trace.map((s) => Math.max(s.actual, s.ref)), 1);
    ctx.strokeStyle = "#5b88c9";
    ctx.beginPath();
    trace.forEach((s, i) => {
      const px = w - trace.length + i;
      const py = h - 8 - (s.ref / vmax) * 60;
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    ctx.strokeStyle = "#6fe38f";
    ctx.beginPath();
    trace.forEach((s, i) => {
      const px = w - trace.length + i;
      const py = h - 8 - (s.actual / vmax) * 60;
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }
}
