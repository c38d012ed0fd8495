/**
 * Browser entry point. Connects through the ws bridge
 * (`npm run bridge` relays ws://localhost:8024 to the simulator's TCP
 * port), wires keyboard driving, map clicks, and the operator controls.
 */

import { SessionClient } from "./client.js";
import { KeyboardDriver, RateLimiter } from "./input.js";
import { cameraOn, draw } from "./render.js";
import { WsTransport } from "./transport.js";

const WS_URL = new URLSearchParams(location.search).get("ws")
  ?? "ws://127.0.0.1:8024";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("view");
const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("canvas 2d unavailable");

const client = new SessionClient(new WsTransport(WS_URL));
const driver = new KeyboardDriver();
const driveLimiter = new RateLimiter(20);
let obstacleSeq = 0;

window.addEventListener("keydown", (ev) => driver.keyDown(ev.key));
window.addEventListener("keyup", (ev) => driver.keyUp(ev.key));

canvas.addEventListener("click", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const cam = cameraOn(client.state);
  const x = cam.cx + (ev.clientX - rect.left - canvas.width / 2)
    / cam.pxPerMeter;
  const y = cam.cy - (ev.clientY - rect.top - canvas.height / 2)
    / cam.pxPerMeter;
  client.placeObstacle({ id: `ui-${obstacleSeq++}`, x, y, h: 1.5 });
});

el<HTMLButtonElement>("stop").addEventListener("click",
  () => client.requestStop());
el<HTMLButtonElement>("clear").addEventListener("click", () => {
  for (const ob of client.state.latest?.obstacles ?? []) {
    client.removeObstacle(ob.id);
  }
});

const torque = el<HTMLInputElement>("torque");
torque.addEventListener("input", () => {
  client.steerTorque(Number(torque.value));
  el<HTMLSpanElement>("torque-value").textContent = `${torque.value} Nm`;
});

el<HTMLButtonElement>("apply-param").addEventListener("click", () => {
  const key = el<HTMLInputElement>("param-key").value.trim();
  const value = Number(el<HTMLInputElement>("param-value").value);
  if (key && Number.isFinite(value)) client.setParam(key, value);
});

function tick(nowMs: number) {
  if (client.state.hello?.session === "teach"
      && client.state.connection === "live"
      && driveLimiter.ready(nowMs)) {
    client.drive(driver.sample(nowMs));
  }
  draw(ctx!, client.state, nowMs);
  requestAnimationFrame(tick);
}

requestAnimationFrame(tick);
