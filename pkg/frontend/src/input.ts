/**
 * Keyboard teach-driving: key state to drive frames, rate-limited to 20 Hz.
 *
 * Steering ramps toward full lock while a key is held and re-centers on
 * release, which is far more drivable than bang-bang steering at 20 Hz.
 */

import type { DriveInput } from "./protocol.js";

export class RateLimiter {
  private readonly intervalMs: number;
  private lastMs = -Infinity;

  constructor(hz: number) {
    this.intervalMs = 1000 / hz;
  }

  ready(nowMs: number): boolean {
    if (nowMs - this.lastMs >= this.intervalMs) {
      this.lastMs = nowMs;
      return true;
    }
    return false;
  }
}

const STEER_RATE = 2.0;    // full-scale per second while held
const CENTER_RATE = 3.0;   // re-centering rate

export class KeyboardDriver {
  private pressed = new Set<string>();
  private steer = 0;
  private lastUpdateMs: number | null = null;

  keyDown(key: string): void {
    this.pressed.add(key.toLowerCase());
  }

  keyUp(key: string): void {
    this.pressed.delete(key.toLowerCase());
  }

  /** Advance the steering ramp and read the current drive input. */
  sample(nowMs: number): DriveInput {
    const dt = this.lastUpdateMs === null
      ? 0 : Math.min((nowMs - this.lastUpdateMs) / 1000, 0.25);
    this.lastUpdateMs = nowMs;

    const left = this.pressed.has("a") || this.pressed.has("arrowleft");
    const right = this.pressed.has("d") || this.pressed.has("arrowright");
    if (left && !right) {
      this.steer = Math.min(1, this.steer + STEER_RATE * dt);
    } else if (right && !left) {
      this.steer = Math.max(-1, this.steer - STEER_RATE * dt);
    } else if (this.steer !== 0) {
      const sign = Math.sign(this.steer);
      this.steer -= sign * CENTER_RATE * dt;
      if (Math.sign(this.steer) !== sign) this.steer = 0;
    }

    const throttle = this.pressed.has("w") || this.pressed.has("arrowup")
      ? 1 : 0;
    const brake = this.pressed.has("s") || this.pressed.has("arrowdown")
      ? 1 : 0;
    return { steer: this.steer, throttle, brake };
  }
}
