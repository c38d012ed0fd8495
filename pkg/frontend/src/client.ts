/**
 * Session client: binds a transport to the protocol and the UI state.
 *
 * All simulation truth lives server-side; this class only forwards operator
 * intents and folds inbound frames into the reducer.
 */

import { clientFrames, parseServerLine } from "./protocol.js";
import type { DriveInput, ObstacleSpec, ServerFrame } from "./protocol.js";
import type { FrameTransport } from "./transport.js";
import { applyFrame, initialUiState, markClosed } from "./uiState.js";
import type { UiState } from "./uiState.js";

type Listener = (state: UiState, frame: ServerFrame | null) => void;

export class SessionClient {
  state: UiState = initialUiState();
  private listeners: Listener[] = [];
  private waiters: Array<{
    predicate: (f: ServerFrame) => boolean;
    resolve: (f: ServerFrame) => void;
    reject: (e: Error) => void;
  }> = [];

  constructor(private transport: FrameTransport,
              private now: () => number = () => Date.now()) {
    transport.onLine((line) => this.handleLine(line));
    transport.onClose(() => {
      this.state = markClosed(this.state);
      this.emit(null);
      const closed = new Error("connection closed");
      for (const w of this.waiters.splice(0)) w.reject(closed);
    });
  }

  private handleLine(line: string): void {
    const frame = parseServerLine(line);
    if (!frame) return; // unknown frames are ignored, never fatal
    this.state = applyFrame(this.state, frame, this.now());
    this.emit(frame);
    this.waiters = this.waiters.filter((w) => {
      if (w.predicate(frame)) {
        w.resolve(frame);
        return false;
      }
      return true;
    });
  }

  private emit(frame: ServerFrame | null): void {
    for (const cb of this.listeners) cb(this.state, frame);
  }

  onUpdate(cb: Listener): void {
    this.listeners.push(cb);
  }

  /** Resolves with the first frame matching the predicate. */
  nextFrame(predicate: (f: ServerFrame) => boolean,
            timeoutMs = 60_000): Promise<ServerFrame> {
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error("timed out waiting for frame")), timeoutMs);
      this.waiters.push({
        predicate,
        resolve: (f) => {
          clearTimeout(timer);
          resolve(f);
        },
        reject: (e) => {
          clearTimeout(timer);
          reject(e);
        },
      });
    });
  }

  drive(input: DriveInput): void {
    this.transport.send(clientFrames.drive(input));
  }

  placeObstacle(spec: ObstacleSpec): void {
    this.transport.send(clientFrames.placeObstacle(spec));
  }

  removeObstacle(id: string): void {
    this.transport.send(clientFrames.removeObstacle(id));
  }

  steerTorque(nm: number): void {
    this.transport.send(clientFrames.steerTorque(nm));
  }

  requestStop(): void {
    this.transport.send(clientFrames.requestStop());
  }

  setParam(key: string, value: number): void {
    this.transport.send(clientFrames.setParam(key, value));
  }

  close(): void {
    try {
      this.transport.send(clientFrames.bye());
    } catch {
      // already gone
    }
    this.transport.close();
  }
}
