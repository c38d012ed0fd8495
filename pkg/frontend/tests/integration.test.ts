/**
 * End-to-end console tests against the real simulator over its TCP bridge.
 *
 * Covers the full operator loop: teach-driving records the driven path,
 * a placed obstacle slows the repeat within half a simulated second, and
 * the torque slider flips the mode indicator to MANUAL on the next frame.
 */

import { mkdtempSync, writeFileSync, readFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { spawn, type ChildProcess } from "node:child_process";

import { afterEach, describe, expect, it } from "vitest";

import { SessionClient } from "../src/client.js";
import { TcpTransport } from "../src/transport.js";
import { modeIndicator } from "../src/uiState.js";

const REPO_ROOT = resolve(__dirname, "..", "..");
const PYTHON = process.env.RETRACE_PYTHON ?? "python3";

const SCENARIO = {
  name: "console_road",
  road: { kind: "straight", length: 200.0, width: 6.0 },
  teach: { speed: 6.0, max_drive_speed: 7.0 },
  seed: 17,
};

function freePort(): Promise<number> {
  return new Promise((resolvePort, reject) => {
    const srv = createServer();
    srv.once("error", reject);
    srv.listen(0, "127.0.0.1", () => {
      const addr = srv.address();
      if (addr && typeof addr === "object") {
        const port = addr.port;
        srv.close(() => resolvePort(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

let children: ChildProcess[] = [];

function serve(args: string[]): ChildProcess {
  const child = spawn(PYTHON, ["-m", "retrace.cli", "serve", ...args], {
    cwd: REPO_ROOT,
    stdio: ["ignore", "pipe", "pipe"],
  });
  children.push(child);
  return child;
}

function waitExit(child: ChildProcess): Promise<number | null> {
  return new Promise((res) => child.once("exit", (code) => res(code)));
}

afterEach(() => {
  for (const child of children) child.kill("SIGKILL");
  children = [];
});

async function connect(port: number): Promise<SessionClient> {
  const transport = await TcpTransport.connect("127.0.0.1", port, 20_000);
  return new SessionClient(transport);
}

describe("operator console against the live simulator", () => {
  it("teach drive records the driven distance within 2 %", async () => {
    const dir = mkdtempSync(join(tmpdir(), "console-teach-"));
    writeFileSync(join(dir, "scn.json"), JSON.stringify(SCENARIO));
    const port = await freePort();
    const child = serve(["--scenario", join(dir, "scn.json"),
      "--mode", "teach", "--out", dir, "--port", String(port),
      "--rt-factor", "0"]);

    const client = await connect(port);
    const hello = await client.nextFrame((f) => f.type === "hello");
    expect(hello.type === "hello" && hello.session).toBe("teach");

    client.drive({ steer: 0, throttle: 1, brake: 0 });
    await client.nextFrame(
      (f) => f.type === "state" && f.truth.x >= 120.0);
    client.drive({ steer: 0, throttle: 0, brake: 1 });
    client.requestStop();
    const end = await client.nextFrame((f) => f.type === "end");
    expect(end.type === "end" && end.status).toBe("completed");

    const summary = (end.type === "end" ? end.summary : {}) as {
      distance_m: number; teach_length_m: number;
    };
    expect(summary.teach_length_m).toBeGreaterThan(100);
    const deviation = Math.abs(summary.teach_length_m - summary.distance_m)
      / summary.distance_m;
    expect(deviation).toBeLessThan(0.02);

    // the persisted path file agrees with the summary
    const csv = readFileSync(join(dir, "teach_path.csv"), "utf-8");
    const rows = csv.trim().split("\n");
    const last = rows[rows.length - 1]!.split(",");
    expect(Number(last[0])).toBeCloseTo(summary.teach_length_m, 3);

    expect(await waitExit(child)).toBe(0);
    client.close();
  });

  it("surfaces path_too_short when stopping without driving", async () => {
    const dir = mkdtempSync(join(tmpdir(), "console-short-"));
    writeFileSync(join(dir, "scn.json"), JSON.stringify(SCENARIO));
    const port = await freePort();
    const child = serve(["--scenario", join(dir, "scn.json"),
      "--mode", "teach", "--out", dir, "--port", String(port),
      "--rt-factor", "0"]);
    const client = await connect(port);
    await client.nextFrame((f) => f.type === "hello");
    client.requestStop(); // never drove anywhere
    const err = await client.nextFrame((f) => f.type === "error");
    expect(err.type === "error" && err.code).toBe("path_too_short");
    expect(await waitExit(child)).not.toBe(0);
    client.close();
  });

  it("obstacle placement decelerates; torque flips MANUAL", async () => {
    const dir = mkdtempSync(join(tmpdir(), "console-repeat-"));
    writeFileSync(join(dir, "scn.json"), JSON.stringify(SCENARIO));
    // teach headlessly first
    const teach = spawn(PYTHON, ["-m", "retrace.cli", "teach",
      "--scenario", join(dir, "scn.json"), "--out", dir], {
      cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"],
    });
    children.push(teach);
    expect(await waitExit(teach)).toBe(0);

    const port = await freePort();
    const child = serve(["--scenario", join(dir, "scn.json"),
      "--mode", "repeat", "--path", join(dir, "teach_path.csv"),
      "--out", dir, "--port", String(port), "--rt-factor", "0", "--force"]);

    const client = await connect(port);
    await client.nextFrame((f) => f.type === "hello");

    // wait for cruise, then drop a box on the path ahead
    const cruise = await client.nextFrame(
      (f) => f.type === "state" && f.velocity.actual > 5.5);
    const x0 = cruise.type === "state" ? cruise.truth.x : 0;
    const t0 = cruise.type === "state" ? cruise.t : 0;
    client.placeObstacle({ id: "ui-1", x: x0 + 13.0, y: 0, h: 2.0 });
    await client.nextFrame(
      (f) => f.type === "ack" && f.op === "place_obstacle");

    const slowed = await client.nextFrame(
      (f) => f.type === "state" && f.velocity.ref < 4.0);
    const tSlow = slowed.type === "state" ? slowed.t : Infinity;
    expect(tSlow - t0).toBeLessThanOrEqual(0.5);
    expect(modeIndicator(client.state)).toBe("AUTONOMOUS");

    // clear it and let the run recover
    client.removeObstacle("ui-1");
    const resumed = await client.nextFrame(
      (f) => f.type === "state" && f.velocity.actual > 5.0 && f.t > tSlow);
    const tResume = resumed.type === "state" ? resumed.t : 0;

    // torque slider at 8 Nm: MANUAL on the next state frame
    client.steerTorque(8.0);
    const tripped = await client.nextFrame(
      (f) => f.type === "state" && f.t > tResume
        && f.guard.reason === "torque_override");
    expect(tripped.type === "state").toBe(true);
    expect(modeIndicator(client.state)).toBe("MANUAL");

    const end = await client.nextFrame((f) => f.type === "end");
    expect(end.type === "end" && end.status).toBe("manual");
    expect(await waitExit(child)).toBe(0);
    client.close();
  });
});
