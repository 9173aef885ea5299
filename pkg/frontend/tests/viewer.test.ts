/** Viewer/CLI frame equality: for fixed poses on the two-plane scene, the
 * frame the viewer displays must be the renderer's verbatim — depth and
 * alpha bit-exact against cmd_render's files, rgb equal after the stored
 * formats' 8-bit quantization rule.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { PNG } from "pngjs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import type { ChildProcess } from "node:child_process";

import { readPfm } from "../src/pfm.js";
import { BridgeClient, RenderClient } from "../src/viewer/render.js";
import { ViewerApp, fetchFrame } from "../src/viewer/server.js";
import { cameraToWorld, handleInput, initialState, ViewerState } from "../src/viewer/state.js";
import { rgbdaPlanes } from "../src/tensor.js";
import { SCENE, camerasJson, identityPose, spawnRenderService, twoPlanePly } from "./helpers.js";

const FILTER = { levels: 3, filterStrength: 0.5, edgeThreshold: 0.25 };

let dir: string;
let service: { child: ChildProcess; host: string; port: number };
let client: RenderClient;

/** Five fixed poses: identity plus four key/drag walks from it. */
function fixedStates(): ViewerState[] {
  const base = initialState({ bridgeAvailable: false, maxLevels: 5, filter: FILTER });
  const states = [base];
  let s = base;
  s = handleInput(s, { kind: "key", key: "w" }, 0.35);
  states.push(s);
  s = handleInput(s, { kind: "key", key: "d" }, 0.2);
  states.push(s);
  s = handleInput(s, { kind: "drag", dx: 14, dy: 6 });
  states.push(s);
  s = handleInput(s, { kind: "drag", dx: -30, dy: -4 });
  s = handleInput(s, { kind: "key", key: "e" }, 0.15);
  states.push(s);
  return states;
}

beforeAll(async () => {
  dir = mkdtempSync(join(tmpdir(), "viewer-"));
  twoPlanePly(join(dir, "scene.ply"), SCENE);
  const frames = fixedStates().map((state, i) => ({ id: `p${i}`, c2w: cameraToWorld(state) }));
  camerasJson(join(dir, "cams.json"), SCENE, frames);
  service = await spawnRenderService(join(dir, "scene.ply"), join(dir, "cams.json"));
  client = new RenderClient(service.host, service.port);
});

afterAll(() => {
  client.close();
  service.child.kill();
  rmSync(dir, { recursive: true, force: true });
});

function pngBytes(path: string, channels: 3 | 1): Uint8Array {
  const png = PNG.sync.read(readFileSync(path));
  const out = new Uint8Array(png.width * png.height * channels);
  for (let i = 0; i < png.width * png.height; i++) {
    for (let c = 0; c < channels; c++) out[channels * i + c] = png.data[4 * i + c];
  }
  return out;
}

describe("viewer frames are the renderer's frames", () => {
  it("5 fixed poses match cmd_render bit for bit (depth, alpha, quantized rgb)", async () => {
    const states = fixedStates();
    for (let i = 0; i < states.length; i++) {
      const state = { ...states[i], mode: "filtered" as const };
      const result = await fetchFrame(state, { renderClient: client, bridge: null, maxLevels: 5 });
      const out = join(dir, `cli${i}`);
      execFileSync("lidarsplat", [
        "render", "--cloud", join(dir, "scene.ply"), "--cameras", join(dir, "cams.json"),
        "--frame-id", `p${i}`, "--out", out,
        "--filter-strength", String(FILTER.filterStrength),
        "--levels", String(FILTER.levels),
        "--edge-threshold", String(FILTER.edgeThreshold),
      ]);
      const planes = rgbdaPlanes(result.frame);
      const pfm = readPfm(`${out}.filtered.pfm`);
      expect(pfm.width).toBe(result.frame.width);
      // depth: bit-exact float32
      expect(Buffer.from(planes.depth.buffer, planes.depth.byteOffset, planes.depth.byteLength)
        .equals(Buffer.from(pfm.data.buffer))).toBe(true);
      // alpha: exact
      const mask = pngBytes(`${out}.filtered.a.png`, 1);
      for (let p = 0; p < mask.length; p++) {
        expect(planes.alpha[p]).toBe(mask[p] > 127 ? 1 : 0);
      }
      // rgb: equal under the stored format's round-to-8-bit rule
      const filePng = pngBytes(`${out}.filtered.png`, 3);
      const px = result.frame.width * result.frame.height;
      for (let p = 0; p < px; p++) {
        expect(Math.round(planes.r[p] * 255)).toBe(filePng[3 * p]);
        expect(Math.round(planes.g[p] * 255)).toBe(filePng[3 * p + 1]);
        expect(Math.round(planes.b[p] * 255)).toBe(filePng[3 * p + 2]);
      }
    }
  }, 300_000);

  it("filter identity at maximum strength: filtered equals raw", async () => {
    const state = {
      ...initialState({ bridgeAvailable: false, maxLevels: 5,
                        filter: { ...FILTER, filterStrength: 1e30 } }),
      mode: "filtered" as const,
    };
    const filtered = await fetchFrame(state, { renderClient: client, bridge: null, maxLevels: 5 });
    const raw = await fetchFrame({ ...state, mode: "raw" }, { renderClient: client, bridge: null, maxLevels: 5 });
    expect(Buffer.from(filtered.frame.planes.buffer).equals(Buffer.from(raw.frame.planes.buffer))).toBe(true);
  });

  it("bridge timeout degrades neural mode to filtered with a notice", async () => {
    const dead = new BridgeClient("127.0.0.1", 1, 300);
    const app = new ViewerApp({ renderClient: client, bridge: dead, maxLevels: 5, filter: FILTER });
    app.state = { ...app.state, mode: "neural" };
    const result = await app.currentFrame();
    expect(result.degraded).toBe(true);
    expect(app.state.mode).toBe("filtered");
    expect(app.state.notice).toMatch(/degraded/);
  });

  it("screenshot writes the raw tensor file via the shared format", async () => {
    const app = new ViewerApp({ renderClient: client, bridge: null, maxLevels: 5, filter: FILTER });
    await app.currentFrame();
    const shot = join(dir, "shot.rtf");
    app.screenshot(shot);
    const bytes = readFileSync(shot);
    expect(bytes.subarray(0, 4).toString("ascii")).toBe("RGDA");
  });
});
