/** Browser viewer: an express app owning the ViewerState, fetching frames
 * from the renderer's serve endpoint (and optionally the neural bridge),
 * and shipping RGBA buffers to a canvas page. All rendering logic lives in
 * the renderer; this process adds none.
 */

import { writeFileSync } from "node:fs";
import express from "express";
import type { Server } from "node:http";

import {
  MAGIC_RGBDA,
  RawTensorFrame,
  encodeFrame,
  makeFrame,
  rgbdaPlanes,
} from "../tensor.js";
import { BridgeClient, RenderClient, renderRequestFor } from "./render.js";
import { InputEvent, ViewerState, cameraToWorld, handleInput, initialState } from "./state.js";
import { PAGE_HTML } from "./page.js";

export interface ViewerOptions {
  renderClient: RenderClient;
  bridge: BridgeClient | null;
  maxLevels: number;
  filter?: { levels?: number; filterStrength?: number; edgeThreshold?: number };
}

export interface FrameResult {
  frame: RawTensorFrame;      // what the renderer produced (RGDA)
  displayRgb: Float32Array;   // plane-major rgb actually displayed
  degraded: boolean;          // neural requested but bridge failed
}

/** Fetch the frame for a state: raw/filtered via the render service; neural
 * additionally round-trips the filtered frame through the bridge, degrading
 * to filtered on any bridge failure. */
export async function fetchFrame(state: ViewerState, opts: ViewerOptions): Promise<FrameResult> {
  const upstreamMode = state.mode === "raw" ? "raw" : "filtered";
  const request = renderRequestFor(cameraToWorld(state), upstreamMode, state.filter);
  const frame = await opts.renderClient.render(request);
  const px = frame.width * frame.height;
  if (state.mode !== "neural" || !opts.bridge) {
    return { frame, displayRgb: frame.planes.slice(0, 3 * px), degraded: false };
  }
  try {
    const reply = await opts.bridge.reconstruct(frame);
    if (reply.width !== frame.width || reply.height !== frame.height) {
      throw new Error("bridge reply dimensions mismatch");
    }
    return { frame, displayRgb: reply.planes, degraded: false };
  } catch {
    return { frame, displayRgb: frame.planes.slice(0, 3 * px), degraded: true };
  }
}

export function frameToRgba(rgb: Float32Array, px: number): Buffer {
  const out = Buffer.alloc(px * 4);
  for (let i = 0; i < px; i++) {
    out[4 * i] = Math.max(0, Math.min(255, Math.round(rgb[i] * 255)));
    out[4 * i + 1] = Math.max(0, Math.min(255, Math.round(rgb[px + i] * 255)));
    out[4 * i + 2] = Math.max(0, Math.min(255, Math.round(rgb[2 * px + i] * 255)));
    out[4 * i + 3] = 255;
  }
  return out;
}

export class ViewerApp {
  state: ViewerState;
  lastFrame: RawTensorFrame | null = null;

  constructor(private opts: ViewerOptions) {
    this.state = initialState({
      bridgeAvailable: opts.bridge !== null,
      maxLevels: opts.maxLevels,
      filter: opts.filter,
    });
  }

  applyEvents(events: InputEvent[], dt: number): ViewerState {
    for (const ev of events) this.state = handleInput(this.state, ev, dt);
    return this.state;
  }

  async currentFrame(): Promise<FrameResult> {
    const t0 = Date.now();
    const result = await fetchFrame(this.state, this.opts);
    this.state = handleInput(this.state, { kind: "frame-rendered", frameMs: Date.now() - t0 });
    if (result.degraded) {
      this.state = { ...this.state, mode: "filtered", notice: "bridge unreachable: degraded to filtered" };
    }
    this.lastFrame = result.frame;
    return result;
  }

  /** Screenshot: persist the last displayed RGBDA frame as a raw tensor file. */
  screenshot(path: string): void {
    if (!this.lastFrame) throw new Error("no frame rendered yet");
    writeFileSync(path, encodeFrame(this.lastFrame));
  }

  router(): express.Router {
    const r = express.Router();
    r.use(express.json());
    r.get("/", (_req, res) => {
      res.type("html").send(PAGE_HTML);
    });
    r.get("/api/state", (_req, res) => {
      res.json(this.state);
    });
    r.post("/api/input", (req, res) => {
      const { events = [], dt = 1 / 60 } = req.body ?? {};
      res.json(this.applyEvents(events, dt));
    });
    r.get("/api/frame.bin", (_req, res) => {
      void this.currentFrame()
        .then((result) => {
          const { width, height } = result.frame;
          const header = Buffer.alloc(8);
          header.writeUInt32LE(width, 0);
          header.writeUInt32LE(height, 4);
          res.type("application/octet-stream");
          res.send(Buffer.concat([header, frameToRgba(result.displayRgb, width * height)]));
        })
        .catch((e) => res.status(502).json({ error: (e as Error).message }));
    });
    r.post("/api/screenshot", (req, res) => {
      try {
        const path = req.body?.path ?? `screenshot-${Date.now()}.rtf`;
        this.screenshot(path);
        res.json({ written: path });
      } catch (e) {
        res.status(409).json({ error: (e as Error).message });
      }
    });
    return r;
  }

  listen(port: number, host = "127.0.0.1"): Promise<Server> {
    const app = express();
    app.use(this.router());
    return new Promise((resolve) => {
      const server = app.listen(port, host, () => resolve(server));
    });
  }
}

export { makeFrame, MAGIC_RGBDA, rgbdaPlanes };
