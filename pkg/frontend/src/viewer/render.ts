/** Clients for the two upstream services the viewer composes:
 * the renderer's serve endpoint (JSON-line request -> RGDA frame) and the
 * neural bridge (RGDA -> RGB0). One request in flight per connection.
 */

import { Socket, createConnection } from "node:net";

import { RawTensorFrame, encodeFrame, readFrame } from "../tensor.js";
import { FilterSettings } from "./state.js";

export interface RenderRequest {
  camera_to_world: number[];
  mode: "raw" | "filtered";
  filter_strength?: number;
  levels?: number;
  edge_threshold?: number;
}

function connect(host: string, port: number, timeoutMs: number): Promise<Socket> {
  return new Promise((resolve, reject) => {
    const sock = createConnection({ host, port });
    const timer = setTimeout(() => {
      sock.destroy();
      reject(new Error(`connect to ${host}:${port} timed out`));
    }, timeoutMs);
    sock.once("connect", () => {
      clearTimeout(timer);
      resolve(sock);
    });
    sock.once("error", (e) => {
      clearTimeout(timer);
      reject(e);
    });
  });
}

export class RenderClient {
  private sock: Socket | null = null;
  private queue: Promise<unknown> = Promise.resolve();

  constructor(
    private host: string,
    private port: number,
    private timeoutMs = 30_000
  ) {}

  private async socket(): Promise<Socket> {
    if (!this.sock || this.sock.destroyed) {
      this.sock = await connect(this.host, this.port, this.timeoutMs);
      this.sock.on("error", () => this.sock?.destroy());
    }
    return this.sock;
  }

  /** Render one frame; requests are serialized over the shared connection. */
  render(request: RenderRequest): Promise<RawTensorFrame> {
    const run = this.queue.then(async () => {
      const sock = await this.socket();
      sock.write(JSON.stringify(request) + "\n");
      return readFrame(sock, this.timeoutMs);
    });
    this.queue = run.catch(() => undefined);
    return run;
  }

  close(): void {
    this.sock?.destroy();
    this.sock = null;
  }
}

export class BridgeClient {
  constructor(
    private host: string,
    private port: number,
    private timeoutMs = 500
  ) {}

  /** One round trip per call; never blocks longer than the timeout. */
  async reconstruct(frame: RawTensorFrame): Promise<RawTensorFrame> {
    const sock = await connect(this.host, this.port, this.timeoutMs);
    try {
      sock.write(encodeFrame(frame));
      return await readFrame(sock, this.timeoutMs);
    } finally {
      sock.destroy();
    }
  }

  async reachable(): Promise<boolean> {
    try {
      const sock = await connect(this.host, this.port, this.timeoutMs);
      sock.destroy();
      return true;
    } catch {
      return false;
    }
  }
}

export function renderRequestFor(
  cameraToWorld: number[],
  mode: "raw" | "filtered",
  filter: FilterSettings
): RenderRequest {
  if (mode === "raw") return { camera_to_world: cameraToWorld, mode };
  return {
    camera_to_world: cameraToWorld,
    mode,
    filter_strength: filter.filterStrength,
    levels: filter.levels,
    edge_threshold: filter.edgeThreshold,
  };
}

export function parseEndpoint(endpoint: string): { host: string; port: number } {
  const idx = endpoint.lastIndexOf(":");
  if (idx < 0) throw new Error(`endpoint ${endpoint} is not host:port`);
  const host = endpoint.slice(0, idx) || "127.0.0.1";
  const port = parseInt(endpoint.slice(idx + 1), 10);
  if (!Number.isFinite(port)) throw new Error(`bad port in endpoint ${endpoint}`);
  return { host, port };
}
