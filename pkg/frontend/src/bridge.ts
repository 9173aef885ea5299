/** Neural reconstruction bridge: a TCP service that reads one RGDA raw
 * tensor frame per request and replies with the reconstructed RGB0 frame.
 * One request in flight per connection; malformed input gets an error frame
 * and the connection is closed.
 */

import { createServer, Server, Socket } from "node:net";

import {
  FrameReader,
  MAGIC_RGB,
  RawTensorFrame,
  TensorFormatError,
  makeFrame,
  rgbdaPlanes,
  writeErrorFrame,
  writeFrame,
} from "./tensor.js";
import { TfjsUNet } from "./model/tfjsExec.js";
import { normalizeDepth } from "./model/weights.js";

export interface BridgeModel {
  /** interleaved NHWC float32 in, rgb planes out */
  reconstruct(frame: RawTensorFrame): Promise<Float32Array>;
}

/** Real model: depth-normalize, run the U-Net, return plane-major rgb. */
export class UNetBridgeModel implements BridgeModel {
  constructor(private net: TfjsUNet) {}

  async reconstruct(frame: RawTensorFrame): Promise<Float32Array> {
    const { width, height } = frame;
    const px = width * height;
    const planes = rgbdaPlanes(frame);
    const depth = Float32Array.from(planes.depth);
    normalizeDepth(depth, this.net.config.depthZNear);
    const interleaved = new Float32Array(px * 5);
    for (let i = 0; i < px; i++) {
      interleaved[5 * i] = planes.r[i];
      interleaved[5 * i + 1] = planes.g[i];
      interleaved[5 * i + 2] = planes.b[i];
      interleaved[5 * i + 3] = depth[i];
      interleaved[5 * i + 4] = planes.alpha[i];
    }
    const rgb = await this.net.forward(interleaved, height, width);
    const out = new Float32Array(px * 3);
    for (let i = 0; i < px; i++) {
      out[i] = rgb[3 * i];
      out[px + i] = rgb[3 * i + 1];
      out[2 * px + i] = rgb[3 * i + 2];
    }
    return out;
  }
}

/** Identity-style test model: echoes the rgb planes (framing tests). */
export class PassthroughModel implements BridgeModel {
  async reconstruct(frame: RawTensorFrame): Promise<Float32Array> {
    const px = frame.width * frame.height;
    return frame.planes.slice(0, 3 * px);
  }
}

export function startBridge(model: BridgeModel, port: number, host = "127.0.0.1"): Promise<Server> {
  const server = createServer((socket: Socket) => {
    const reader = new FrameReader();
    let busy = false;
    socket.on("data", (chunk) => {
      reader.push(chunk);
      void pump();
    });
    socket.on("error", () => socket.destroy());

    async function pump(): Promise<void> {
      if (busy) return;
      busy = true;
      try {
        for (;;) {
          let request;
          try {
            request = reader.poll();
          } catch (e) {
            writeErrorFrame(socket, (e as Error).message);
            socket.end();
            return;
          }
          if (request === null) return;
          if ("error" in request) {
            writeErrorFrame(socket, `unexpected error frame: ${request.error}`);
            socket.end();
            return;
          }
          if (request.magic !== "RGDA") {
            writeErrorFrame(socket, `expected RGDA request, got ${request.magic}`);
            socket.end();
            return;
          }
          try {
            const rgb = await model.reconstruct(request);
            writeFrame(socket, makeFrame(MAGIC_RGB, request.width, request.height, rgb));
          } catch (e) {
            writeErrorFrame(socket, (e as Error).message);
            socket.end();
            return;
          }
        }
      } finally {
        busy = false;
      }
    }
  });
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(port, host, () => resolve(server));
  });
}
