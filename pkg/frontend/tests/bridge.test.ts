/** Bridge conformance: the service's framing must round-trip against the
 * renderer's reference reader/writer (the python package), survive a
 * 1920x1440 frame with checksum intact, and reject bad magic.
 */

import { createHash } from "node:crypto";
import { connect } from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import type { Server } from "node:net";

import { PassthroughModel, UNetBridgeModel, startBridge } from "../src/bridge.js";
import { TfjsUNet } from "../src/model/tfjsExec.js";
import { DEFAULT_CONFIG } from "../src/model/unet.js";
import { freshWeights } from "../src/model/weights.js";
import { readFrame } from "../src/tensor.js";
import { runPython } from "./helpers.js";

let server: Server;
let port: number;

beforeAll(async () => {
  server = await startBridge(new PassthroughModel(), 0);
  const addr = server.address();
  port = typeof addr === "object" && addr ? addr.port : 0;
});

afterAll(() => {
  server.close();
});

describe("bridge service conformance (python peer)", () => {
  it("the renderer's own bridge client round-trips through the service", () => {
    const verdict = runPython(`
import numpy as np
from lidarsplat.bridge import reconstruct
from lidarsplat.frame import FrameRGBDA

rng = np.random.default_rng(13)
h, w = 48, 64
depth = (rng.random((h, w)) + 0.3).astype(np.float32)
depth[rng.random((h, w)) < 0.5] = 0.0
alpha = (depth > 0).astype(np.uint8)
rgb = rng.random((h, w, 3), dtype=np.float32)
rgb *= alpha[:, :, None]
frame = FrameRGBDA(rgb=rgb, depth=depth, alpha=alpha).validate()
out = reconstruct(frame, "127.0.0.1:${"PORT"}")
print("equal" if np.array_equal(out, rgb) else "DIFFER")
`.replace("${PORT}", String(port)));
    expect(verdict.trim()).toBe("equal");
  });

  it("1920x1440 frame survives with checksum intact", () => {
    const output = runPython(`
import hashlib
import numpy as np
from lidarsplat.bridge import reconstruct
from lidarsplat.frame import FrameRGBDA

h, w = 1440, 1920
yy, xx = np.mgrid[0:h, 0:w].astype(np.float32)
rgb = np.stack([(xx % 251) / 250, (yy % 241) / 240, ((xx + yy) % 233) / 232], axis=2).astype(np.float32)
depth = ((xx + 2 * yy) % 97 / 32 + 0.2).astype(np.float32)
alpha = np.ones((h, w), np.uint8)
frame = FrameRGBDA(rgb=rgb, depth=depth, alpha=alpha).validate()
out = reconstruct(frame, "127.0.0.1:${"PORT"}", timeout=120.0)
print(hashlib.sha256(np.ascontiguousarray(np.moveaxis(rgb, 2, 0)).tobytes()).hexdigest())
print(hashlib.sha256(np.ascontiguousarray(np.moveaxis(out, 2, 0)).tobytes()).hexdigest())
`.replace("${PORT}", String(port)));
    const [sent, received] = output.trim().split("\n");
    expect(received).toBe(sent);
    expect(sent).toMatch(/^[0-9a-f]{64}$/);
  }, 300_000);

  it("bad magic gets an error frame and the connection closes", async () => {
    const sock = connect({ host: "127.0.0.1", port });
    await new Promise<void>((resolve) => sock.once("connect", () => resolve()));
    const closed = new Promise<void>((resolve) => sock.once("close", () => resolve()));
    sock.write(Buffer.concat([Buffer.from("XXXX"), Buffer.alloc(20)]));
    await expect(readFrame(sock, 10_000)).rejects.toThrow(/peer error|unknown magic/);
    await closed;
  });

  it("real model replies with correct dims through a socket", async () => {
    const reduced = { ...DEFAULT_CONFIG, depth: 2, baseWidth: 8 };
    const net = await TfjsUNet.fromWeights(freshWeights(reduced, 3));
    const modelServer = await startBridge(new UNetBridgeModel(net), 0);
    const addr = modelServer.address();
    const modelPort = typeof addr === "object" && addr ? addr.port : 0;
    try {
      const verdict = runPython(`
import numpy as np
from lidarsplat.bridge import reconstruct
from lidarsplat.frame import FrameRGBDA

h, w = 32, 48
depth = np.full((h, w), 2.0, np.float32)
alpha = np.ones((h, w), np.uint8)
rgb = np.full((h, w, 3), 0.25, np.float32)
frame = FrameRGBDA(rgb=rgb, depth=depth, alpha=alpha).validate()
out = reconstruct(frame, "127.0.0.1:${"PORT"}", timeout=120.0)
ok = out.shape == (h, w, 3) and np.isfinite(out).all() and (out >= 0).all() and (out <= 1).all()
print("ok" if ok else "BAD")
`.replace("${PORT}", String(modelPort)));
      expect(verdict.trim()).toBe("ok");
    } finally {
      modelServer.close();
      net.dispose();
    }
  });
});
