import { mkdtempSync } from "node:fs";
import { readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  FrameReader,
  MAGIC_RGB,
  MAGIC_RGBDA,
  decodeFrame,
  encodeFrame,
  makeFrame,
  rgbdaPlanes,
} from "../src/tensor.js";
import { runPython } from "./helpers.js";

describe("raw tensor framing", () => {
  it("round-trips bit-exactly", () => {
    const planes = new Float32Array(5 * 2 * 3);
    for (let i = 0; i < planes.length; i++) planes[i] = Math.fround(Math.sin(i) * 7);
    const frame = makeFrame(MAGIC_RGBDA, 3, 2, planes);
    const back = decodeFrame(encodeFrame(frame));
    expect(back.magic).toBe(MAGIC_RGBDA);
    expect(back.width).toBe(3);
    expect(Array.from(back.planes)).toEqual(Array.from(planes));
  });

  it("rejects unknown magic", () => {
    const buf = Buffer.concat([Buffer.from("XXXX"), Buffer.alloc(16)]);
    expect(() => decodeFrame(buf)).toThrow(/unknown magic/);
  });

  it("rejects channel mismatch with magic", () => {
    const good = encodeFrame(makeFrame(MAGIC_RGB, 2, 2, new Float32Array(12)));
    good.writeUInt32LE(5, 12);
    expect(() => decodeFrame(good)).toThrow(/implies 3 channels/);
  });

  it("incremental reader handles arbitrary chunking", () => {
    const planes = new Float32Array(3 * 8 * 8).map((_, i) => i * 0.25);
    const bytes = encodeFrame(makeFrame(MAGIC_RGB, 8, 8, planes));
    const reader = new FrameReader();
    for (let off = 0; off < bytes.length; off += 7) {
      expect(reader.poll()).toBeNull();
      reader.push(bytes.subarray(off, Math.min(off + 7, bytes.length)));
    }
    const frame = reader.poll();
    expect(frame && !("error" in frame) && frame.width).toBe(8);
  });

  it("matches the renderer's reference writer byte for byte", () => {
    const dir = mkdtempSync(join(tmpdir(), "rtf-"));
    const pyOut = join(dir, "py.rtf");
    runPython(`
import numpy as np
from lidarsplat.io.tensor import RawTensorFrame, MAGIC_RGBDA
rng = np.random.default_rng(7)
h, w = 6, 9
depth = (rng.random((h, w)) + 0.2).astype(np.float32)
depth[rng.random((h, w)) < 0.4] = 0.0
planes = np.zeros((5, h, w), np.float32)
planes[:3] = rng.random((3, h, w), dtype=np.float32)
planes[:3] *= depth > 0
planes[3] = depth
planes[4] = (depth > 0).astype(np.float32)
with open(${JSON.stringify(pyOut)}, "wb") as f:
    RawTensorFrame(MAGIC_RGBDA, planes).write(f)
`);
    const buf = readFileSync(pyOut);
    const frame = decodeFrame(buf);
    expect(frame.width).toBe(9);
    expect(frame.height).toBe(6);
    // python reads our encoding back bit-exactly
    const tsOut = join(dir, "ts.rtf");
    writeFileSync(tsOut, encodeFrame(frame));
    const verdict = runPython(`
import numpy as np
from lidarsplat.io.tensor import RawTensorFrame
a = RawTensorFrame.read(open(${JSON.stringify(pyOut)}, "rb"))
b = RawTensorFrame.read(open(${JSON.stringify(tsOut)}, "rb"))
print("equal" if (a.magic == b.magic and np.array_equal(a.planes, b.planes)) else "DIFFER")
`).trim();
    expect(verdict).toBe("equal");
    const planes = rgbdaPlanes(frame);
    for (let i = 0; i < planes.depth.length; i++) {
      expect(planes.alpha[i] === 1 ? planes.depth[i] > 0 : planes.depth[i] === 0).toBe(true);
    }
  });
});
