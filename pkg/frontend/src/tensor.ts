/** Raw tensor frame codec: the framed float32 format shared with the renderer.
 *
 * Layout: 4-byte magic ("RGDA" = 5 channels, "RGB0" = 3), three little-endian
 * uint32s (width, height, channels), then width*height*channels float32
 * values plane-major. Must round-trip bit-exactly against the renderer's
 * reference implementation.
 */

import type { Readable, Writable } from "node:stream";

export const MAGIC_RGBDA = "RGDA";
export const MAGIC_RGB = "RGB0";
export const ERR_MAGIC = "ERR0";

const CHANNELS: Record<string, number> = { [MAGIC_RGBDA]: 5, [MAGIC_RGB]: 3 };
const MAX_PAYLOAD = 2 ** 33;

export class TensorFormatError extends Error {}

export interface RawTensorFrame {
  magic: string;
  width: number;
  height: number;
  /** Plane-major float32 payload: channel 0 row-major, then channel 1, ... */
  planes: Float32Array;
}

export function makeFrame(magic: string, width: number, height: number, planes: Float32Array): RawTensorFrame {
  const channels = CHANNELS[magic];
  if (channels === undefined) throw new TensorFormatError(`unknown magic ${JSON.stringify(magic)}`);
  if (planes.length !== width * height * channels) {
    throw new TensorFormatError(
      `payload length ${planes.length} does not match ${width}x${height}x${channels}`
    );
  }
  return { magic, width, height, planes };
}

export function encodeFrame(frame: RawTensorFrame): Buffer {
  const header = Buffer.alloc(16);
  header.write(frame.magic, 0, 4, "ascii");
  header.writeUInt32LE(frame.width, 4);
  header.writeUInt32LE(frame.height, 8);
  header.writeUInt32LE(frame.planes.length / (frame.width * frame.height), 12);
  const payload = Buffer.from(frame.planes.buffer, frame.planes.byteOffset, frame.planes.byteLength);
  return Buffer.concat([header, payload]);
}

export function decodeFrame(buf: Buffer): RawTensorFrame {
  if (buf.length < 16) throw new TensorFormatError("short read: header incomplete");
  const magic = buf.toString("ascii", 0, 4);
  const channels = CHANNELS[magic];
  if (channels === undefined) throw new TensorFormatError(`unknown magic ${JSON.stringify(magic)}`);
  const width = buf.readUInt32LE(4);
  const height = buf.readUInt32LE(8);
  const declared = buf.readUInt32LE(12);
  if (declared !== channels) {
    throw new TensorFormatError(`magic ${magic} implies ${channels} channels, header says ${declared}`);
  }
  const nbytes = width * height * channels * 4;
  if (width === 0 || height === 0 || nbytes > MAX_PAYLOAD) {
    throw new TensorFormatError(`implausible dimensions ${width}x${height}`);
  }
  if (buf.length < 16 + nbytes) {
    throw new TensorFormatError(`short read: payload ended after ${buf.length - 16} of ${nbytes} bytes`);
  }
  // aligned copy independent of the network buffer (host is little-endian)
  const planes = new Float32Array(width * height * channels);
  buf.copy(Buffer.from(planes.buffer), 0, 16, 16 + nbytes);
  return { magic, width, height, planes };
}

/** Incremental decoder for a byte stream; yields one frame (or error text). */
export class FrameReader {
  private chunks: Buffer[] = [];
  private size = 0;

  push(chunk: Buffer): void {
    this.chunks.push(chunk);
    this.size += chunk.length;
  }

  private peek(n: number): Buffer | null {
    if (this.size < n) return null;
    return Buffer.concat(this.chunks).subarray(0, n);
  }

  private consume(n: number): Buffer {
    const all = Buffer.concat(this.chunks);
    const out = all.subarray(0, n);
    const rest = all.subarray(n);
    this.chunks = rest.length ? [rest] : [];
    this.size = rest.length;
    return out;
  }

  /** Returns a decoded frame, an error frame's message, or null if incomplete. */
  poll(): RawTensorFrame | { error: string } | null {
    const head = this.peek(16);
    if (!head) return null;
    const magic = head.toString("ascii", 0, 4);
    if (magic === ERR_MAGIC) {
      const len = head.readUInt32LE(4);
      if (this.size < 8 + len) return null;
      const buf = this.consume(8 + len);
      return { error: buf.toString("utf8", 8) };
    }
    const channels = CHANNELS[magic];
    if (channels === undefined) throw new TensorFormatError(`unknown magic ${JSON.stringify(magic)}`);
    const width = head.readUInt32LE(4);
    const height = head.readUInt32LE(8);
    const nbytes = width * height * channels * 4;
    if (nbytes > MAX_PAYLOAD) throw new TensorFormatError(`implausible dimensions ${width}x${height}`);
    if (this.size < 16 + nbytes) return null;
    return decodeFrame(this.consume(16 + nbytes));
  }
}

/** Read exactly one frame from a stream (socket, stdin) with a timeout. */
export function readFrame(stream: Readable, timeoutMs = 30_000): Promise<RawTensorFrame> {
  return new Promise((resolve, reject) => {
    const reader = new FrameReader();
    const timer = setTimeout(() => {
      cleanup();
      reject(new TensorFormatError("timed out waiting for frame"));
    }, timeoutMs);
    const onData = (chunk: Buffer) => {
      reader.push(chunk);
      let result;
      try {
        result = reader.poll();
      } catch (e) {
        cleanup();
        reject(e);
        return;
      }
      if (result === null) return;
      cleanup();
      if ("error" in result) reject(new TensorFormatError(`peer error: ${result.error}`));
      else resolve(result);
    };
    const onEnd = () => {
      cleanup();
      reject(new TensorFormatError("short read: stream ended mid-frame"));
    };
    const cleanup = () => {
      clearTimeout(timer);
      stream.off("data", onData);
      stream.off("end", onEnd);
      stream.off("error", onEnd);
    };
    stream.on("data", onData);
    stream.on("end", onEnd);
    stream.on("error", onEnd);
  });
}

export function writeFrame(stream: Writable, frame: RawTensorFrame): void {
  stream.write(encodeFrame(frame));
}

export function writeErrorFrame(stream: Writable, message: string): void {
  const data = Buffer.from(message, "utf8");
  const header = Buffer.alloc(8);
  header.write(ERR_MAGIC, 0, 4, "ascii");
  header.writeUInt32LE(data.length, 4);
  stream.write(Buffer.concat([header, data]));
}

/** Split a 5-channel RGBDA frame into named planes (views, no copies). */
export function rgbdaPlanes(frame: RawTensorFrame) {
  if (frame.magic !== MAGIC_RGBDA) throw new TensorFormatError(`expected RGDA, got ${frame.magic}`);
  const px = frame.width * frame.height;
  return {
    r: frame.planes.subarray(0, px),
    g: frame.planes.subarray(px, 2 * px),
    b: frame.planes.subarray(2 * px, 3 * px),
    depth: frame.planes.subarray(3 * px, 4 * px),
    alpha: frame.planes.subarray(4 * px, 5 * px),
  };
}
