/** Grayscale PFM reader/writer ("Pf", negative scale = little-endian,
 * scanlines stored bottom-up). Matches the renderer's depth files bit for bit.
 */

import { readFileSync, writeFileSync } from "node:fs";

export function readPfm(path: string): { width: number; height: number; data: Float32Array } {
  const buf = readFileSync(path);
  let pos = 0;
  const token = () => {
    while (pos < buf.length && /\s/.test(String.fromCharCode(buf[pos]))) pos++;
    const start = pos;
    while (pos < buf.length && !/\s/.test(String.fromCharCode(buf[pos]))) pos++;
    return buf.toString("ascii", start, pos);
  };
  const magic = token();
  if (magic !== "Pf") throw new Error(`not a grayscale PFM (magic ${magic})`);
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const scale = parseFloat(token());
  pos++; // single whitespace after the scale line
  const count = width * height;
  if (buf.length < pos + count * 4) throw new Error("truncated PFM payload");
  const littleEndian = scale < 0;
  const flipped = new Float32Array(count);
  const view = new DataView(buf.buffer, buf.byteOffset + pos, count * 4);
  for (let i = 0; i < count; i++) flipped[i] = view.getFloat32(i * 4, littleEndian);
  // rows are stored bottom-up
  const data = new Float32Array(count);
  for (let y = 0; y < height; y++) {
    data.set(flipped.subarray((height - 1 - y) * width, (height - y) * width), y * width);
  }
  return { width, height, data };
}

export function writePfm(path: string, width: number, height: number, data: Float32Array): void {
  const header = Buffer.from(`Pf\n${width} ${height}\n-1.0\n`, "ascii");
  const flipped = new Float32Array(width * height);
  for (let y = 0; y < height; y++) {
    flipped.set(data.subarray((height - 1 - y) * width, (height - y) * width), y * width);
  }
  writeFileSync(path, Buffer.concat([header, Buffer.from(flipped.buffer)]));
}
