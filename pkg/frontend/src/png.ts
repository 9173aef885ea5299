/** Thin pngjs wrappers for the dataset's 8-bit color and mask files. */

import { readFileSync, writeFileSync } from "node:fs";
import { PNG } from "pngjs";

/** Read an RGB png into [0,1] floats, shape (h*w*3) row-major. */
export function readRgb(path: string): { width: number; height: number; data: Float32Array } {
  const png = PNG.sync.read(readFileSync(path));
  const out = new Float32Array(png.width * png.height * 3);
  for (let i = 0; i < png.width * png.height; i++) {
    out[3 * i] = png.data[4 * i] / 255;
    out[3 * i + 1] = png.data[4 * i + 1] / 255;
    out[3 * i + 2] = png.data[4 * i + 2] / 255;
  }
  return { width: png.width, height: png.height, data: out };
}

/** Read a grayscale mask png into {0,1} bytes. */
export function readMask(path: string): { width: number; height: number; data: Uint8Array } {
  const png = PNG.sync.read(readFileSync(path));
  const out = new Uint8Array(png.width * png.height);
  for (let i = 0; i < out.length; i++) out[i] = png.data[4 * i] > 127 ? 1 : 0;
  return { width: png.width, height: png.height, data: out };
}

/** Write [0,1] floats (h*w*3) as an 8-bit RGB png (round to nearest). */
export function writeRgb(path: string, width: number, height: number, data: Float32Array): void {
  const png = new PNG({ width, height });
  for (let i = 0; i < width * height; i++) {
    for (let c = 0; c < 3; c++) {
      png.data[4 * i + c] = Math.max(0, Math.min(255, Math.round(data[3 * i + c] * 255)));
    }
    png.data[4 * i + 3] = 255;
  }
  writeFileSync(path, PNG.sync.write(png));
}
