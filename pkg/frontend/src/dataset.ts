/** Reader for the renderer's synthetic training dataset layout:
 * manifest.json + pairs/<id>.input.{png,pfm,a.png} + pairs/<id>.target.png.
 * Pairs load into interleaved NHWC buffers with the depth channel
 * normalized to inverse depth in (0, 1] (0 = empty).
 */

import { existsSync, readFileSync } from "node:fs";
import { join } from "node:path";

import { readPfm } from "./pfm.js";
import { readMask, readRgb } from "./png.js";
import { normalizeDepth } from "./model/weights.js";

export interface Manifest {
  version: number;
  mode: "filtered" | "leaky";
  ids: string[];
  seed: number;
  params: Record<string, unknown>;
}

export interface Pair {
  id: string;
  width: number;
  height: number;
  /** NHWC interleaved rgbda, depth already normalized. */
  input: Float32Array;
  /** NHWC interleaved rgb target. */
  target: Float32Array;
}

export function loadManifest(root: string): Manifest {
  const path = join(root, "manifest.json");
  if (!existsSync(path)) throw new Error(`no manifest at ${path}`);
  const doc = JSON.parse(readFileSync(path, "utf8"));
  if (doc.version !== 1) throw new Error(`unsupported manifest version ${doc.version}`);
  return doc as Manifest;
}

export function loadPair(root: string, id: string, zNear: number): Pair {
  const base = join(root, "pairs", id);
  const rgb = readRgb(`${base}.input.png`);
  const depth = readPfm(`${base}.input.pfm`);
  const mask = readMask(`${base}.input.a.png`);
  const target = readRgb(`${base}.target.png`);
  const { width, height } = rgb;
  if (
    depth.width !== width || depth.height !== height ||
    mask.width !== width || target.width !== width
  ) {
    throw new Error(`pair ${id}: channel dimensions disagree`);
  }
  normalizeDepth(depth.data, zNear);
  const input = new Float32Array(width * height * 5);
  for (let i = 0; i < width * height; i++) {
    input[5 * i] = rgb.data[3 * i];
    input[5 * i + 1] = rgb.data[3 * i + 1];
    input[5 * i + 2] = rgb.data[3 * i + 2];
    input[5 * i + 3] = depth.data[i];
    input[5 * i + 4] = mask.data[i];
  }
  return { id, width, height, input, target: target.data };
}

export interface Dataset {
  manifest: Manifest;
  pairs: Pair[];
  skipped: string[];
}

/** Load every pair; corrupt pairs are skipped with a warning, and more than
 * 1% skipped is an error. */
export function loadDataset(root: string, zNear: number, warn: (msg: string) => void = console.warn): Dataset {
  const manifest = loadManifest(root);
  const pairs: Pair[] = [];
  const skipped: string[] = [];
  for (const id of manifest.ids) {
    try {
      pairs.push(loadPair(root, id, zNear));
    } catch (e) {
      skipped.push(id);
      warn(`skipping corrupt pair ${id}: ${(e as Error).message}`);
    }
  }
  if (skipped.length > 0.01 * manifest.ids.length) {
    throw new Error(`${skipped.length} of ${manifest.ids.length} pairs unreadable`);
  }
  if (!pairs.length) throw new Error("dataset has no readable pairs");
  return { manifest, pairs, skipped };
}
