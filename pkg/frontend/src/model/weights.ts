/** Weights file: JSON with base64 float32 tensors plus the architecture
 * config, dataset flavor, and training provenance. Read by both executors.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { Params, UNetConfig, initParams } from "./unet.js";
import { T } from "./grad64.js";

export interface WeightsMeta {
  config: UNetConfig;
  /** Which training recipe produced this model ("filtered" | "leaky" | "untrained" | "passthrough"). */
  flavor: string;
  seed: number;
  epochsTrained: number;
  lpipsBackbone: string;
}

export interface WeightsFile {
  meta: WeightsMeta;
  params: Params;
}

const FORMAT = "lidarsplat-unet-1";

function encode(data: Float64Array): string {
  const f32 = new Float32Array(data);
  return Buffer.from(f32.buffer).toString("base64");
}

function decodeInto(b64: string, target: Float64Array): void {
  const buf = Buffer.from(b64, "base64");
  const f32 = new Float32Array(buf.buffer, buf.byteOffset, buf.byteLength / 4);
  if (f32.length !== target.length) {
    throw new Error(`weights tensor length ${f32.length} != expected ${target.length}`);
  }
  // realign: Buffer.from(base64) may not be 4-byte aligned
  const aligned = new Float32Array(f32.length);
  new Uint8Array(aligned.buffer).set(new Uint8Array(buf.buffer, buf.byteOffset, buf.byteLength));
  for (let i = 0; i < target.length; i++) target[i] = aligned[i];
}

export function saveWeights(path: string, w: WeightsFile): void {
  const tensors: Record<string, { shape: number[]; data: string }> = {};
  for (const [name, cp] of w.params.convs) {
    tensors[`${name}.kernel`] = { shape: cp.kernel.shape, data: encode(cp.kernel.data) };
    tensors[`${name}.bias`] = { shape: cp.bias.shape, data: encode(cp.bias.data) };
  }
  for (const [name, bn] of w.params.bns) {
    tensors[`${name}.gamma`] = { shape: bn.gamma.shape, data: encode(bn.gamma.data) };
    tensors[`${name}.beta`] = { shape: bn.beta.shape, data: encode(bn.beta.data) };
    tensors[`${name}.moving_mean`] = { shape: [bn.movingMean.length], data: encode(bn.movingMean) };
    tensors[`${name}.moving_var`] = { shape: [bn.movingVar.length], data: encode(bn.movingVar) };
  }
  writeFileSync(path, JSON.stringify({ format: FORMAT, meta: w.meta, tensors }));
}

export function loadWeights(path: string): WeightsFile {
  const doc = JSON.parse(readFileSync(path, "utf8"));
  if (doc.format !== FORMAT) throw new Error(`unknown weights format ${doc.format}`);
  const meta: WeightsMeta = doc.meta;
  const params = initParams(meta.config, meta.seed);
  const read = (name: string, target: Float64Array) => {
    const entry = doc.tensors[name];
    if (!entry) throw new Error(`weights file missing tensor ${name}`);
    decodeInto(entry.data, target);
  };
  for (const [name, cp] of params.convs) {
    read(`${name}.kernel`, cp.kernel.data);
    read(`${name}.bias`, cp.bias.data);
  }
  for (const [name, bn] of params.bns) {
    read(`${name}.gamma`, bn.gamma.data);
    read(`${name}.beta`, bn.beta.data);
    read(`${name}.moving_mean`, bn.movingMean);
    read(`${name}.moving_var`, bn.movingVar);
  }
  return { meta, params };
}

/** Convenience: fresh untrained weights for a config. */
export function freshWeights(config: UNetConfig, seed: number, flavor = "untrained"): WeightsFile {
  return {
    meta: { config, flavor, seed, epochsTrained: 0, lpipsBackbone: "random-conv-v1" },
    params: initParams(config, seed),
  };
}

/** Normalize the raw depth plane in place: d' = zNear/max(d, zNear), 0 if empty. */
export function normalizeDepth(depth: Float32Array, zNear: number): void {
  for (let i = 0; i < depth.length; i++) {
    const d = depth[i];
    depth[i] = d > 0 ? zNear / Math.max(d, zNear) : 0;
  }
}

export function tensorOf(shape: number[], data: ArrayLike<number>): T {
  const t = new T(shape);
  for (let i = 0; i < t.size; i++) t.data[i] = data[i];
  return t;
}
