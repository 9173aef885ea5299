/** Compact U-Net for RGBDA -> RGB reconstruction.
 *
 * Encoder: `depth` stages of two 3x3 convs (batch norm after each encoder
 * conv, relu), 2x2 max pool between stages, channel width doubling from
 * baseWidth; bottleneck of two (normed) convs; decoder mirrors with 2x2
 * transposed-conv upsampling, skip concatenation and two plain convs per
 * stage; final 1x1 conv + sigmoid. Defaults (depth 4, base 32) are ~7.8M
 * parameters. Input spatial dims must be divisible by 2^depth.
 *
 * Weight layouts follow tfjs: conv kernels [kh, kw, inC, outC], transposed
 * kernels [2, 2, outC, inC], batch norm as gamma/beta/movingMean/movingVar.
 */

import { Rng } from "../rng.js";
import {
  BnState,
  T,
  Tape,
  batchNorm,
  concatC,
  conv2d,
  convTranspose2x2,
  leakyRelu,
  maxPool2,
  relu,
  sigmoid,
} from "./grad64.js";

export const DECODER_LEAK = 0.1;

export interface UNetConfig {
  inChannels: number;   // 5 = RGBDA
  outChannels: number;  // 3 = RGB
  depth: number;        // downsampling stages
  baseWidth: number;    // channels at full resolution, doubling per stage
  /** Camera near plane used to normalize the depth channel: d' = zNear/max(d, zNear). */
  depthZNear: number;
}

export const DEFAULT_CONFIG: UNetConfig = {
  inChannels: 5,
  outChannels: 3,
  depth: 4,
  baseWidth: 32,
  depthZNear: 0.1,
};

export interface ConvParam {
  kernel: T;
  bias: T;
}

export interface Params {
  convs: Map<string, ConvParam>;
  bns: Map<string, BnState>;
}

function heKernel(rng: Rng, shape: number[], fanIn: number): T {
  const t = new T(shape, undefined, true);
  const std = Math.sqrt(2.0 / fanIn);
  for (let i = 0; i < t.size; i++) t.data[i] = rng.normal() * std;
  return t;
}

function addConv(p: Params, rng: Rng, name: string, kh: number, kw: number, ci: number, co: number): void {
  p.convs.set(name, {
    kernel: heKernel(rng.child(hash(name)), [kh, kw, ci, co], kh * kw * ci),
    bias: new T([co], undefined, true),
  });
}

function addUpConv(p: Params, rng: Rng, name: string, co: number, ci: number): void {
  p.convs.set(name, {
    kernel: heKernel(rng.child(hash(name)), [2, 2, co, ci], 2 * 2 * ci),
    bias: new T([co], undefined, true),
  });
}

function addBn(p: Params, name: string, c: number): void {
  const gamma = new T([c], undefined, true);
  gamma.data.fill(1);
  const beta = new T([c], undefined, true);
  p.bns.set(name, {
    gamma,
    beta,
    movingMean: new Float64Array(c),
    movingVar: new Float64Array(c).fill(1),
  });
}

function hash(s: string): number {
  let h = 2166136261;
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

export function stageWidth(cfg: UNetConfig, stage: number): number {
  return cfg.baseWidth * 2 ** stage;
}

/** Fresh seeded parameters for a config. */
export function initParams(cfg: UNetConfig, seed: number): Params {
  const rng = new Rng(seed);
  const p: Params = { convs: new Map(), bns: new Map() };
  let ci = cfg.inChannels;
  for (let s = 0; s < cfg.depth; s++) {
    const w = stageWidth(cfg, s);
    addConv(p, rng, `enc${s}_conv1`, 3, 3, ci, w);
    addBn(p, `enc${s}_bn1`, w);
    addConv(p, rng, `enc${s}_conv2`, 3, 3, w, w);
    addBn(p, `enc${s}_bn2`, w);
    ci = w;
  }
  const bw = stageWidth(cfg, cfg.depth);
  addConv(p, rng, "bott_conv1", 3, 3, ci, bw);
  addBn(p, "bott_bn1", bw);
  addConv(p, rng, "bott_conv2", 3, 3, bw, bw);
  addBn(p, "bott_bn2", bw);
  let cu = bw;
  for (let s = cfg.depth - 1; s >= 0; s--) {
    const w = stageWidth(cfg, s);
    addUpConv(p, rng, `dec${s}_up`, w, cu);
    addConv(p, rng, `dec${s}_conv1`, 3, 3, 2 * w, w);
    addConv(p, rng, `dec${s}_conv2`, 3, 3, w, w);
    cu = w;
  }
  addConv(p, rng, "final_conv", 1, 1, cfg.baseWidth, cfg.outChannels);
  return p;
}

export function trainableTensors(p: Params): Map<string, T> {
  const m = new Map<string, T>();
  for (const [name, cp] of p.convs) {
    m.set(`${name}.kernel`, cp.kernel);
    m.set(`${name}.bias`, cp.bias);
  }
  for (const [name, bn] of p.bns) {
    m.set(`${name}.gamma`, bn.gamma);
    m.set(`${name}.beta`, bn.beta);
  }
  return m;
}

/** Forward pass; x is NHWC with C = cfg.inChannels, dims % 2^depth == 0. */
export function unetForward(
  cfg: UNetConfig,
  p: Params,
  x: T,
  training: boolean,
  tape: Tape | null
): T {
  const [, h, w] = x.shape;
  const div = 2 ** cfg.depth;
  if (h % div || w % div) {
    throw new Error(`input ${w}x${h} not divisible by 2^depth = ${div}`);
  }
  const conv = (name: string, t: T, stride = 1) => {
    const cp = p.convs.get(name)!;
    return conv2d(tape, t, cp.kernel, cp.bias, stride);
  };
  const bn = (name: string, t: T) => batchNorm(tape, t, p.bns.get(name)!, training);

  const skips: T[] = [];
  let cur = x;
  for (let s = 0; s < cfg.depth; s++) {
    cur = relu(tape, bn(`enc${s}_bn1`, conv(`enc${s}_conv1`, cur)));
    cur = relu(tape, bn(`enc${s}_bn2`, conv(`enc${s}_conv2`, cur)));
    skips.push(cur);
    cur = maxPool2(tape, cur);
  }
  cur = relu(tape, bn("bott_bn1", conv("bott_conv1", cur)));
  cur = relu(tape, bn("bott_bn2", conv("bott_conv2", cur)));
  for (let s = cfg.depth - 1; s >= 0; s--) {
    const up = p.convs.get(`dec${s}_up`)!;
    cur = convTranspose2x2(tape, cur, up.kernel, up.bias);
    cur = concatC(tape, cur, skips[s]);
    cur = leakyRelu(tape, conv(`dec${s}_conv1`, cur), DECODER_LEAK);
    cur = leakyRelu(tape, conv(`dec${s}_conv2`, cur), DECODER_LEAK);
  }
  return sigmoid(tape, conv("final_conv", cur));
}
