/** Seeded training loop: random crops, Adam, JSON-lines epoch log, gradient
 * finiteness asserted every step, weights checkpointed per epoch (resumable).
 */

import { appendFileSync, existsSync } from "node:fs";

import { Dataset, Pair } from "./dataset.js";
import { Rng } from "./rng.js";
import { PERCEPTUAL_BACKBONE, PerceptualNet, buildPerceptualNet, reconstructionLoss } from "./loss.js";
import { T, Tape } from "./model/grad64.js";
import { Params, UNetConfig, trainableTensors, unetForward } from "./model/unet.js";
import { WeightsFile, freshWeights, loadWeights, saveWeights } from "./model/weights.js";

export interface TrainConfig {
  datasetDir: string;
  weightsOut: string;
  logPath: string | null;
  epochs: number;
  stepsPerEpoch: number;
  batchSize: number;
  crop: number;         // square crop side, must be divisible by 2^depth
  learningRate: number;
  seed: number;
  resume: boolean;
  valFraction: number;
  /** Stop once full-frame train-set L1 drops below this (checked per epoch). */
  stopAtTrainL1?: number;
}

export const DEFAULT_TRAIN: Omit<TrainConfig, "datasetDir" | "weightsOut"> = {
  logPath: null,
  epochs: 170,
  stepsPerEpoch: 100,
  batchSize: 8,
  crop: 320,
  learningRate: 1e-4,
  seed: 1,
  resume: false,
  valFraction: 0.1,
};

class Adam {
  private m = new Map<string, Float64Array>();
  private v = new Map<string, Float64Array>();
  private t = 0;

  constructor(
    private params: Map<string, T>,
    private lr: number,
    private beta1 = 0.9,
    private beta2 = 0.999,
    private eps = 1e-8
  ) {
    for (const [name, p] of params) {
      this.m.set(name, new Float64Array(p.size));
      this.v.set(name, new Float64Array(p.size));
    }
  }

  step(): void {
    this.t++;
    const c1 = 1 - this.beta1 ** this.t;
    const c2 = 1 - this.beta2 ** this.t;
    for (const [name, p] of this.params) {
      const g = p.grad!;
      const m = this.m.get(name)!;
      const v = this.v.get(name)!;
      for (let i = 0; i < p.size; i++) {
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g[i];
        v[i] = this.beta2 * v[i] + (1 - this.beta2) * g[i] * g[i];
        p.data[i] -= (this.lr * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + this.eps);
      }
    }
  }
}

/** Crop origin sampler; crops never cross the image bounds. */
export function sampleCrop(rng: Rng, width: number, height: number, crop: number): { x: number; y: number } {
  if (crop > width || crop > height) {
    throw new Error(`crop ${crop} exceeds image ${width}x${height}`);
  }
  return { x: rng.int(width - crop + 1), y: rng.int(height - crop + 1) };
}

function gatherCrop(pair: Pair, x0: number, y0: number, crop: number, channels: number, src: Float32Array, dst: Float64Array, dstOffset: number): void {
  for (let y = 0; y < crop; y++) {
    const srcRow = ((y0 + y) * pair.width + x0) * channels;
    const dstRow = dstOffset + y * crop * channels;
    for (let i = 0; i < crop * channels; i++) dst[dstRow + i] = src[srcRow + i];
  }
}

function buildBatch(pairs: Pair[], rng: Rng, batch: number, crop: number): { x: T; y: T } {
  const x = new T([batch, crop, crop, 5]);
  const y = new T([batch, crop, crop, 3]);
  for (let b = 0; b < batch; b++) {
    const pair = pairs[rng.int(pairs.length)];
    const { x: cx, y: cy } = sampleCrop(rng, pair.width, pair.height, crop);
    gatherCrop(pair, cx, cy, crop, 5, pair.input, x.data, b * crop * crop * 5);
    gatherCrop(pair, cx, cy, crop, 3, pair.target, y.data, b * crop * crop * 3);
  }
  return { x, y };
}

function assertFiniteGrads(params: Map<string, T>, step: number): void {
  for (const [name, p] of params) {
    const g = p.grad!;
    for (let i = 0; i < g.length; i++) {
      if (!Number.isFinite(g[i])) {
        throw new Error(`non-finite gradient in ${name}[${i}] at step ${step}`);
      }
    }
  }
}

export interface EpochStats {
  epoch: number;
  trainLoss: number;
  trainL1: number;
  valLoss: number | null;
  fullFrameL1: number | null;
}

export function trainModel(
  dataset: Dataset,
  netConfig: UNetConfig,
  cfg: TrainConfig,
  onEpoch?: (s: EpochStats) => void
): { weights: WeightsFile; history: EpochStats[] } {
  let weights: WeightsFile;
  let epochOffset = 0;
  if (cfg.resume && existsSync(cfg.weightsOut)) {
    weights = loadWeights(cfg.weightsOut);
    epochOffset = weights.meta.epochsTrained;
  } else {
    weights = freshWeights(netConfig, cfg.seed, dataset.manifest.mode);
  }
  const params: Params = weights.params;
  const tensors = trainableTensors(params);
  const adam = new Adam(tensors, cfg.learningRate);
  const net: PerceptualNet = buildPerceptualNet(3);
  const rng = new Rng(cfg.seed ^ 0x5eed);

  const nVal = Math.min(
    Math.floor(dataset.pairs.length * cfg.valFraction),
    Math.max(dataset.pairs.length - 1, 0)
  );
  const valPairs = dataset.pairs.slice(0, nVal);
  const trainPairs = dataset.pairs.slice(nVal);

  const history: EpochStats[] = [];
  let globalStep = 0;
  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    let lossSum = 0;
    let l1Sum = 0;
    for (let s = 0; s < cfg.stepsPerEpoch; s++) {
      const { x, y } = buildBatch(trainPairs, rng, cfg.batchSize, cfg.crop);
      const tape = new Tape();
      const pred = unetForward(netConfig, params, x, true, tape);
      const parts = reconstructionLoss(tape, net, pred, y);
      for (const p of tensors.values()) p.zeroGrad();
      tape.backward(parts.total);
      globalStep++;
      assertFiniteGrads(tensors, globalStep);
      adam.step();
      lossSum += parts.total.data[0];
      l1Sum += parts.l1;
    }
    let valLoss: number | null = null;
    if (valPairs.length) {
      let acc = 0;
      const vrng = new Rng(0xa11d + epoch);
      for (const pair of valPairs) {
        const { x, y } = buildBatch([pair], vrng, 1, cfg.crop);
        const pred = unetForward(netConfig, params, x, false, null);
        acc += reconstructionLoss(null, net, pred, y).total.data[0];
      }
      valLoss = acc / valPairs.length;
    }
    let fullFrameL1: number | null = null;
    if (cfg.stopAtTrainL1 !== undefined) {
      fullFrameL1 = datasetL1For(trainPairs, netConfig, params);
    }
    const stats: EpochStats = {
      epoch: epochOffset + epoch,
      trainLoss: lossSum / cfg.stepsPerEpoch,
      trainL1: l1Sum / cfg.stepsPerEpoch,
      valLoss,
      fullFrameL1,
    };
    history.push(stats);
    if (cfg.logPath) {
      appendFileSync(
        cfg.logPath,
        JSON.stringify({
          ...stats,
          mode: dataset.manifest.mode,
          seed: cfg.seed,
          lpips_backbone: PERCEPTUAL_BACKBONE,
        }) + "\n"
      );
    }
    weights.meta.epochsTrained = epochOffset + epoch + 1;
    saveWeights(cfg.weightsOut, weights);
    onEpoch?.(stats);
    if (fullFrameL1 !== null && cfg.stopAtTrainL1 !== undefined && fullFrameL1 < cfg.stopAtTrainL1) {
      break;
    }
  }
  return { weights, history };
}

/** Mean L1 over full (uncropped) training pairs with the current weights. */
export function datasetL1(dataset: Dataset, netConfig: UNetConfig, params: Params): number {
  return datasetL1For(dataset.pairs, netConfig, params);
}

function datasetL1For(pairs: Pair[], netConfig: UNetConfig, params: Params): number {
  let acc = 0;
  for (const pair of pairs) {
    const x = new T([1, pair.height, pair.width, 5]);
    x.data.set(pair.input);
    const yTrue = new T([1, pair.height, pair.width, 3]);
    yTrue.data.set(pair.target);
    const pred = unetForward(netConfig, params, x, false, null);
    let s = 0;
    for (let i = 0; i < pred.size; i++) s += Math.abs(pred.data[i] - yTrue.data[i]);
    acc += s / pred.size;
  }
  return acc / pairs.length;
}
