/** Training loss: 0.9 * L1 + 0.1 * perceptual distance.
 *
 * The perceptual term follows the LPIPS construction — convolutional
 * feature stacks, per-pixel channel unit-normalization, squared feature
 * differences averaged over space and layers — but over a seeded frozen
 * random-convolution backbone, since no pretrained perceptual weights are
 * bundled. It is 0 for identical images, non-negative, and differentiable;
 * the backbone identifier is recorded in configs and training logs.
 */

import { Rng } from "./rng.js";
import {
  T,
  Tape,
  channelUnitNorm,
  conv2d,
  meanAbs,
  meanSquare,
  relu,
  scalarAxpy,
  sub,
} from "./model/grad64.js";

export const LAMBDA_L1 = 0.9;
export const LAMBDA_PERCEPTUAL = 0.1;
export const PERCEPTUAL_BACKBONE = "random-conv-v1";

const FEATURE_WIDTHS = [16, 32, 64];
const BACKBONE_SEED = 0xc0ffee;

export interface PerceptualNet {
  kernels: T[]; // frozen: requiresGrad = false so only activations backprop
}

export function buildPerceptualNet(inChannels = 3): PerceptualNet {
  const rng = new Rng(BACKBONE_SEED);
  const kernels: T[] = [];
  let ci = inChannels;
  for (const co of FEATURE_WIDTHS) {
    const k = new T([3, 3, ci, co]);
    const std = Math.sqrt(2.0 / (9 * ci));
    for (let i = 0; i < k.size; i++) k.data[i] = rng.normal() * std;
    kernels.push(k);
    ci = co;
  }
  return { kernels };
}

function features(tape: Tape | null, net: PerceptualNet, x: T): T[] {
  const out: T[] = [];
  let cur = x;
  for (const k of net.kernels) {
    cur = relu(tape, conv2d(tape, cur, k, null, 2));
    out.push(channelUnitNorm(tape, cur));
  }
  return out;
}

/** LPIPS-style distance: mean squared difference of unit-normalized features,
 * averaged over the stack's layers. Scalar tensor. */
export function perceptualDistance(tape: Tape | null, net: PerceptualNet, pred: T, target: T): T {
  const fa = features(tape, net, pred);
  const fb = features(tape, net, target);
  let acc: T | null = null;
  for (let i = 0; i < fa.length; i++) {
    const term = meanSquare(tape, sub(tape, fa[i], fb[i]));
    acc = acc === null ? term : scalarAxpy(tape, 1, acc, 1, term);
  }
  return scalarAxpy(tape, 1 / fa.length, acc!, 0, acc!);
}

export function l1Loss(tape: Tape | null, pred: T, target: T): T {
  return meanAbs(tape, sub(tape, pred, target));
}

export interface LossParts {
  total: T;
  l1: number;
  perceptual: number;
}

/** L = 0.9*L1 + 0.1*perceptual. */
export function reconstructionLoss(
  tape: Tape | null,
  net: PerceptualNet,
  pred: T,
  target: T
): LossParts {
  if (pred.size !== target.size) {
    throw new Error(`loss dimension mismatch: ${pred.shape} vs ${target.shape}`);
  }
  const l1 = l1Loss(tape, pred, target);
  const lp = perceptualDistance(tape, net, pred, target);
  const total = scalarAxpy(tape, LAMBDA_L1, l1, LAMBDA_PERCEPTUAL, lp);
  return { total, l1: l1.data[0], perceptual: lp.data[0] };
}
