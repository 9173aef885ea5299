import { describe, expect, it } from "vitest";

import {
  LAMBDA_L1,
  LAMBDA_PERCEPTUAL,
  buildPerceptualNet,
  l1Loss,
  perceptualDistance,
  reconstructionLoss,
} from "../src/loss.js";
import { T } from "../src/model/grad64.js";
import { Rng } from "../src/rng.js";

function image(rng: Rng, h: number, w: number): T {
  const t = new T([1, h, w, 3]);
  for (let i = 0; i < t.size; i++) t.data[i] = rng.next();
  return t;
}

describe("reconstruction loss", () => {
  const net = buildPerceptualNet(3);

  it("weights are 0.9 and 0.1", () => {
    expect(LAMBDA_L1).toBe(0.9);
    expect(LAMBDA_PERCEPTUAL).toBe(0.1);
  });

  it("is zero for identical images", () => {
    const a = image(new Rng(1), 16, 16);
    const b = new T(a.shape, Float64Array.from(a.data));
    const parts = reconstructionLoss(null, net, a, b);
    expect(parts.l1).toBe(0);
    expect(parts.perceptual).toBe(0);
    expect(parts.total.data[0]).toBe(0);
  });

  it("L1 term is exactly 0.09 for a 0.1 uniform offset", () => {
    const a = image(new Rng(2), 16, 16);
    for (let i = 0; i < a.size; i++) a.data[i] = 0.25; // clear of clamp edges
    const b = new T(a.shape);
    for (let i = 0; i < b.size; i++) b.data[i] = 0.35;
    const l1 = l1Loss(null, a, b);
    expect(l1.data[0]).toBeCloseTo(0.1, 12);
    const parts = reconstructionLoss(null, net, a, b);
    expect(LAMBDA_L1 * l1.data[0]).toBeCloseTo(0.09, 12);
    // total = 0.9*L1 + 0.1*perceptual, and perceptual >= 0
    expect(parts.total.data[0]).toBeCloseTo(
      LAMBDA_L1 * parts.l1 + LAMBDA_PERCEPTUAL * parts.perceptual, 12
    );
    expect(parts.total.data[0]).toBeGreaterThanOrEqual(0.09 - 1e-12);
    expect(parts.perceptual).toBeGreaterThanOrEqual(0);
  });

  it("perceptual distance is symmetric, non-negative, deterministic", () => {
    const a = image(new Rng(3), 16, 16);
    const b = image(new Rng(4), 16, 16);
    const d1 = perceptualDistance(null, net, a, b).data[0];
    const d2 = perceptualDistance(null, net, b, a).data[0];
    expect(d1).toBeGreaterThan(0);
    expect(d1).toBeCloseTo(d2, 12);
    const net2 = buildPerceptualNet(3);
    expect(perceptualDistance(null, net2, a, b).data[0]).toBe(d1);
  });

  it("rejects dimension mismatch", () => {
    const a = image(new Rng(5), 16, 16);
    const b = image(new Rng(6), 16, 32);
    expect(() => reconstructionLoss(null, net, a, b)).toThrow(/mismatch/);
  });
});
