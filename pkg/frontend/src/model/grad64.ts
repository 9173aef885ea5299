/** Minimal float64 reverse-mode autodiff over NHWC typed arrays.
 *
 * This is the training engine: double precision keeps finite-difference
 * gradient checks meaningful, and the op set is exactly what the compact
 * U-Net needs (conv2d, transposed 2x2 conv, 2x2 max pool, batch norm,
 * relu/sigmoid, channel concat, channel unit-norm, elementwise reductions).
 * Inference at speed lives in the tfjs executor; both share one weight file.
 */

export class T {
  data: Float64Array;
  grad: Float64Array | null = null;
  constructor(
    public shape: number[],
    data?: Float64Array,
    public requiresGrad = false
  ) {
    const n = shape.reduce((a, b) => a * b, 1);
    if (data) {
      if (data.length !== n) throw new Error(`data length ${data.length} != shape ${shape}`);
      this.data = data;
    } else {
      this.data = new Float64Array(n);
    }
    if (requiresGrad) this.grad = new Float64Array(n);
  }

  get size(): number {
    return this.data.length;
  }

  zeroGrad(): void {
    if (this.grad) this.grad.fill(0);
  }
}

/** Records backward closures; replayed in reverse for backprop. */
export class Tape {
  private ops: (() => void)[] = [];

  record(backward: () => void): void {
    this.ops.push(backward);
  }

  backward(loss: T): void {
    if (loss.size !== 1) throw new Error("backward expects a scalar loss");
    if (!loss.grad) loss.grad = new Float64Array(1);
    loss.grad[0] = 1.0;
    for (let i = this.ops.length - 1; i >= 0; i--) this.ops[i]();
  }
}

function needsGrad(t: T): boolean {
  return t.grad !== null;
}

function out(shape: number[], wantGrad: boolean): T {
  const t = new T(shape);
  if (wantGrad) t.grad = new Float64Array(t.size);
  return t;
}

/** conv2d, NHWC, kernel [kh, kw, inC, outC], zero 'same' padding for odd
 * kernels (pad = floor(k/2)), arbitrary stride. */
export function conv2d(tape: Tape | null, x: T, w: T, b: T | null, stride = 1): T {
  const [n, h, wd, ci] = x.shape;
  const [kh, kw, wci, co] = w.shape;
  if (wci !== ci) throw new Error(`conv2d channel mismatch ${wci} != ${ci}`);
  const ph = Math.floor(kh / 2);
  const pw = Math.floor(kw / 2);
  const ho = Math.floor((h + 2 * ph - kh) / stride) + 1;
  const wo = Math.floor((wd + 2 * pw - kw) / stride) + 1;
  const y = out([n, ho, wo, co], tape !== null && (needsGrad(x) || needsGrad(w)));
  const X = x.data, W = w.data, Y = y.data;
  for (let nn = 0; nn < n; nn++) {
    for (let oy = 0; oy < ho; oy++) {
      for (let ox = 0; ox < wo; ox++) {
        const yBase = ((nn * ho + oy) * wo + ox) * co;
        if (b) {
          const B = b.data;
          for (let c = 0; c < co; c++) Y[yBase + c] = B[c];
        }
        for (let ky = 0; ky < kh; ky++) {
          const iy = oy * stride + ky - ph;
          if (iy < 0 || iy >= h) continue;
          for (let kx = 0; kx < kw; kx++) {
            const ix = ox * stride + kx - pw;
            if (ix < 0 || ix >= wd) continue;
            const xBase = ((nn * h + iy) * wd + ix) * ci;
            const wBase = (ky * kw + kx) * ci * co;
            for (let c = 0; c < ci; c++) {
              const xv = X[xBase + c];
              if (xv === 0) continue;
              const wRow = wBase + c * co;
              for (let o = 0; o < co; o++) Y[yBase + o] += xv * W[wRow + o];
            }
          }
        }
      }
    }
  }
  if (tape && y.grad) {
    tape.record(() => {
      const dY = y.grad!;
      const dX = x.grad, dW = w.grad, dB = b?.grad ?? null;
      for (let nn = 0; nn < n; nn++) {
        for (let oy = 0; oy < ho; oy++) {
          for (let ox = 0; ox < wo; ox++) {
            const yBase = ((nn * ho + oy) * wo + ox) * co;
            if (dB) for (let o = 0; o < co; o++) dB[o] += dY[yBase + o];
            for (let ky = 0; ky < kh; ky++) {
              const iy = oy * stride + ky - ph;
              if (iy < 0 || iy >= h) continue;
              for (let kx = 0; kx < kw; kx++) {
                const ix = ox * stride + kx - pw;
                if (ix < 0 || ix >= wd) continue;
                const xBase = ((nn * h + iy) * wd + ix) * ci;
                const wBase = (ky * kw + kx) * ci * co;
                for (let c = 0; c < ci; c++) {
                  const wRow = wBase + c * co;
                  if (dX) {
                    let acc = 0;
                    for (let o = 0; o < co; o++) acc += dY[yBase + o] * W[wRow + o];
                    dX[xBase + c] += acc;
                  }
                  if (dW) {
                    const xv = X[xBase + c];
                    if (xv !== 0) {
                      for (let o = 0; o < co; o++) dW[wRow + o] += xv * dY[yBase + o];
                    }
                  }
                }
              }
            }
          }
        }
      }
    });
  }
  return y;
}

/** Transposed conv, kernel 2x2 stride 2 (non-overlapping): NHWC doubling.
 * Kernel layout [2, 2, outC, inC] (matches the tfjs conv2dTranspose layout).
 */
export function convTranspose2x2(tape: Tape | null, x: T, w: T, b: T | null): T {
  const [n, h, wd, ci] = x.shape;
  const [kh, kw, co, wci] = w.shape;
  if (kh !== 2 || kw !== 2 || wci !== ci) throw new Error("convTranspose2x2 expects [2,2,outC,inC]");
  const y = out([n, 2 * h, 2 * wd, co], tape !== null && (needsGrad(x) || needsGrad(w)));
  const X = x.data, W = w.data, Y = y.data;
  for (let nn = 0; nn < n; nn++) {
    for (let iy = 0; iy < h; iy++) {
      for (let ix = 0; ix < wd; ix++) {
        const xBase = ((nn * h + iy) * wd + ix) * ci;
        for (let dy = 0; dy < 2; dy++) {
          for (let dx = 0; dx < 2; dx++) {
            const yBase = ((nn * 2 * h + 2 * iy + dy) * 2 * wd + (2 * ix + dx)) * co;
            const wBase = (dy * 2 + dx) * co * ci;
            for (let o = 0; o < co; o++) {
              let acc = b ? b.data[o] : 0;
              const wRow = wBase + o * ci;
              for (let c = 0; c < ci; c++) acc += X[xBase + c] * W[wRow + c];
              Y[yBase + o] = acc;
            }
          }
        }
      }
    }
  }
  if (tape && y.grad) {
    tape.record(() => {
      const dY = y.grad!;
      const dX = x.grad, dW = w.grad, dB = b?.grad ?? null;
      for (let nn = 0; nn < n; nn++) {
        for (let iy = 0; iy < h; iy++) {
          for (let ix = 0; ix < wd; ix++) {
            const xBase = ((nn * h + iy) * wd + ix) * ci;
            for (let dy = 0; dy < 2; dy++) {
              for (let dx = 0; dx < 2; dx++) {
                const yBase = ((nn * 2 * h + 2 * iy + dy) * 2 * wd + (2 * ix + dx)) * co;
                const wBase = (dy * 2 + dx) * co * ci;
                for (let o = 0; o < co; o++) {
                  const g = dY[yBase + o];
                  if (g === 0) continue;
                  const wRow = wBase + o * ci;
                  if (dB) dB[o] += g;
                  for (let c = 0; c < ci; c++) {
                    if (dX) dX[xBase + c] += g * W[wRow + c];
                    if (dW) dW[wRow + c] += g * X[xBase + c];
                  }
                }
              }
            }
          }
        }
      }
    });
  }
  return y;
}

export function maxPool2(tape: Tape | null, x: T): T {
  const [n, h, w, c] = x.shape;
  if (h % 2 || w % 2) throw new Error(`maxPool2 needs even dims, got ${h}x${w}`);
  const ho = h / 2, wo = w / 2;
  const y = out([n, ho, wo, c], tape !== null && needsGrad(x));
  const arg = new Int32Array(y.size);
  const X = x.data, Y = y.data;
  for (let nn = 0; nn < n; nn++) {
    for (let oy = 0; oy < ho; oy++) {
      for (let ox = 0; ox < wo; ox++) {
        const yBase = ((nn * ho + oy) * wo + ox) * c;
        for (let cc = 0; cc < c; cc++) {
          let best = -Infinity, bestIdx = -1;
          for (let dy = 0; dy < 2; dy++) {
            for (let dx = 0; dx < 2; dx++) {
              const idx = ((nn * h + 2 * oy + dy) * w + 2 * ox + dx) * c + cc;
              if (X[idx] > best) {
                best = X[idx];
                bestIdx = idx;
              }
            }
          }
          Y[yBase + cc] = best;
          arg[yBase + cc] = bestIdx;
        }
      }
    }
  }
  if (tape && y.grad) {
    tape.record(() => {
      const dY = y.grad!, dX = x.grad!;
      for (let i = 0; i < dY.length; i++) dX[arg[i]] += dY[i];
    });
  }
  return y;
}

export interface BnState {
  gamma: T;
  beta: T;
  movingMean: Float64Array;
  movingVar: Float64Array;
}

export const BN_EPSILON = 1e-3; // matches the tfjs BatchNormalization default
export const BN_MOMENTUM = 0.99;

export function batchNorm(tape: Tape | null, x: T, bn: BnState, training: boolean): T {
  const [n, h, w, c] = x.shape;
  const m = n * h * w;
  const y = out(x.shape, tape !== null && (needsGrad(x) || needsGrad(bn.gamma)));
  const X = x.data, Y = y.data, G = bn.gamma.data, B = bn.beta.data;
  const mean = new Float64Array(c);
  const variance = new Float64Array(c);
  if (training) {
    for (let i = 0; i < X.length; i++) mean[i % c] += X[i];
    for (let cc = 0; cc < c; cc++) mean[cc] /= m;
    for (let i = 0; i < X.length; i++) {
      const d = X[i] - mean[i % c];
      variance[i % c] += d * d;
    }
    for (let cc = 0; cc < c; cc++) variance[cc] /= m;
    for (let cc = 0; cc < c; cc++) {
      bn.movingMean[cc] = BN_MOMENTUM * bn.movingMean[cc] + (1 - BN_MOMENTUM) * mean[cc];
      bn.movingVar[cc] = BN_MOMENTUM * bn.movingVar[cc] + (1 - BN_MOMENTUM) * variance[cc];
    }
  } else {
    mean.set(bn.movingMean);
    variance.set(bn.movingVar);
  }
  const inv = new Float64Array(c);
  for (let cc = 0; cc < c; cc++) inv[cc] = 1.0 / Math.sqrt(variance[cc] + BN_EPSILON);
  const xhat = tape && y.grad ? new Float64Array(X.length) : null;
  for (let i = 0; i < X.length; i++) {
    const cc = i % c;
    const xh = (X[i] - mean[cc]) * inv[cc];
    if (xhat) xhat[i] = xh;
    Y[i] = G[cc] * xh + B[cc];
  }
  if (tape && y.grad) {
    tape.record(() => {
      const dY = y.grad!;
      const dG = bn.gamma.grad, dB = bn.beta.grad, dX = x.grad;
      const sumDy = new Float64Array(c);
      const sumDyXhat = new Float64Array(c);
      for (let i = 0; i < dY.length; i++) {
        const cc = i % c;
        sumDy[cc] += dY[i];
        sumDyXhat[cc] += dY[i] * xhat![i];
      }
      if (dG) for (let cc = 0; cc < c; cc++) dG[cc] += sumDyXhat[cc];
      if (dB) for (let cc = 0; cc < c; cc++) dB[cc] += sumDy[cc];
      if (dX) {
        if (training) {
          for (let i = 0; i < dY.length; i++) {
            const cc = i % c;
            dX[i] +=
              (G[cc] * inv[cc]) *
              (dY[i] - sumDy[cc] / m - (xhat![i] * sumDyXhat[cc]) / m);
          }
        } else {
          for (let i = 0; i < dY.length; i++) {
            const cc = i % c;
            dX[i] += G[cc] * inv[cc] * dY[i];
          }
        }
      }
    });
  }
  return y;
}

export function relu(tape: Tape | null, x: T): T {
  const y = out(x.shape, tape !== null && needsGrad(x));
  const X = x.data, Y = y.data;
  for (let i = 0; i < X.length; i++) Y[i] = X[i] > 0 ? X[i] : 0;
  if (tape && y.grad) {
    tape.record(() => {
      const dY = y.grad!, dX = x.grad!;
      for (let i = 0; i < dY.length; i++) if (X[i] > 0) dX[i] += dY[i];
    });
  }
  return y;
}

/** Leaky relu: keeps a small negative slope so units cannot die outright
 * (the decoder has no batch norm to rescue collapsed channels). */
export function leakyRelu(tape: Tape | null, x: T, alpha = 0.1): T {
  const y = out(x.shape, tape !== null && needsGrad(x));
  const X = x.data, Y = y.data;
  for (let i = 0; i < X.length; i++) Y[i] = X[i] > 0 ? X[i] : alpha * X[i];
  if (tape && y.grad) {
    tape.record(() => {
      const dY = y.grad!, dX = x.grad!;
      for (let i = 0; i < dY.length; i++) dX[i] += X[i] > 0 ? dY[i] : alpha * dY[i];
    });
  }
  return y;
}

export function sigmoid(tape: Tape | null, x: T): T {
  const y = out(x.shape, tape !== null && needsGrad(x));
  const X = x.data, Y = y.data;
  for (let i = 0; i < X.length; i++) Y[i] = 1.0 / (1.0 + Math.exp(-X[i]));
  if (tape && y.grad) {
    tape.record(() => {
      const dY = y.grad!, dX = x.grad!;
      for (let i = 0; i < dY.length; i++) dX[i] += dY[i] * Y[i] * (1 - Y[i]);
    });
  }
  return y;
}

/** Channel concatenation of two NHWC tensors. */
export function concatC(tape: Tape | null, a: T, b: T): T {
  const [n, h, w, ca] = a.shape;
  const [n2, h2, w2, cb] = b.shape;
  if (n !== n2 || h !== h2 || w !== w2) throw new Error("concatC spatial mismatch");
  const c = ca + cb;
  const y = out([n, h, w, c], tape !== null && (needsGrad(a) || needsGrad(b)));
  const A = a.data, B = b.data, Y = y.data;
  const px = n * h * w;
  for (let p = 0; p < px; p++) {
    Y.set(A.subarray(p * ca, (p + 1) * ca), p * c);
    Y.set(B.subarray(p * cb, (p + 1) * cb), p * c + ca);
  }
  if (tape && y.grad) {
    tape.record(() => {
      const dY = y.grad!;
      for (let p = 0; p < px; p++) {
        if (a.grad) for (let i = 0; i < ca; i++) a.grad[p * ca + i] += dY[p * c + i];
        if (b.grad) for (let i = 0; i < cb; i++) b.grad[p * cb + i] += dY[p * c + ca + i];
      }
    });
  }
  return y;
}

export function sub(tape: Tape | null, a: T, b: T): T {
  if (a.size !== b.size) throw new Error("sub size mismatch");
  const y = out(a.shape, tape !== null && (needsGrad(a) || needsGrad(b)));
  for (let i = 0; i < a.size; i++) y.data[i] = a.data[i] - b.data[i];
  if (tape && y.grad) {
    tape.record(() => {
      const dY = y.grad!;
      if (a.grad) for (let i = 0; i < dY.length; i++) a.grad[i] += dY[i];
      if (b.grad) for (let i = 0; i < dY.length; i++) b.grad[i] -= dY[i];
    });
  }
  return y;
}

/** Mean of |x| over every element -> scalar. */
export function meanAbs(tape: Tape | null, x: T): T {
  const y = out([1], tape !== null && needsGrad(x));
  let acc = 0;
  for (let i = 0; i < x.size; i++) acc += Math.abs(x.data[i]);
  y.data[0] = acc / x.size;
  if (tape && y.grad) {
    tape.record(() => {
      const g = y.grad![0] / x.size;
      const dX = x.grad!;
      for (let i = 0; i < x.size; i++) dX[i] += x.data[i] >= 0 ? g : -g;
    });
  }
  return y;
}

/** Mean of x^2 over every element -> scalar. */
export function meanSquare(tape: Tape | null, x: T): T {
  const y = out([1], tape !== null && needsGrad(x));
  let acc = 0;
  for (let i = 0; i < x.size; i++) acc += x.data[i] * x.data[i];
  y.data[0] = acc / x.size;
  if (tape && y.grad) {
    tape.record(() => {
      const g = (2 * y.grad![0]) / x.size;
      const dX = x.grad!;
      for (let i = 0; i < x.size; i++) dX[i] += g * x.data[i];
    });
  }
  return y;
}

/** Per-pixel unit normalization across channels: x / sqrt(sum_c x^2 + eps). */
export function channelUnitNorm(tape: Tape | null, x: T, eps = 1e-10): T {
  const [n, h, w, c] = x.shape;
  const y = out(x.shape, tape !== null && needsGrad(x));
  const px = n * h * w;
  const X = x.data, Y = y.data;
  const invNorm = new Float64Array(px);
  for (let p = 0; p < px; p++) {
    let s = eps;
    for (let cc = 0; cc < c; cc++) s += X[p * c + cc] * X[p * c + cc];
    const inv = 1.0 / Math.sqrt(s);
    invNorm[p] = inv;
    for (let cc = 0; cc < c; cc++) Y[p * c + cc] = X[p * c + cc] * inv;
  }
  if (tape && y.grad) {
    tape.record(() => {
      const dY = y.grad!, dX = x.grad!;
      for (let p = 0; p < px; p++) {
        let dot = 0;
        for (let cc = 0; cc < c; cc++) dot += dY[p * c + cc] * Y[p * c + cc];
        for (let cc = 0; cc < c; cc++) {
          dX[p * c + cc] += (dY[p * c + cc] - Y[p * c + cc] * dot) * invNorm[p];
        }
      }
    });
  }
  return y;
}

/** c0*a + c1*b for scalars (loss combination). */
export function scalarAxpy(tape: Tape | null, c0: number, a: T, c1: number, b: T): T {
  if (a.size !== 1 || b.size !== 1) throw new Error("scalarAxpy expects scalars");
  const y = out([1], tape !== null && (needsGrad(a) || needsGrad(b)));
  y.data[0] = c0 * a.data[0] + c1 * b.data[0];
  if (tape && y.grad) {
    tape.record(() => {
      if (a.grad) a.grad[0] += c0 * y.grad![0];
      if (b.grad) b.grad[0] += c1 * y.grad![0];
    });
  }
  return y;
}
