/** Fast inference executor: the same U-Net weights run through tfjs on the
 * WASM backend (training stays in the float64 engine — the wasm backend has
 * no conv backprop kernels). A cross-executor test pins the two outputs
 * together within float32 tolerance.
 */

import * as tf from "@tensorflow/tfjs";
import { setWasmPaths } from "@tensorflow/tfjs-backend-wasm";
import { createRequire } from "node:module";

import { BN_EPSILON } from "./grad64.js";
import { DECODER_LEAK, UNetConfig, stageWidth } from "./unet.js";
import { WeightsFile } from "./weights.js";

let backendReady: Promise<void> | null = null;

/** Select the fastest available backend (wasm, falling back to cpu). */
export function ensureBackend(): Promise<void> {
  if (!backendReady) {
    backendReady = (async () => {
      try {
        const require = createRequire(import.meta.url);
        const wasmDir = require
          .resolve("@tensorflow/tfjs-backend-wasm/package.json")
          .replace(/package\.json$/, "dist/");
        setWasmPaths(wasmDir);
        await import("@tensorflow/tfjs-backend-wasm");
        if (!(await tf.setBackend("wasm"))) throw new Error("wasm backend rejected");
      } catch {
        await tf.setBackend("cpu");
      }
      await tf.ready();
    })();
  }
  return backendReady;
}

export class TfjsUNet {
  private constructor(
    readonly config: UNetConfig,
    private model: tf.LayersModel
  ) {}

  static async fromWeights(w: WeightsFile): Promise<TfjsUNet> {
    await ensureBackend();
    const cfg = w.meta.config;
    const inp = tf.input({ shape: [null, null, cfg.inChannels] as unknown as number[] });
    const convLayers: Record<string, tf.layers.Layer> = {};
    const conv = (name: string, filters: number, kernel: number, x: tf.SymbolicTensor, act?: string) => {
      const layer = tf.layers.conv2d({
        name,
        filters,
        kernelSize: kernel,
        padding: "same",
        activation: act as "relu" | "sigmoid" | undefined,
      });
      convLayers[name] = layer;
      return layer.apply(x) as tf.SymbolicTensor;
    };
    const bn = (name: string, x: tf.SymbolicTensor) => {
      const layer = tf.layers.batchNormalization({ name, epsilon: BN_EPSILON });
      convLayers[name] = layer;
      return layer.apply(x) as tf.SymbolicTensor;
    };
    const up = (name: string, filters: number, x: tf.SymbolicTensor) => {
      const layer = tf.layers.conv2dTranspose({
        name,
        filters,
        kernelSize: 2,
        strides: 2,
        padding: "valid",
      });
      convLayers[name] = layer;
      return layer.apply(x) as tf.SymbolicTensor;
    };
    const reluL = (x: tf.SymbolicTensor) => tf.layers.activation({ activation: "relu" }).apply(x) as tf.SymbolicTensor;

    const skips: tf.SymbolicTensor[] = [];
    let cur = inp;
    for (let s = 0; s < cfg.depth; s++) {
      const width = stageWidth(cfg, s);
      cur = reluL(bn(`enc${s}_bn1`, conv(`enc${s}_conv1`, width, 3, cur)));
      cur = reluL(bn(`enc${s}_bn2`, conv(`enc${s}_conv2`, width, 3, cur)));
      skips.push(cur);
      cur = tf.layers.maxPooling2d({ poolSize: 2 }).apply(cur) as tf.SymbolicTensor;
    }
    const bw = stageWidth(cfg, cfg.depth);
    cur = reluL(bn("bott_bn1", conv("bott_conv1", bw, 3, cur)));
    cur = reluL(bn("bott_bn2", conv("bott_conv2", bw, 3, cur)));
    const leakyL = (x: tf.SymbolicTensor) =>
      tf.layers.leakyReLU({ alpha: DECODER_LEAK }).apply(x) as tf.SymbolicTensor;
    for (let s = cfg.depth - 1; s >= 0; s--) {
      const width = stageWidth(cfg, s);
      cur = up(`dec${s}_up`, width, cur);
      cur = tf.layers.concatenate().apply([cur, skips[s]]) as tf.SymbolicTensor;
      cur = leakyL(conv(`dec${s}_conv1`, width, 3, cur));
      cur = leakyL(conv(`dec${s}_conv2`, width, 3, cur));
    }
    cur = conv("final_conv", cfg.outChannels, 1, cur, "sigmoid");
    const model = tf.model({ inputs: inp, outputs: cur });

    for (const [name, cp] of w.params.convs) {
      convLayers[name].setWeights([
        tf.tensor(Float32Array.from(cp.kernel.data), cp.kernel.shape),
        tf.tensor1d(Float32Array.from(cp.bias.data)),
      ]);
    }
    for (const [name, bnState] of w.params.bns) {
      convLayers[name].setWeights([
        tf.tensor1d(Float32Array.from(bnState.gamma.data)),
        tf.tensor1d(Float32Array.from(bnState.beta.data)),
        tf.tensor1d(Float32Array.from(bnState.movingMean)),
        tf.tensor1d(Float32Array.from(bnState.movingVar)),
      ]);
    }
    return new TfjsUNet(cfg, model);
  }

  /** input: NHWC float32 (h*w*channels), already depth-normalized.
   * Returns float32 NHWC rgb in [0,1]. */
  async forward(input: Float32Array, height: number, width: number): Promise<Float32Array> {
    const div = 2 ** this.config.depth;
    if (height % div || width % div) {
      throw new Error(`input ${width}x${height} not divisible by 2^depth = ${div}`);
    }
    await ensureBackend();
    const result = tf.tidy(() => {
      const x = tf.tensor4d(input, [1, height, width, this.config.inChannels]);
      return this.model.predict(x) as tf.Tensor4D;
    });
    const data = (await result.data()) as Float32Array;
    result.dispose();
    return data;
  }

  dispose(): void {
    this.model.dispose();
  }
}
