/** Train the reconstruction U-Net on a dataset produced by `lidarsplat synth`. */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadDataset } from "../dataset.js";
import { DEFAULT_CONFIG } from "../model/unet.js";
import { DEFAULT_TRAIN, trainModel } from "../train.js";

const argv = yargs(hideBin(process.argv))
  .option("dataset", { type: "string", demandOption: true, describe: "dataset directory" })
  .option("out", { type: "string", demandOption: true, describe: "weights output path" })
  .option("log", { type: "string", default: "train.log.jsonl" })
  .option("epochs", { type: "number", default: DEFAULT_TRAIN.epochs })
  .option("steps-per-epoch", { type: "number", default: DEFAULT_TRAIN.stepsPerEpoch })
  .option("batch-size", { type: "number", default: DEFAULT_TRAIN.batchSize })
  .option("crop", { type: "number", default: DEFAULT_TRAIN.crop })
  .option("lr", { type: "number", default: DEFAULT_TRAIN.learningRate })
  .option("seed", { type: "number", default: DEFAULT_TRAIN.seed })
  .option("depth", { type: "number", default: DEFAULT_CONFIG.depth })
  .option("base-width", { type: "number", default: DEFAULT_CONFIG.baseWidth })
  .option("znear", { type: "number", default: DEFAULT_CONFIG.depthZNear })
  .option("resume", { type: "boolean", default: false })
  .strict()
  .parseSync();

const dataset = loadDataset(argv.dataset, argv.znear);
console.error(
  `dataset: ${dataset.pairs.length} pairs (${dataset.manifest.mode}), ` +
  `training depth=${argv.depth} width=${argv["base-width"]} crop=${argv.crop}`
);
const netConfig = {
  ...DEFAULT_CONFIG,
  depth: argv.depth,
  baseWidth: argv["base-width"],
  depthZNear: argv.znear,
};
trainModel(
  dataset,
  netConfig,
  {
    datasetDir: argv.dataset,
    weightsOut: argv.out,
    logPath: argv.log,
    epochs: argv.epochs,
    stepsPerEpoch: argv["steps-per-epoch"],
    batchSize: argv["batch-size"],
    crop: argv.crop,
    learningRate: argv.lr,
    seed: argv.seed,
    resume: argv.resume,
    valFraction: DEFAULT_TRAIN.valFraction,
  },
  (s) => console.error(`epoch ${s.epoch}: train ${s.trainLoss.toFixed(5)} (l1 ${s.trainL1.toFixed(5)})` +
                       (s.valLoss !== null ? ` val ${s.valLoss.toFixed(5)}` : ""))
);
console.error(`weights written to ${argv.out}`);
