/** Serve the neural reconstruction bridge over TCP. */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { PassthroughModel, UNetBridgeModel, startBridge } from "../bridge.js";
import { TfjsUNet } from "../model/tfjsExec.js";
import { loadWeights } from "../model/weights.js";

const argv = yargs(hideBin(process.argv))
  .option("weights", { type: "string", describe: "weights file; omit for --passthrough" })
  .option("passthrough", { type: "boolean", default: false,
                           describe: "echo rgb planes (framing tests, no model)" })
  .option("host", { type: "string", default: "127.0.0.1" })
  .option("port", { type: "number", default: 7171 })
  .strict()
  .parseSync();

async function main() {
  let model;
  if (argv.passthrough) {
    model = new PassthroughModel();
  } else {
    if (!argv.weights) throw new Error("need --weights or --passthrough");
    const weights = loadWeights(argv.weights);
    console.error(
      `loaded ${argv.weights}: flavor=${weights.meta.flavor} ` +
      `depth=${weights.meta.config.depth} width=${weights.meta.config.baseWidth} ` +
      `epochs=${weights.meta.epochsTrained}`
    );
    model = new UNetBridgeModel(await TfjsUNet.fromWeights(weights));
  }
  const server = await startBridge(model, argv.port, argv.host);
  const addr = server.address();
  const where = typeof addr === "object" && addr ? `${addr.address}:${addr.port}` : String(addr);
  console.error(`bridge listening on ${where}`);
}

main().catch((e) => {
  console.error(`error: ${e.message}`);
  process.exit(1);
});
