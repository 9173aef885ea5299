/** Launch the browser viewer. Spawns `lidarsplat serve` for the given cloud
 * (or attaches to --render-endpoint), then serves the canvas UI.
 */

import { spawn } from "node:child_process";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { BridgeClient, RenderClient, parseEndpoint } from "../viewer/render.js";
import { ViewerApp } from "../viewer/server.js";

const argv = yargs(hideBin(process.argv))
  .option("cloud", { type: "string", describe: "PLY cloud (spawns lidarsplat serve)" })
  .option("cameras", { type: "string", describe: "camera JSON (with --cloud)" })
  .option("render-endpoint", { type: "string", describe: "attach to a running lidarsplat serve" })
  .option("bridge", { type: "string", describe: "neural bridge endpoint host:port" })
  .option("port", { type: "number", default: 8080 })
  .option("levels", { type: "number", default: 4 })
  .option("filter-strength", { type: "number", default: 0.1 })
  .option("edge-threshold", { type: "number", default: 0.25 })
  .option("resolution", { type: "string", default: "960x720",
                          describe: "render resolution (with --cloud), WxH divisible by 16" })
  .strict()
  .parseSync();

async function renderEndpoint(): Promise<{ host: string; port: number }> {
  if (argv["render-endpoint"]) return parseEndpoint(argv["render-endpoint"]);
  if (!argv.cloud || !argv.cameras) {
    throw new Error("need --cloud and --cameras, or --render-endpoint");
  }
  const child = spawn(
    "lidarsplat",
    ["serve", "--cloud", argv.cloud, "--cameras", argv.cameras, "--port", "0",
     "--levels", String(argv.levels), "--filter-strength", String(argv["filter-strength"])],
    { stdio: ["ignore", "ignore", "pipe"] }
  );
  child.on("exit", (code) => {
    console.error(`render service exited (${code})`);
    process.exit(1);
  });
  process.on("exit", () => child.kill());
  return new Promise((resolve, reject) => {
    let buf = "";
    const timer = setTimeout(() => reject(new Error("render service did not start")), 60_000);
    child.stderr.on("data", (chunk) => {
      buf += chunk.toString();
      const m = buf.match(/listening on ([\d.]+):(\d+)/);
      if (m) {
        clearTimeout(timer);
        resolve({ host: m[1], port: parseInt(m[2], 10) });
      }
    });
  });
}

async function main() {
  const render = await renderEndpoint();
  console.error(`render service at ${render.host}:${render.port}`);
  const bridge = argv.bridge
    ? new BridgeClient(parseEndpoint(argv.bridge).host, parseEndpoint(argv.bridge).port)
    : null;
  if (bridge && !(await bridge.reachable())) {
    console.error("warning: bridge endpoint unreachable; neural mode will be refused");
  }
  const app = new ViewerApp({
    renderClient: new RenderClient(render.host, render.port),
    bridge,
    maxLevels: maxLevelsFor(argv.resolution),
    filter: {
      levels: argv.levels,
      filterStrength: argv["filter-strength"],
      edgeThreshold: argv["edge-threshold"],
    },
  });
  await app.listen(argv.port);
  console.error(`viewer at http://127.0.0.1:${argv.port}/`);
}

function maxLevelsFor(resolution: string): number {
  const m = resolution.match(/^(\d+)x(\d+)$/);
  if (!m) throw new Error(`bad --resolution ${resolution}`);
  const small = Math.min(parseInt(m[1], 10), parseInt(m[2], 10));
  return Math.max(1, Math.floor(Math.log2(small)));
}

main().catch((e) => {
  console.error(`error: ${e.message}`);
  process.exit(1);
});
