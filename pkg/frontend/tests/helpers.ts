/** Shared fixtures: synthetic scenes written through the renderer's own
 * formats, plus helpers to drive the python CLI (the primary component's
 * external interface).
 */

import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync, mkdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { writeRgb } from "../src/png.js";

export interface SceneSpec {
  width: number;
  height: number;
  fx: number;
  fy: number;
}

export const SCENE: SceneSpec = { width: 64, height: 48, fx: 50, fy: 50 };

/** Two depth planes, front on the (u+v even) checkerboard, one point per
 * pixel through the identity camera at the origin. */
export function twoPlanePly(path: string, scene: SceneSpec, front = 1.0, back = 5.0): void {
  const { width, height, fx, fy } = scene;
  const cx = width / 2, cy = height / 2;
  const lines: string[] = [];
  for (let v = 0; v < height; v++) {
    for (let u = 0; u < width; u++) {
      const isFront = (u + v) % 2 === 0;
      const d = isFront ? front : back;
      const x = ((u + 0.5 - cx) / fx) * d;
      const y = ((v + 0.5 - cy) / fy) * d;
      const c = isFront ? "200 60 60" : "60 60 200";
      lines.push(`${x} ${y} ${d} ${c}`);
    }
  }
  const header =
    "ply\nformat ascii 1.0\n" +
    `element vertex ${lines.length}\n` +
    "property float x\nproperty float y\nproperty float z\n" +
    "property uchar red\nproperty uchar green\nproperty uchar blue\n" +
    "end_header\n";
  writeFileSync(path, header + lines.join("\n") + "\n");
}

export function camerasJson(
  path: string,
  scene: SceneSpec,
  frames: { id: string; c2w: number[] }[]
): void {
  writeFileSync(
    path,
    JSON.stringify({
      intrinsics: {
        fx: scene.fx, fy: scene.fy,
        cx: scene.width / 2, cy: scene.height / 2,
        width: scene.width, height: scene.height,
      },
      frames: frames.map((f) => ({ id: f.id, camera_to_world: f.c2w })),
    })
  );
}

export function identityPose(dx = 0, dy = 0, dz = 0): number[] {
  return [1, 0, 0, dx, 0, 1, 0, dy, 0, 0, 1, dz, 0, 0, 0, 1];
}

/** Smooth per-frame gradient image: learnable ground truth for overfitting. */
export function smoothGt(scene: SceneSpec, phase: number): Float32Array {
  const { width, height } = scene;
  const data = new Float32Array(width * height * 3);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = (y * width + x) * 3;
      data[i] = 0.5 + 0.4 * Math.sin((x / width) * Math.PI * 2 + phase);
      data[i + 1] = 0.5 + 0.4 * Math.cos((y / height) * Math.PI * 2 + phase * 0.7);
      data[i + 2] = 0.2 + 0.6 * ((x + y) / (width + height));
    }
  }
  return data;
}

export function runPython(code: string): string {
  return execFileSync("python3", ["-c", code], { encoding: "utf8", timeout: 300_000 });
}

export function runCli(args: string[]): string {
  return execFileSync("lidarsplat", args, { encoding: "utf8", timeout: 300_000 });
}

/** Build a scene + synthetic dataset through the real CLI; returns paths. */
export function makeDataset(opts: {
  frames: number;
  mode: "filtered" | "leaky";
  filterStrength?: number;
  levels?: number;
  augment?: boolean;
  /** "drift" offsets each camera slightly (sparse fill); "identity" keeps
   * every pose at the construction camera (dense fill). */
  poses?: "identity" | "drift";
}): { dir: string; dataset: string; ply: string; cameras: string } {
  const dir = mkdtempSync(join(tmpdir(), "lsfe-"));
  const ply = join(dir, "scene.ply");
  const cameras = join(dir, "cams.json");
  twoPlanePly(ply, SCENE);
  const frames = Array.from({ length: opts.frames }, (_, i) => ({
    id: `f${i}`,
    c2w:
      opts.poses === "identity"
        ? identityPose()
        : identityPose(0.002 * i, 0.001 * i, -0.01 * i),
  }));
  camerasJson(cameras, SCENE, frames);
  const gtDir = join(dir, "gt");
  mkdirSync(gtDir);
  for (let i = 0; i < opts.frames; i++) {
    writeRgb(join(gtDir, `f${i}.png`), SCENE.width, SCENE.height, smoothGt(SCENE, i * 0.9));
  }
  const dataset = join(dir, "ds");
  const augArgs = opts.augment
    ? []
    : ["--brightness", "0", "0", "--contrast", "1", "1", "--groups", "1", "1"];
  runCli([
    "synth", "--cloud", ply, "--cameras", cameras, "--gt-dir", gtDir,
    "--mode", opts.mode, "--out", dataset, "--seed", "5",
    "--filter-strength", String(opts.filterStrength ?? 0.5),
    "--levels", String(opts.levels ?? 3),
    ...augArgs,
  ]);
  return { dir, dataset, ply, cameras };
}

/** Spawn `lidarsplat serve` and resolve its bound port. */
export function spawnRenderService(
  ply: string,
  cameras: string,
  extra: string[] = []
): Promise<{ child: ChildProcess; host: string; port: number }> {
  const child = spawn(
    "lidarsplat",
    ["serve", "--cloud", ply, "--cameras", cameras, "--port", "0", ...extra],
    { stdio: ["ignore", "ignore", "pipe"] }
  );
  return new Promise((resolve, reject) => {
    let buf = "";
    const timer = setTimeout(() => {
      child.kill();
      reject(new Error(`render service did not start: ${buf}`));
    }, 60_000);
    child.stderr!.on("data", (chunk) => {
      buf += chunk.toString();
      const m = buf.match(/listening on ([\d.]+):(\d+)/);
      if (m) {
        clearTimeout(timer);
        resolve({ child, host: m[1], port: parseInt(m[2], 10) });
      }
    });
  });
}
