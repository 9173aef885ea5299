#!/usr/bin/env python3
"""Compare the compiled kernel backend against the numpy fallback on a
synthetic 1M-point scene (same measurement the CLI runs via
`lidarsplat bench --compare-backends`, without needing files on disk)."""

import argparse
import json

import numpy as np

from lidarsplat import (
    CameraModel,
    FilterParams,
    PointCloud,
    RenderParams,
    available_backends,
    build_grid,
    get_backend,
    run_bench,
)


def synthetic_scene(n_points: int, seed: int = 404):
    rng = np.random.default_rng(seed)
    pts = np.empty((n_points, 3), np.float32)
    pts[:, 0] = rng.uniform(-2, 2, n_points)
    pts[:, 1] = rng.uniform(-2, 2, n_points)
    pts[:, 2] = rng.uniform(5, 13, n_points)
    cloud = PointCloud(pts, rng.integers(0, 256, (n_points, 3), dtype=np.uint8))
    camera = CameraModel(
        fx=700.0, fy=700.0, cx=480.0, cy=360.0, width=960, height=720
    )
    return cloud, camera


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=1_000_000)
    ap.add_argument("--frames", type=int, default=10)
    args = ap.parse_args()

    cloud, camera = synthetic_scene(args.points)
    grid = build_grid(cloud, 1.0)
    reports = {}
    for name in available_backends():
        report = run_bench(
            cloud, grid, [camera], RenderParams(), FilterParams(),
            n_frames=args.frames, backend=get_backend(name), backend_name=name,
        )
        reports[name] = report.to_dict()
    print(json.dumps(reports, indent=2))
    if len(reports) == 2:
        a, b = reports["numpy"], reports["native"]
        speedup = a["stats"]["total_ms"]["mean"] / b["stats"]["total_ms"]["mean"]
        print(f"\nnative is {speedup:.1f}x faster end to end "
              f"({b['stats']['total_ms']['mean']:.1f} ms vs "
              f"{a['stats']['total_ms']['mean']:.1f} ms per frame)")


if __name__ == "__main__":
    main()
