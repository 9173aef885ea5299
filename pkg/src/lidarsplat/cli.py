"""Command-line surface: render stills and paths, filter stored frames,
synthesize training datasets, benchmark throughput, compute image metrics,
and run the interactive render service.

Exit codes: 0 success, 2 usage, 3 data error, 4 bridge error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import available_backends, get_backend
from .bench import run_bench
from .bridge import reconstruct
from .errors import BridgeError, DatasetError, LidarSplatError
from .filtering import FilterParams, depth_filter
from .frame import RenderParams
from .io.cameras import load_cameras
from .io.frames import load_image_rgb, read_frame, save_image_rgb, write_frame
from .io.ply import load_ply
from .io.tensor import RawTensorFrame
from .metrics import psnr, ssim
from .render import project_points
from .serve import RenderService, serve_forever
from .synth import AugmentParams, generate_dataset

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_BRIDGE = 4


def _add_scene_args(p):
    p.add_argument("--cloud", required=True, help="PLY point cloud")
    p.add_argument("--cameras", required=True, help="camera JSON file")
    p.add_argument("--znear", type=float, default=0.1)
    p.add_argument("--zfar", type=float, default=100.0)


def _add_param_args(p):
    p.add_argument("--cell-size", type=float, default=1.0, help="grid cell size, meters")
    p.add_argument("--zbuf-eps", type=float, default=0.01,
                   help="relative soft z-buffer tolerance")
    p.add_argument("--levels", type=int, default=4, help="depth filter pyramid steps")
    p.add_argument("--filter-strength", type=float, default=0.1)
    p.add_argument("--edge-threshold", type=float, default=0.25)
    p.add_argument("--backend", choices=available_backends(), default=None)


def _params(args):
    rparams = RenderParams(zbuffer_epsilon_rel=args.zbuf_eps, cell_size=args.cell_size)
    fparams = FilterParams(
        levels_n=args.levels,
        filter_strength=args.filter_strength,
        edge_threshold=args.edge_threshold,
    )
    backend = get_backend(args.backend) if args.backend else None
    return rparams, fparams, backend


def _load_scene(args):
    cloud = load_ply(args.cloud)
    cameras = load_cameras(args.cameras, z_near=args.znear, z_far=args.zfar)
    return cloud, cameras


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lidarsplat",
        description="Real-time LiDAR point cloud rendering pipeline.",
    )
    parser.add_argument("--version", action="version", version=f"lidarsplat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render one frame (raw + filtered [+ neural])")
    _add_scene_args(p)
    _add_param_args(p)
    p.add_argument("--frame-id", required=True)
    p.add_argument("--out", required=True, help="output base path")
    p.add_argument("--bridge", default=None, help="neural reconstruction endpoint")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("path", help="render a camera trajectory to numbered frames")
    _add_scene_args(p)
    _add_param_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--render-mode", choices=("raw", "filtered"), default="filtered")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("filter", help="run the depth filter on a stored frame")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--filter-strength", type=float, default=0.1)
    p.add_argument("--edge-threshold", type=float, default=0.25)
    p.add_argument("--backend", choices=available_backends(), default=None)
    p.add_argument("--in", dest="input", required=True, help="input frame base path")
    p.add_argument("--out", required=True, help="output frame base path")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("synth", help="generate a synthetic training dataset")
    _add_scene_args(p)
    _add_param_args(p)
    p.add_argument("--gt-dir", required=True, help="directory of <frame-id>.png photos")
    p.add_argument("--mode", choices=("filtered", "leaky"), required=True)
    p.add_argument("--out", required=True, help="dataset output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--brightness", type=float, nargs=2, default=(-0.15, 0.15),
                   metavar=("LO", "HI"))
    p.add_argument("--contrast", type=float, nargs=2, default=(0.8, 1.25),
                   metavar=("LO", "HI"))
    p.add_argument("--groups", type=int, nargs=2, default=(2, 4), metavar=("LO", "HI"))
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="per-stage frame timing report (JSON)")
    _add_scene_args(p)
    _add_param_args(p)
    p.add_argument("--frames", type=int, default=10)
    p.add_argument("--strict-perf", action="store_true",
                   help="fail (exit 1) when soft performance gates are exceeded")
    p.add_argument("--compare-backends", action="store_true",
                   help="run every available backend and report side by side")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("metrics", help="PSNR/SSIM between two images (JSON)")
    p.add_argument("pred", help="predicted image (.png or raw tensor .rtf)")
    p.add_argument("gt", help="ground-truth image (.png or raw tensor .rtf)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("serve", help="interactive render service over TCP")
    _add_scene_args(p)
    _add_param_args(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0, help="0 picks a free port")
    p.set_defaults(func=cmd_serve)

    return parser


def _resolve_camera(cameras: dict, frame_id: str):
    if frame_id not in cameras:
        available = ", ".join(sorted(cameras))
        raise DatasetError(f"unknown frame id {frame_id!r}; available: {available}")
    return cameras[frame_id]


def cmd_render(args) -> int:
    rparams, fparams, backend = _params(args)
    cloud, cameras = _load_scene(args)
    camera = _resolve_camera(cameras, args.frame_id)
    from .grid import build_grid

    grid = build_grid(cloud, rparams.cell_size, backend)
    frame = project_points(cloud, grid, camera, rparams, backend=backend)
    write_frame(frame, args.out + ".raw")
    filtered = depth_filter(frame, fparams, backend=backend)
    write_frame(filtered, args.out + ".filtered")
    if args.bridge:
        try:
            rgb = reconstruct(filtered, args.bridge)
        except BridgeError as e:
            print(f"bridge failed (raw and filtered frames were written): {e}",
                  file=sys.stderr)
            return EXIT_BRIDGE
        save_image_rgb(args.out + ".recon.png", np.clip(rgb, 0.0, 1.0))
    return EXIT_OK


def cmd_path(args) -> int:
    rparams, fparams, backend = _params(args)
    cloud, cameras = _load_scene(args)
    from .grid import build_grid

    grid = build_grid(cloud, rparams.cell_size, backend)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, (frame_id, camera) in enumerate(cameras.items()):
        frame = project_points(cloud, grid, camera, rparams, backend=backend)
        if args.render_mode == "filtered":
            frame = depth_filter(frame, fparams, backend=backend)
        write_frame(frame, out / f"{i:05d}_{frame_id}")
        print(f"[{i + 1}/{len(cameras)}] {frame_id}", file=sys.stderr)
    return EXIT_OK


def cmd_filter(args) -> int:
    backend = get_backend(args.backend) if args.backend else None
    fparams = FilterParams(
        levels_n=args.levels,
        filter_strength=args.filter_strength,
        edge_threshold=args.edge_threshold,
    )
    frame = read_frame(args.input)
    write_frame(depth_filter(frame, fparams, backend=backend), args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    rparams, fparams, backend = _params(args)
    cloud, cameras = _load_scene(args)
    gt_dir = Path(args.gt_dir)
    scene_frames = []
    missing = []
    for frame_id, camera in cameras.items():
        gt_path = gt_dir / f"{frame_id}.png"
        if not gt_path.exists():
            missing.append(frame_id)
            continue
        scene_frames.append((frame_id, camera, load_image_rgb(gt_path)))
    if missing:
        raise DatasetError(f"missing ground-truth images for: {', '.join(missing)}")
    augment = AugmentParams(
        brightness_delta_range=tuple(args.brightness),
        contrast_scale_range=tuple(args.contrast),
        group_count_range=tuple(args.groups),
        seed=args.seed,
    )

    def progress(done, total, pair_id):
        print(f"[{done}/{total}] {pair_id}", file=sys.stderr)

    manifest = generate_dataset(
        cloud, scene_frames, args.out, args.mode, augment, fparams, rparams,
        backend=backend, progress=progress,
    )
    print(json.dumps({"pairs": len(manifest.ids), "out": str(args.out)}))
    return EXIT_OK


def cmd_bench(args) -> int:
    rparams, fparams, backend = _params(args)
    cloud, cameras = _load_scene(args)
    from .grid import build_grid

    grid = build_grid(cloud, rparams.cell_size, backend)
    cams = list(cameras.values())
    names = available_backends() if args.compare_backends else [
        args.backend or ("native" in available_backends() and "native" or "numpy")
    ]
    reports = {}
    warnings = []
    for name in names:
        report = run_bench(
            cloud, grid, cams, rparams, fparams, args.frames,
            backend=get_backend(name), backend_name=name,
        )
        reports[name] = report
        warnings.extend(f"[{name}] {w}" for w in report.gate_warnings())
    if args.compare_backends:
        print(json.dumps({name: r.to_dict() for name, r in reports.items()}, indent=2))
    else:
        print(json.dumps(next(iter(reports.values())).to_dict(), indent=2))
    for w in warnings:
        print(f"perf warning: {w}", file=sys.stderr)
    if warnings and args.strict_perf:
        return 1
    return EXIT_OK


def _load_metric_image(path: str) -> np.ndarray:
    if path.endswith(".rtf"):
        with open(path, "rb") as f:
            tensor = RawTensorFrame.read(f)
        return np.moveaxis(tensor.planes[:3], 0, 2)
    return load_image_rgb(path)


def cmd_metrics(args) -> int:
    pred = _load_metric_image(args.pred)
    gt = _load_metric_image(args.gt)
    if pred.shape != gt.shape:
        raise DatasetError(f"image dimensions differ: {pred.shape} vs {gt.shape}")
    print(json.dumps({"psnr": psnr(pred, gt), "ssim": ssim(pred, gt)}))
    return EXIT_OK


def cmd_serve(args) -> int:
    rparams, fparams, backend = _params(args)
    cloud, cameras = _load_scene(args)
    base_camera = next(iter(cameras.values()))
    service = RenderService(cloud, base_camera, rparams, fparams, backend)
    serve_forever(service, args.host, args.port)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BridgeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BRIDGE
    except (LidarSplatError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
