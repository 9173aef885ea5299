"""Synthetic training-pair generation.

Ground-truth photos registered to the cloud are never pixel-perfect, so
instead of pairing renders with photos directly, the input frame borrows the
photo's colors where the projection says a point landed. Two recipes:

  filtered: project, depth-filter, keep the filtered depth/alpha, color the
      filled pixels from the ground truth.
  leaky: keep the raw projection's depth/alpha; pixels classified foreground
      by the filter take ground-truth color, background pixels keep the
      projected point color (the network learns to ignore them).

Brightness/contrast augmentation over seeded spatial groups mimics the color
seams of multi-position scans. Everything is a pure function of the inputs
and a seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cloud import PointCloud
from .errors import DatasetError
from .filtering import FilterParams, depth_filter
from .frame import FrameRGBDA, RenderParams
from .geometry import CameraModel
from .grid import UniformGrid, build_grid
from .io.dataset import DatasetManifest, pair_paths, save_manifest
from .io.frames import save_image_rgb, write_frame
from .render import project_points

_LATTICE_STEP = 32  # px between noise lattice nodes for group assignment


@dataclass(frozen=True)
class AugmentParams:
    """Grouped brightness/contrast jitter; identity when ranges collapse."""

    brightness_delta_range: tuple = (-0.15, 0.15)
    contrast_scale_range: tuple = (0.8, 1.25)
    group_count_range: tuple = (2, 4)
    seed: int = 0

    def __post_init__(self):
        for name in ("brightness_delta_range", "contrast_scale_range", "group_count_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is not ordered: {(lo, hi)}")
        if self.group_count_range[0] < 1:
            raise ValueError("group count must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass
class TrainingPair:
    """input: synthetic RGBDA frame; target: the untouched ground-truth RGB."""

    input: FrameRGBDA
    target: np.ndarray
    id: str


def _check_gt(gt_image: np.ndarray, camera: CameraModel) -> np.ndarray:
    gt = np.ascontiguousarray(gt_image, dtype=np.float32)
    if gt.shape != (camera.height, camera.width, 3):
        raise DatasetError(
            f"ground truth {gt.shape} does not match camera "
            f"{camera.height}x{camera.width}x3"
        )
    return gt


def make_filtered_pair(
    cloud: PointCloud,
    grid: UniformGrid,
    gt_image: np.ndarray,
    gt_camera: CameraModel,
    fparams: FilterParams,
    rparams: RenderParams,
    pair_id: str = "",
    backend=None,
) -> TrainingPair:
    gt = _check_gt(gt_image, gt_camera)
    frame = project_points(cloud, grid, gt_camera, rparams, backend=backend)
    filtered = depth_filter(frame, fparams, backend=backend)
    mask = filtered.alpha.astype(bool)
    rgb = np.where(mask[:, :, None], gt, np.float32(0.0))
    inp = FrameRGBDA(rgb=rgb, depth=filtered.depth, alpha=filtered.alpha)
    return TrainingPair(input=inp, target=gt, id=pair_id)


def make_leaky_pair(
    cloud: PointCloud,
    grid: UniformGrid,
    gt_image: np.ndarray,
    gt_camera: CameraModel,
    fparams: FilterParams,
    rparams: RenderParams,
    pair_id: str = "",
    backend=None,
) -> TrainingPair:
    gt = _check_gt(gt_image, gt_camera)
    frame = project_points(cloud, grid, gt_camera, rparams, backend=backend)
    keep = depth_filter(frame, fparams, backend=backend).alpha.astype(bool)
    filled = frame.alpha.astype(bool)
    background = filled & ~keep
    rgb = np.where(
        keep[:, :, None], gt, np.where(background[:, :, None], frame.rgb, np.float32(0.0))
    )
    inp = FrameRGBDA(rgb=rgb, depth=frame.depth, alpha=frame.alpha)
    return TrainingPair(input=inp, target=gt, id=pair_id)


def _group_field(height: int, width: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Low-frequency group id per pixel: value-noise lattice quantized to k."""
    gh = height // _LATTICE_STEP + 2
    gw = width // _LATTICE_STEP + 2
    lattice = rng.random((gh, gw))
    y = np.arange(height) / _LATTICE_STEP
    x = np.arange(width) / _LATTICE_STEP
    y0 = y.astype(np.int64)
    x0 = x.astype(np.int64)
    fy = (y - y0)[:, None]
    fx = (x - x0)[None, :]
    v00 = lattice[y0[:, None], x0[None, :]]
    v01 = lattice[y0[:, None], x0[None, :] + 1]
    v10 = lattice[y0[:, None] + 1, x0[None, :]]
    v11 = lattice[y0[:, None] + 1, x0[None, :] + 1]
    field = (
        v00 * (1 - fy) * (1 - fx)
        + v01 * (1 - fy) * fx
        + v10 * fy * (1 - fx)
        + v11 * fy * fx
    )
    lo, hi = field.min(), field.max()
    if hi > lo:
        field = (field - lo) / (hi - lo)
    else:
        field = np.zeros_like(field)
    return np.minimum((field * k).astype(np.int64), k - 1)


def augment_brightness_contrast(
    image: np.ndarray,
    alpha: np.ndarray,
    params: AugmentParams,
    seed_sequence: np.random.SeedSequence | None = None,
) -> np.ndarray:
    """Per-group affine color jitter on filled pixels; empty pixels untouched.

    out = clamp(c * (in - 0.5) + 0.5 + b, 0, 1) with (c, b) drawn per group.
    Same seed, same output, bit for bit.
    """
    if seed_sequence is None:
        seed_sequence = np.random.SeedSequence(params.seed)
    rng = np.random.default_rng(seed_sequence)
    h, w = image.shape[:2]
    lo_k, hi_k = params.group_count_range
    k = int(rng.integers(lo_k, hi_k + 1))
    groups = _group_field(h, w, k, rng)
    contrast = rng.uniform(*params.contrast_scale_range, size=k)
    brightness = rng.uniform(*params.brightness_delta_range, size=k)
    # c*(x - 0.5) + 0.5 + b, folded so the identity draw (c=1, b=0) is exact
    shift = (0.5 - 0.5 * contrast) + brightness
    c = contrast[groups][:, :, None].astype(np.float32)
    s = shift[groups][:, :, None].astype(np.float32)
    jittered = np.clip(c * image + s, 0.0, 1.0)
    filled = alpha.astype(bool)[:, :, None]
    return np.where(filled, jittered, image).astype(np.float32)


def generate_dataset(
    cloud: PointCloud,
    scene_frames,
    out_dir,
    mode: str,
    augment: AugmentParams,
    fparams: FilterParams,
    rparams: RenderParams,
    backend=None,
    grid: UniformGrid | None = None,
    progress=None,
) -> DatasetManifest:
    """Write one training pair per scene frame plus a manifest.

    scene_frames: sequence of (id, CameraModel, gt_image) with identical
    image dimensions. Deterministic: same inputs and seed give a
    byte-identical directory tree.
    """
    if mode not in ("filtered", "leaky"):
        raise DatasetError(f"unknown mode {mode!r}")
    frames = list(scene_frames)
    if not frames:
        raise DatasetError("scene has no frames")
    dims = {(cam.width, cam.height) for _, cam, _ in frames}
    if len(dims) != 1:
        raise DatasetError(f"frames disagree on dimensions: {sorted(dims)}")
    out = Path(out_dir)
    (out / "pairs").mkdir(parents=True, exist_ok=True)
    if grid is None:
        grid = build_grid(cloud, rparams.cell_size, backend)
    make_pair = make_filtered_pair if mode == "filtered" else make_leaky_pair
    ids = []
    for i, (pair_id, camera, gt_image) in enumerate(frames):
        pair = make_pair(
            cloud, grid, gt_image, camera, fparams, rparams,
            pair_id=str(pair_id), backend=backend,
        )
        child = np.random.SeedSequence(entropy=augment.seed, spawn_key=(i,))
        rgb = augment_brightness_contrast(pair.input.rgb, pair.input.alpha, augment, child)
        inp = FrameRGBDA(rgb=rgb, depth=pair.input.depth, alpha=pair.input.alpha)
        paths = pair_paths(out, pair.id)
        write_frame(inp, paths["input"])
        save_image_rgb(paths["target"], pair.target)
        ids.append(pair.id)
        if progress:
            progress(i + 1, len(frames), pair.id)
    manifest = DatasetManifest(
        mode=mode,
        ids=tuple(ids),
        params={
            "filter": {
                "levels_n": fparams.levels_n,
                "filter_strength": fparams.filter_strength,
                "edge_threshold": fparams.edge_threshold,
            },
            "render": {
                "zbuffer_epsilon_rel": rparams.zbuffer_epsilon_rel,
                "cell_size": rparams.cell_size,
            },
            "augment": {
                "brightness_delta_range": list(augment.brightness_delta_range),
                "contrast_scale_range": list(augment.contrast_scale_range),
                "group_count_range": list(augment.group_count_range),
            },
        },
        seed=augment.seed,
    )
    save_manifest(out, manifest)
    return manifest
