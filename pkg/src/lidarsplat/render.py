"""Deterministic point projection into an RGBDA frame.

Two passes over the candidate points: (1) per-pixel minimum depth, with each
candidate's pixel and camera depth cached, (2) integer accumulation of the
colors of every point within the relative soft z-buffer tolerance of its
pixel's minimum. Both reductions are order-free (min, integer add), so the
output is bit-identical for any point order and any worker count.

Candidates come either from frustum-culled grid cells (contiguous ranges of
the grid's cell-major arrays) or from the whole cloud (one range) on the
brute-force reference path.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import get_backend
from .cloud import PointCloud
from .frame import FrameRGBDA, RenderParams
from .geometry import CameraModel, extract_frustum
from .grid import UniformGrid, cull_cells

_PARALLEL_MIN_POINTS = 1 << 18


def worker_count(n_points: int) -> int:
    """Workers for a render pass; LIDARSPLAT_THREADS caps, small jobs get 1."""
    if n_points < _PARALLEL_MIN_POINTS:
        return 1
    limit = os.cpu_count() or 1
    env = os.environ.get("LIDARSPLAT_THREADS")
    if env:
        limit = min(limit, max(1, int(env)))
    return max(1, limit)


@dataclass
class Candidates:
    """Points surviving cell-level culling: ranges into position/color arrays."""

    positions: np.ndarray
    colors: np.ndarray
    starts: np.ndarray
    ends: np.ndarray

    @property
    def count(self) -> int:
        return int((self.ends - self.starts).sum())


def candidates(cloud: PointCloud, grid: UniformGrid | None, camera: CameraModel) -> Candidates:
    """Candidate point set for a view (the whole cloud when grid is None)."""
    if grid is None:
        return Candidates(
            cloud.positions, cloud.colors,
            np.zeros(1, dtype=np.int64),
            np.array([cloud.count], dtype=np.int64),
        )
    frustum = extract_frustum(camera)
    starts, ends = grid.cell_ranges(cull_cells(grid, frustum))
    return Candidates(grid.sorted_positions, grid.sorted_colors, starts, ends)


def _split_ranges(starts, ends, workers):
    """Partition ranges into ~equal point-count chunks (ranges stay whole)."""
    counts = ends - starts
    cum = np.cumsum(counts)
    total = int(cum[-1])
    bounds = np.searchsorted(cum, np.linspace(0, total, workers + 1)[1:-1], side="left") + 1
    pieces = []
    prev = 0
    for b in list(bounds) + [len(starts)]:
        if b > prev:
            pieces.append((starts[prev:b], ends[prev:b]))
        prev = b
    return pieces


def project_candidates(
    cands: Candidates,
    camera: CameraModel,
    params: RenderParams,
    backend=None,
    workers: int | None = None,
) -> FrameRGBDA:
    """Rasterize the candidate points as 1x1 pixels; see module docstring."""
    kern = get_backend() if backend is None else backend
    w, h = camera.width, camera.height
    rot = camera.world_to_camera.rotation
    t = camera.world_to_camera.translation
    total = cands.count
    if workers is None:
        workers = worker_count(total)
    intr = (
        float(camera.fx), float(camera.fy), float(camera.cx), float(camera.cy),
        w, h, float(camera.z_near), float(camera.z_far),
    )
    eps = float(params.zbuffer_epsilon_rel)

    def pass1(starts, ends, minz):
        n = int((ends - starts).sum())
        pix = np.empty(n, dtype=np.int64)
        z = np.empty(n, dtype=np.float64)
        kern.project_min_depth(
            cands.positions, starts, ends, rot, t, *intr, minz, pix, z
        )
        return pix, z

    if workers <= 1 or len(cands.starts) < 2:
        minz = np.full(h * w, np.inf, dtype=np.float64)
        pix, z = pass1(cands.starts, cands.ends, minz)
        accum = np.zeros((h * w, 4), dtype=np.uint64)
        kern.project_accumulate(
            cands.colors, cands.starts, cands.ends, pix, z, eps, minz, accum
        )
    else:
        chunks = _split_ranges(cands.starts, cands.ends, workers)
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:

            def run1(chunk):
                buf = np.full(h * w, np.inf, dtype=np.float64)
                pix, z = pass1(chunk[0], chunk[1], buf)
                return buf, pix, z

            results = list(pool.map(run1, chunks))
            minz = np.minimum.reduce([r[0] for r in results])

            def run2(args):
                chunk, (_, pix, z) = args
                buf = np.zeros((h * w, 4), dtype=np.uint64)
                kern.project_accumulate(
                    cands.colors, chunk[0], chunk[1], pix, z, eps, minz, buf
                )
                return buf

            accum = sum(pool.map(run2, zip(chunks, results)))

    return assemble_frame(minz, accum, w, h)


def assemble_frame(minz: np.ndarray, accum: np.ndarray, width: int, height: int) -> FrameRGBDA:
    """Fold the pass buffers into a FrameRGBDA (exact integer-mean colors)."""
    count = accum[:, 3]
    filled = count > 0
    rgb = np.zeros((height * width, 3), dtype=np.float32)
    if filled.any():
        denom = count[filled].astype(np.float64) * 255.0
        rgb[filled] = (accum[filled, :3].astype(np.float64) / denom[:, None]).astype(
            np.float32
        )
    depth = np.where(filled, minz, 0.0).astype(np.float32)
    return FrameRGBDA(
        rgb=rgb.reshape(height, width, 3),
        depth=depth.reshape(height, width),
        alpha=filled.astype(np.uint8).reshape(height, width),
    )


def project_points(
    cloud: PointCloud,
    grid: UniformGrid | None,
    camera: CameraModel,
    params: RenderParams | None = None,
    backend=None,
    workers: int | None = None,
) -> FrameRGBDA:
    """Render `cloud` through `camera`. With a grid, candidates come from
    frustum-culled cells; with grid=None every point is considered (the
    brute-force reference path). Both yield bit-identical frames.
    """
    params = params or RenderParams()
    cands = candidates(cloud, grid, camera)
    return project_candidates(cands, camera, params, backend, workers)
