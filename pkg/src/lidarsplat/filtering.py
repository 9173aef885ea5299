"""Hierarchical depth-guided background filter.

Sparse foreground pixels let background points show through between them.
The filter min-pools the depth image into a pyramid, then walks back up:
at each upsampling step a child pixel survives only if it is within a
relative tolerance (filter_strength) of a reference depth taken from its
coarse parent (plus the parent's 8 neighbors when the parent sits on a depth
edge). Between steps, holes are filled by bilinear interpolation so the next
level always has references; the final step leaves holes empty.

Convention: inside this module empty pixels are +inf; FrameRGBDA encodes
them as depth 0. Everything here is pure and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import get_backend
from .frame import FrameRGBDA


@dataclass(frozen=True)
class FilterParams:
    """Knobs for the background filter.

    levels_n: min-pooling steps (receptive field 2^n pixels at the top).
    filter_strength: relative keep tolerance; child survives iff
        child - ref <= filter_strength * ref. Smaller keeps less.
    edge_threshold: relative Laplacian magnitude that marks a coarse pixel
        as a depth edge.
    """

    levels_n: int = 4
    filter_strength: float = 0.1
    edge_threshold: float = 0.25

    def __post_init__(self):
        if self.levels_n < 1:
            raise ValueError("levels_n must be >= 1")
        if self.filter_strength < 0:
            raise ValueError("filter_strength must be >= 0")
        if self.edge_threshold <= 0:
            raise ValueError("edge_threshold must be > 0")


@dataclass(frozen=True)
class DepthPyramid:
    """Min-pooled depth stack; levels[0] is coarsest, levels[-1] full size."""

    levels: tuple

    @property
    def steps(self) -> int:
        return len(self.levels) - 1


def to_sentinel(depth: np.ndarray) -> np.ndarray:
    """FrameRGBDA depth (0 = empty) -> +inf-sentinel float32 image."""
    d = np.ascontiguousarray(depth, dtype=np.float32).copy()
    d[d <= 0] = np.inf
    return d


def build_min_pyramid(depth: np.ndarray, levels_n: int, backend=None) -> DepthPyramid:
    """Min-pool `depth` (0 or +inf = empty) `levels_n` times, ceil division.

    Raises ValueError if either dimension is smaller than 2^levels_n.
    """
    if levels_n < 1:
        raise ValueError("levels_n must be >= 1")
    h, w = depth.shape
    if h < 2**levels_n or w < 2**levels_n:
        raise ValueError(
            f"image {w}x{h} too small for {levels_n} pyramid levels"
        )
    kern = get_backend() if backend is None else backend
    levels = [to_sentinel(depth)]
    for _ in range(levels_n):
        levels.append(kern.min_pool_2x2(levels[-1]))
    return DepthPyramid(tuple(reversed(levels)))


def laplacian_edges(depth: np.ndarray, edge_threshold: float, backend=None) -> np.ndarray:
    """Binary edge mask of a (+inf-sentinel) depth level.

    4-neighbor Laplacian cross; empty neighbors and out-of-bounds neighbors
    take the center value, so holes and borders never fire on their own.
    """
    kern = get_backend() if backend is None else backend
    return kern.laplacian_edges(
        np.ascontiguousarray(depth, dtype=np.float32), float(edge_threshold)
    )


def upsample_filter_step(
    coarse: np.ndarray,
    fine: np.ndarray,
    params: FilterParams,
    is_final: bool,
    backend=None,
) -> np.ndarray:
    """One upsampling step: keep fine pixels near a coarse reference depth,
    then (unless final) fill the remaining holes from the coarse level.
    """
    kern = get_backend() if backend is None else backend
    ch, cw = coarse.shape
    fh, fw = fine.shape
    if ch != (fh + 1) // 2 or cw != (fw + 1) // 2:
        raise ValueError(
            f"coarse {cw}x{ch} does not match ceil-half of fine {fw}x{fh}"
        )
    coarse = np.ascontiguousarray(coarse, dtype=np.float32)
    fine = np.ascontiguousarray(fine, dtype=np.float32)
    edges = kern.laplacian_edges(coarse, float(params.edge_threshold))
    out = kern.filter_keep(coarse, edges, fine, float(params.filter_strength))
    if not is_final:
        out = kern.bilinear_fill(coarse, out)
    return out


def filter_depth_image(depth: np.ndarray, params: FilterParams, backend=None) -> np.ndarray:
    """Run the full pyramid filter on a depth image; returns the kept mask."""
    pyr = build_min_pyramid(depth, params.levels_n, backend)
    up = pyr.levels[0]
    n = pyr.steps
    for i in range(1, n + 1):
        up = upsample_filter_step(up, pyr.levels[i], params, is_final=(i == n), backend=backend)
    return np.isfinite(up)


def depth_filter(frame: FrameRGBDA, params: FilterParams, backend=None) -> FrameRGBDA:
    """Background-filtered copy of `frame`.

    Kept pixels carry their input rgb/depth bit-identically; dropped pixels
    are zeroed with alpha 0. Never fills a pixel that was empty.
    """
    keep = filter_depth_image(frame.depth, params, backend)
    # multiply-by-mask: exact for finite non-negative channels, cheaper than where
    m = keep.astype(np.float32)
    return FrameRGBDA(
        rgb=frame.rgb * m[:, :, None],
        depth=frame.depth * m,
        alpha=frame.alpha * keep.astype(np.uint8),
    )
