"""Per-stage frame timing: culling, projection, background filter."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud
from .filtering import FilterParams, depth_filter
from .frame import RenderParams
from .grid import UniformGrid
from .render import candidates, project_candidates

STAGES = ("culling_ms", "projection_ms", "filter_ms", "total_ms")

# Soft performance gates (milliseconds), from the acceptance criteria.
CULL_BUDGET_MS_PER_MPOINT = 60.0
FRAME_BUDGET_MS = 33.0


@dataclass
class BenchReport:
    points_total: int
    resolution: tuple
    frames: int
    backend: str
    stats: dict          # stage -> {"mean": ms, "p50": ms, "p95": ms}
    fps: float

    def to_dict(self) -> dict:
        return {
            "points_total": self.points_total,
            "resolution": {"width": self.resolution[0], "height": self.resolution[1]},
            "frames": self.frames,
            "backend": self.backend,
            "stats": self.stats,
            "fps": self.fps,
        }

    def gate_warnings(self) -> list:
        """Human-readable soft-gate violations (empty when within budget)."""
        warnings = []
        mpoints = self.points_total / 1e6
        cull_budget = CULL_BUDGET_MS_PER_MPOINT * max(mpoints, 1.0)
        cull = self.stats["culling_ms"]["mean"]
        if cull > cull_budget:
            warnings.append(
                f"culling {cull:.2f} ms exceeds {cull_budget:.0f} ms budget "
                f"for {self.points_total} points"
            )
        total = self.stats["total_ms"]["mean"]
        if total > FRAME_BUDGET_MS:
            warnings.append(
                f"raw+filter frame {total:.2f} ms exceeds {FRAME_BUDGET_MS:.0f} ms budget"
            )
        return warnings


def _summary(samples) -> dict:
    arr = np.asarray(samples, dtype=np.float64)
    return {
        "mean": float(arr.mean()),
        "p50": float(np.percentile(arr, 50)),
        "p95": float(np.percentile(arr, 95)),
    }


def run_bench(
    cloud: PointCloud,
    grid: UniformGrid,
    cameras,
    rparams: RenderParams,
    fparams: FilterParams,
    n_frames: int,
    backend=None,
    backend_name: str = "default",
    workers=None,
) -> BenchReport:
    """Render `n_frames` (cycling through `cameras`) and time each stage."""
    if n_frames < 1:
        raise ValueError("need at least one frame")
    cams = list(cameras)
    samples = {stage: [] for stage in STAGES}
    resolution = (cams[0].width, cams[0].height)
    for i in range(n_frames):
        camera = cams[i % len(cams)]
        t0 = time.perf_counter()
        cands = candidates(cloud, grid, camera)
        t1 = time.perf_counter()
        frame = project_candidates(cands, camera, rparams, backend, workers)
        t2 = time.perf_counter()
        depth_filter(frame, fparams, backend)
        t3 = time.perf_counter()
        samples["culling_ms"].append((t1 - t0) * 1e3)
        samples["projection_ms"].append((t2 - t1) * 1e3)
        samples["filter_ms"].append((t3 - t2) * 1e3)
        samples["total_ms"].append((t3 - t0) * 1e3)
    stats = {stage: _summary(vals) for stage, vals in samples.items()}
    return BenchReport(
        points_total=cloud.count,
        resolution=resolution,
        frames=n_frames,
        backend=backend_name,
        stats=stats,
        fps=1000.0 / stats["total_ms"]["mean"],
    )
