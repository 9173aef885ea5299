"""Uniform spatial grid over a point cloud, and conservative frustum culling.

The grid is a counting-sort layout: `point_order` holds all point indices
grouped by cell, `cell_offsets[c] : cell_offsets[c+1]` delimits cell c. Cells
are indexed row-major over (x, y, z). Built once, immutable, shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import get_backend
from .cloud import PointCloud
from .errors import InvalidCloudError
from .geometry import Frustum

MAX_CELLS = 1 << 31
# Cell boxes are inflated by this much during plane tests so points sitting
# exactly on a cell boundary can never be lost to rounding.
CULL_SLACK = 1e-7


@dataclass(frozen=True)
class UniformGrid:
    """Cell partition of a point cloud (see module docstring for layout).

    sorted_positions/sorted_colors are the cloud reordered cell-major
    (= cloud arrays indexed by point_order). The renderer iterates those
    copies as contiguous ranges, trading one extra copy of the cloud for
    sequential reads in the hot loop.
    """

    origin: np.ndarray        # (3,) float64, component-wise min of positions
    cell_size: float
    dims: np.ndarray          # (3,) int64
    cell_offsets: np.ndarray  # (n_cells + 1,) int64, non-decreasing
    point_order: np.ndarray   # (count,) int64, permutation of point indices
    sorted_positions: np.ndarray
    sorted_colors: np.ndarray

    @property
    def n_cells(self) -> int:
        return int(self.dims[0] * self.dims[1] * self.dims[2])

    def occupied_cells(self) -> np.ndarray:
        return np.nonzero(np.diff(self.cell_offsets) > 0)[0]

    def cell_points(self, cell: int) -> np.ndarray:
        return self.point_order[self.cell_offsets[cell] : self.cell_offsets[cell + 1]]

    def gather_points(self, cells: np.ndarray) -> np.ndarray:
        """Concatenated point indices of the given cells, in cell order."""
        cells = np.asarray(cells, dtype=np.int64)
        starts = self.cell_offsets[cells]
        ends = self.cell_offsets[cells + 1]
        lengths = ends - starts
        total = int(lengths.sum())
        if total == 0:
            return np.empty(0, dtype=np.int64)
        # ranges [starts_i, ends_i) flattened without a python loop
        reps = np.repeat(ends - np.cumsum(lengths), lengths)
        flat = np.arange(total, dtype=np.int64) + reps
        return self.point_order[flat]

    def cell_boxes(self, cells: np.ndarray):
        """(min, max) corners, (N, 3) each, of the given cell indices."""
        cells = np.asarray(cells, dtype=np.int64)
        dy, dz = int(self.dims[1]), int(self.dims[2])
        iz = cells % dz
        iy = (cells // dz) % dy
        ix = cells // (dy * dz)
        idx = np.stack([ix, iy, iz], axis=1).astype(np.float64)
        lo = self.origin + idx * self.cell_size
        return lo, lo + self.cell_size

    def cell_ranges(self, cells: np.ndarray):
        """(starts, ends) ranges into the sorted arrays for the given cells,
        with adjacent ranges merged."""
        cells = np.asarray(cells, dtype=np.int64)
        starts = self.cell_offsets[cells]
        ends = self.cell_offsets[cells + 1]
        nonempty = ends > starts
        starts, ends = starts[nonempty], ends[nonempty]
        if starts.size == 0:
            return starts, ends
        breaks = np.nonzero(starts[1:] != ends[:-1])[0] + 1
        s = starts[np.concatenate(([0], breaks))]
        e = ends[np.concatenate((breaks - 1, [len(ends) - 1]))]
        return s, e


def build_grid(cloud: PointCloud, cell_size: float, backend=None) -> UniformGrid:
    """Partition `cloud` into cubic cells of `cell_size` meters.

    Origin is the component-wise position minimum; dims are ceil(extent/size)
    with a floor of 1 per axis. Deterministic: the point order within a cell
    follows the input order.
    """
    if cloud.count == 0:
        raise InvalidCloudError("empty cloud")
    if cell_size <= 0:
        raise ValueError("cell_size must be > 0")
    kern = get_backend() if backend is None else backend
    lo = cloud.positions.min(axis=0).astype(np.float64)
    hi = cloud.positions.max(axis=0).astype(np.float64)
    dims = np.maximum(np.ceil((hi - lo) / cell_size), 1.0)
    if dims.prod() > MAX_CELLS:
        raise InvalidCloudError(
            f"grid of {dims.astype(int)} cells exceeds {MAX_CELLS}; "
            "increase cell_size"
        )
    dims = dims.astype(np.int64)
    ids = kern.assign_cells(cloud.positions, lo, float(cell_size), dims)
    n_cells = int(dims.prod())
    if hasattr(kern, "counting_sort"):
        offsets, order = kern.counting_sort(ids, n_cells)
    else:
        counts = np.bincount(ids, minlength=n_cells)
        offsets = np.zeros(n_cells + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        order = np.argsort(ids, kind="stable")
    return UniformGrid(
        lo, float(cell_size), dims, offsets, order,
        np.ascontiguousarray(cloud.positions[order]),
        np.ascontiguousarray(cloud.colors[order]),
    )


def cull_cells(grid: UniformGrid, frustum: Frustum) -> np.ndarray:
    """Occupied cells whose (slightly inflated) boxes intersect the frustum.

    Conservative: the union of returned cells' points is a superset of every
    point that can rasterize. Returned sorted ascending.
    """
    cells = grid.occupied_cells()
    if cells.size == 0:
        return cells
    lo, hi = grid.cell_boxes(cells)
    lo = lo - CULL_SLACK
    hi = hi + CULL_SLACK
    keep = np.ones(cells.shape[0], dtype=bool)
    for nx, ny, nz, d in frustum.planes:
        # farthest-corner (p-vertex) test: box fully outside iff even the
        # corner deepest along the normal is behind the plane
        px = np.where(nx >= 0, hi[:, 0], lo[:, 0])
        py = np.where(ny >= 0, hi[:, 1], lo[:, 1])
        pz = np.where(nz >= 0, hi[:, 2], lo[:, 2])
        keep &= px * nx + py * ny + pz * nz + d >= 0
    return cells[keep]
