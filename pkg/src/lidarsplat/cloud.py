"""Point cloud container: flat position/color arrays, the sole scene representation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidCloudError


@dataclass(frozen=True)
class PointCloud:
    """Colored point cloud in the world frame.

    positions: (N, 3) float32, meters.
    colors:    (N, 3) uint8, sRGB.

    Immutable after construction; safe to share across renderer threads.
    """

    positions: np.ndarray
    colors: np.ndarray

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=np.float32)
        col = np.ascontiguousarray(self.colors, dtype=np.uint8)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise InvalidCloudError(f"positions must be (N, 3), got {pos.shape}")
        if col.shape != pos.shape:
            raise InvalidCloudError(
                f"colors shape {col.shape} does not match positions {pos.shape}"
            )
        if not np.isfinite(pos).all():
            raise InvalidCloudError("invalid point: non-finite position component")
        pos.setflags(write=False)
        col.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "colors", col)

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    def permuted(self, order: np.ndarray) -> "PointCloud":
        """Reordered copy; rendering output must be invariant to this."""
        return PointCloud(self.positions[order], self.colors[order])
