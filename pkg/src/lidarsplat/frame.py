"""Five-channel RGBDA frame, the unit every pipeline stage consumes and produces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameFormatError


@dataclass(frozen=True)
class RenderParams:
    """Projection knobs: soft z-buffer tolerance and grid cell size."""

    zbuffer_epsilon_rel: float = 0.01
    cell_size: float = 1.0

    def __post_init__(self):
        if self.zbuffer_epsilon_rel < 0:
            raise ValueError("zbuffer_epsilon_rel must be >= 0")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be > 0")


@dataclass
class FrameRGBDA:
    """Projected frame: rgb in [0, 1] (sRGB-encoded floats), z-depth in meters,
    binary fill mask. depth == 0 marks an empty pixel and implies alpha == 0
    and black rgb.

    rgb:   (H, W, 3) float32
    depth: (H, W)    float32
    alpha: (H, W)    uint8, values {0, 1}
    """

    rgb: np.ndarray
    depth: np.ndarray
    alpha: np.ndarray

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    @classmethod
    def empty(cls, width: int, height: int) -> "FrameRGBDA":
        return cls(
            rgb=np.zeros((height, width, 3), dtype=np.float32),
            depth=np.zeros((height, width), dtype=np.float32),
            alpha=np.zeros((height, width), dtype=np.uint8),
        )

    def validate(self) -> "FrameRGBDA":
        """Check the channel-coupling invariants; raise FrameFormatError if broken."""
        h, w = self.depth.shape
        if self.rgb.shape != (h, w, 3) or self.alpha.shape != (h, w):
            raise FrameFormatError("channel shapes disagree")
        if self.rgb.dtype != np.float32 or self.depth.dtype != np.float32:
            raise FrameFormatError("rgb and depth must be float32")
        filled = self.depth > 0
        if not np.array_equal(filled, self.alpha.astype(bool)):
            raise FrameFormatError("alpha does not match depth > 0")
        if not (self.depth >= 0).all() or not np.isfinite(self.depth).all():
            raise FrameFormatError("depth must be finite and >= 0")
        if (self.rgb[~filled] != 0).any():
            raise FrameFormatError("empty pixels must have black rgb")
        if (self.rgb < 0).any() or (self.rgb > 1).any():
            raise FrameFormatError("rgb out of [0, 1]")
        return self

    def copy(self) -> "FrameRGBDA":
        return FrameRGBDA(self.rgb.copy(), self.depth.copy(), self.alpha.copy())
