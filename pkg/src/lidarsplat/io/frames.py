"""Frame persistence: 8-bit PNG color, lossless PFM depth, PNG fill mask.

Depth goes to PFM (float32) because the filter's relative thresholds do not
survive integer quantization. A stored frame is three files sharing a base
path: `base.png`, `base.pfm`, `base.a.png`.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from ..errors import FrameFormatError
from ..frame import FrameRGBDA


def write_pfm(path, data: np.ndarray) -> None:
    """Grayscale little-endian PFM ('Pf', scale -1.0, rows bottom-up)."""
    data = np.asarray(data, dtype=np.float32)
    if data.ndim != 2:
        raise ValueError("PFM writer expects a 2D array")
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.flipud(data).astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic != b"Pf":
            raise FrameFormatError(f"not a grayscale PFM (magic {magic!r})")
        dims = f.readline().split()
        if len(dims) != 2:
            raise FrameFormatError("malformed PFM dimensions line")
        w, h = int(dims[0]), int(dims[1])
        scale = float(f.readline().strip())
        count = w * h
        data = np.frombuffer(f.read(count * 4), dtype="<f4" if scale < 0 else ">f4")
        if data.size < count:
            raise FrameFormatError("truncated PFM payload")
    return np.flipud(data.reshape(h, w)).astype(np.float32)


def save_image_rgb(path, rgb: np.ndarray) -> None:
    """Store a [0,1] float RGB image as 8-bit PNG (round to nearest)."""
    q = np.clip(np.round(np.asarray(rgb, dtype=np.float64) * 255.0), 0, 255)
    Image.fromarray(q.astype(np.uint8), mode="RGB").save(path)


def load_image_rgb(path) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float32)
    return arr / np.float32(255.0)


def write_frame(frame: FrameRGBDA, base_path) -> None:
    """Write base.png / base.pfm / base.a.png for a valid frame."""
    base = str(base_path)
    save_image_rgb(base + ".png", frame.rgb)
    write_pfm(base + ".pfm", frame.depth)
    Image.fromarray(frame.alpha * np.uint8(255), mode="L").save(base + ".a.png")


def read_frame(base_path) -> FrameRGBDA:
    """Inverse of write_frame: depth and mask bit-exact, rgb within 1/255."""
    base = str(base_path)
    rgb = load_image_rgb(base + ".png")
    depth = read_pfm(base + ".pfm")
    with Image.open(base + ".a.png") as im:
        alpha = (np.asarray(im.convert("L")) > 127).astype(np.uint8)
    if rgb.shape[:2] != depth.shape or alpha.shape != depth.shape:
        raise FrameFormatError("frame file dimensions disagree")
    frame = FrameRGBDA(rgb=rgb, depth=depth, alpha=alpha)
    frame.validate()
    return frame
