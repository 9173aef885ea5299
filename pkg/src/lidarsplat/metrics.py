"""Image quality metrics: PSNR and SSIM on [0, 1] RGB images."""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate1d

PSNR_CAP = 99.0
_SSIM_WIN = 11
_SSIM_SIGMA = 1.5
_K1, _K2 = 0.01, 0.03


def _as_rgb64(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError(f"expected an image, got shape {arr.shape}")
    return arr


def psnr(pred: np.ndarray, target: np.ndarray) -> float:
    """10*log10(1/MSE) over all channels, capped at 99 dB (identical images)."""
    a, b = _as_rgb64(pred), _as_rgb64(target)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP)


def _gaussian_window(n: int = _SSIM_WIN, sigma: float = _SSIM_SIGMA) -> np.ndarray:
    x = np.arange(n, dtype=np.float64) - (n - 1) / 2
    g = np.exp(-(x**2) / (2 * sigma**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    half = len(taps) // 2
    out = correlate1d(img, taps, axis=0, mode="constant")
    out = correlate1d(out, taps, axis=1, mode="constant")
    return out[half:-half, half:-half]


def ssim(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean structural similarity, 11x11 Gaussian window (sigma 1.5),
    k1=0.01, k2=0.03, dynamic range 1; averaged over channels, valid region.
    """
    a, b = _as_rgb64(pred), _as_rgb64(target)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.shape[0] < _SSIM_WIN or a.shape[1] < _SSIM_WIN:
        raise ValueError(f"images must be at least {_SSIM_WIN}px per side")
    taps = _gaussian_window()
    c1 = _K1**2
    c2 = _K2**2
    vals = []
    for ch in range(a.shape[2]):
        x, y = a[:, :, ch], b[:, :, ch]
        mx = _filter_valid(x, taps)
        my = _filter_valid(y, taps)
        vx = _filter_valid(x * x, taps) - mx * mx
        vy = _filter_valid(y * y, taps) - my * my
        cxy = _filter_valid(x * y, taps) - mx * my
        num = (2 * mx * my + c1) * (2 * cxy + c2)
        den = (mx * mx + my * my + c1) * (vx + vy + c2)
        vals.append(float(np.mean(num / den)))
    return float(np.mean(vals))
