import numpy as np
import pytest

from lidarsplat import psnr, ssim


def test_psnr_identical_capped(rng):
    img = rng.random((32, 32, 3))
    assert psnr(img, img) == 99.0


def test_psnr_closed_form_uniform_offset():
    a = np.full((32, 32, 3), 0.5)
    b = np.full((32, 32, 3), 0.6)
    # MSE = 0.01 exactly (up to f64 representation) -> 20 dB
    assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)


def test_psnr_dimension_mismatch():
    with pytest.raises(ValueError, match="differ"):
        psnr(np.zeros((4, 4, 3)), np.zeros((5, 4, 3)))


def test_ssim_identical_is_one(rng):
    img = rng.random((32, 48, 3))
    assert ssim(img, img) == pytest.approx(1.0, abs=1e-12)


def test_ssim_decreases_with_noise(rng):
    img = rng.random((48, 48, 3)) * 0.5 + 0.25
    last = 1.0
    for sigma in (0.02, 0.05, 0.1, 0.2):
        noisy = np.clip(img + rng.normal(0, sigma, img.shape), 0, 1)
        val = ssim(img, noisy)
        assert val < last
        last = val
    assert last < 0.9


def test_ssim_range_and_symmetry(rng):
    a = rng.random((24, 24, 3))
    b = rng.random((24, 24, 3))
    v = ssim(a, b)
    assert -1.0 <= v <= 1.0
    assert ssim(b, a) == pytest.approx(v, abs=1e-12)


def test_ssim_small_image_rejected():
    with pytest.raises(ValueError, match="at least 11"):
        ssim(np.zeros((8, 8, 3)), np.zeros((8, 8, 3)))


def test_psnr_known_quantized_case():
    # single-channel gray ramp vs constant: brute-force MSE oracle
    a = np.linspace(0, 1, 64).reshape(8, 8)[:, :, None].repeat(3, axis=2)
    b = np.full_like(a, 0.5)
    mse = float(np.mean((a - b) ** 2))
    assert psnr(a, b) == pytest.approx(10 * np.log10(1 / mse), abs=1e-12)
