import math

import numpy as np
import pytest

from tryonkit.metrics import DimensionMismatch, SsimParams, gaussian_window, ssim
from tryonkit.types import RasterImage


def _rand_img(rng, h=16, w=16):
    return RasterImage(rng.integers(0, 256, (h, w, 3)).astype(np.uint8))


def _ssim_reference(x, y):
    """Naive double-loop implementation, valid-mode 11x11 Gaussian window."""
    size, sigma = 11, 1.5
    win = np.empty((size, size))
    for i in range(size):
        for j in range(size):
            di, dj = i - 5, j - 5
            win[i, j] = math.exp(-(di * di) / (2 * sigma**2)) * math.exp(
                -(dj * dj) / (2 * sigma**2)
            )
    win /= win.sum()
    c1 = (0.01 * 255) ** 2
    c2 = (0.03 * 255) ** 2

    values = []
    h, w, channels = x.shape
    for ch in range(channels):
        a = x[..., ch].astype(np.float64)
        b = y[..., ch].astype(np.float64)
        for i in range(h - size + 1):
            for j in range(w - size + 1):
                pa = a[i : i + size, j : j + size]
                pb = b[i : i + size, j : j + size]
                mu_a = (win * pa).sum()
                mu_b = (win * pb).sum()
                var_a = (win * pa * pa).sum() - mu_a**2
                var_b = (win * pb * pb).sum() - mu_b**2
                cov = (win * pa * pb).sum() - mu_a * mu_b
                values.append(
                    ((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                    / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2))
                )
    return float(np.mean(values))


def test_gaussian_window_sums_to_one():
    win = gaussian_window(11, 1.5)
    assert win.shape == (11, 11)
    assert win.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.array_equal(win, win.T)


def test_ssim_self_is_exactly_one():
    rng = np.random.default_rng(0)
    for _ in range(3):
        img = _rand_img(rng)
        assert ssim(img, img) == 1.0


def test_ssim_constant_offset_closed_form():
    base = np.full((16, 16, 3), 100, dtype=np.uint8)
    shifted = np.full((16, 16, 3), 110, dtype=np.uint8)
    value = ssim(RasterImage(base), RasterImage(shifted))
    c1 = (0.01 * 255) ** 2
    c2 = (0.03 * 255) ** 2
    # sigma terms vanish for constant images
    expected = (2 * 100 * 110 + c1) / (100**2 + 110**2 + c1) * (c2 / c2)
    assert value == pytest.approx(expected, abs=1e-6)


def test_ssim_matches_naive_reference_on_random_pairs():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(50):
        x = _rand_img(rng)
        y = _rand_img(rng)
        got = ssim(x, y)
        want = _ssim_reference(x.pixels, y.pixels)
        worst = max(worst, abs(got - want))
    assert worst < 1e-8


def test_ssim_symmetric():
    rng = np.random.default_rng(1)
    x, y = _rand_img(rng), _rand_img(rng)
    assert ssim(x, y) == pytest.approx(ssim(y, x), abs=1e-12)


def test_ssim_invariant_under_channel_permutation():
    rng = np.random.default_rng(2)
    x, y = _rand_img(rng), _rand_img(rng)
    perm = [2, 0, 1]
    xp = RasterImage(x.pixels[..., perm])
    yp = RasterImage(y.pixels[..., perm])
    assert ssim(xp, yp) == pytest.approx(ssim(x, y), abs=1e-12)


def test_ssim_dimension_mismatch():
    rng = np.random.default_rng(3)
    with pytest.raises(DimensionMismatch):
        ssim(_rand_img(rng, 16, 16), _rand_img(rng, 16, 18))


def test_ssim_rejects_images_smaller_than_window():
    rng = np.random.default_rng(4)
    with pytest.raises(ValueError):
        ssim(_rand_img(rng, 8, 8), _rand_img(rng, 8, 8))


def test_ssim_params_constants():
    params = SsimParams()
    assert params.c1 == pytest.approx((0.01 * 255) ** 2)
    assert params.c2 == pytest.approx((0.03 * 255) ** 2)
    assert params.window_size == 11 and params.sigma == 1.5
