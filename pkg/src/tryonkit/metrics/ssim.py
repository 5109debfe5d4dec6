"""Structural similarity with the classic 11x11 Gaussian window.

Local statistics are computed at every position where the full window
fits (valid mode), per channel, and the mean of the local similarity map
over all positions and channels is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..types import RasterImage
from .errors import DimensionMismatch


@dataclass(frozen=True)
class SsimParams:
    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Separable 2-D Gaussian window, normalized to sum 1."""
    offsets = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(offsets**2) / (2.0 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


def _filter_valid(plane: np.ndarray, kernel1d: np.ndarray) -> np.ndarray:
    """Separable valid-mode correlation with the 1-D window along both axes."""
    k = kernel1d.size
    h, w = plane.shape
    tmp = np.zeros((h, w - k + 1))
    for i in range(k):
        tmp += kernel1d[i] * plane[:, i : w - k + 1 + i]
    out = np.zeros((h - k + 1, w - k + 1))
    for i in range(k):
        out += kernel1d[i] * tmp[i : h - k + 1 + i, :]
    return out


def ssim(x: RasterImage, y: RasterImage, params: SsimParams | None = None) -> float:
    """Mean local structural similarity in [-1, 1]; 1 means identical."""
    params = params or SsimParams()
    if (x.width, x.height) != (y.width, y.height):
        raise DimensionMismatch(
            f"image dimensions differ: {x.width}x{x.height} vs {y.width}x{y.height}"
        )
    size = params.window_size
    if x.width < size or x.height < size:
        raise ValueError(f"images must be at least {size}x{size}")

    offsets = np.arange(size) - (size - 1) / 2.0
    kernel = np.exp(-(offsets**2) / (2.0 * params.sigma**2))
    kernel /= kernel.sum()
    c1, c2 = params.c1, params.c2

    total = 0.0
    channels = x.pixels.shape[2]
    for ch in range(channels):
        a = x.pixels[..., ch].astype(np.float64)
        b = y.pixels[..., ch].astype(np.float64)
        mu_a = _filter_valid(a, kernel)
        mu_b = _filter_valid(b, kernel)
        var_a = _filter_valid(a * a, kernel) - mu_a * mu_a
        var_b = _filter_valid(b * b, kernel) - mu_b * mu_b
        cov_ab = _filter_valid(a * b, kernel) - mu_a * mu_b
        num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov_ab + c2)
        den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
        total += float((num / den).mean())
    return total / channels
