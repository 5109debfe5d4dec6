"""Perceptual distance from channel-normalized deep features.

For each layer l with per-channel weights w_l:

    d_l = (1 / (H_l W_l)) * sum_{h,w} || w_l * (f_x(h,w) - f_y(h,w)) ||_2^2

where features are unit-normalized along the channel axis at every
spatial location. The total distance is the sum over layers.
"""

from __future__ import annotations

import numpy as np

from ..types import RasterImage
from .errors import DimensionMismatch
from .features import LayeredFeatureExtractor, validate_layered

# Guard for zero-norm feature columns; normalization divides by
# max(norm, NORM_EPS) so all-zero features stay zero.
NORM_EPS = 1e-12


def _unit_normalize(fmap: np.ndarray) -> np.ndarray:
    norm = np.sqrt((fmap**2).sum(axis=0, keepdims=True))
    return fmap / np.maximum(norm, NORM_EPS)


def lpips(x: RasterImage, y: RasterImage, extractor: LayeredFeatureExtractor) -> float:
    """Layer-weighted squared distance between unit-normalized features."""
    if (x.width, x.height) != (y.width, y.height):
        raise DimensionMismatch(
            f"image dimensions differ: {x.width}x{x.height} vs {y.width}x{y.height}"
        )
    maps_x = [np.asarray(m, dtype=np.float64) for m in extractor.feature_maps(x)]
    maps_y = [np.asarray(m, dtype=np.float64) for m in extractor.feature_maps(y)]
    validate_layered(extractor, maps_x)
    validate_layered(extractor, maps_y)

    total = 0.0
    for w, fx, fy in zip(extractor.layer_weights, maps_x, maps_y):
        if fx.shape != fy.shape:
            raise DimensionMismatch(f"layer shapes differ: {fx.shape} vs {fy.shape}")
        w = np.asarray(w, dtype=np.float64).reshape(-1, 1, 1)
        diff = w * (_unit_normalize(fx) - _unit_normalize(fy))
        _, h, width = fx.shape
        total += float((diff**2).sum() / (h * width))
    return total
