"""Color-space conversions used for skin detection and tone matching.

YCrCb follows the ITU-R BT.601 full-range (JPEG) convention; HSV is the
standard hexcone model with H in degrees [0, 360) and S, V in [0, 1].
All conversion constants live here and nowhere else.
"""

from __future__ import annotations

import numpy as np

from .types import RasterImage

# BT.601 luma weights (full range).
KR = 0.299
KG = 0.587
KB = 0.114
# Chroma scale factors: 0.5 / (1 - KB) and 0.5 / (1 - KR).
CB_SCALE = 0.5 / (1.0 - KB)
CR_SCALE = 0.5 / (1.0 - KR)
CHROMA_OFFSET = 128.0


def rgb_to_ycrcb(img: RasterImage) -> np.ndarray:
    """Convert to (H, W, 3) uint8 planes ordered Y, Cr, Cb."""
    rgb = img.pixels.astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = KR * r + KG * g + KB * b
    cr = CR_SCALE * (r - y) + CHROMA_OFFSET
    cb = CB_SCALE * (b - y) + CHROMA_OFFSET
    out = np.stack([y, cr, cb], axis=-1)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def ycrcb_to_rgb(planes: np.ndarray) -> RasterImage:
    """Inverse of rgb_to_ycrcb; clamps to the 8-bit gamut."""
    p = np.asarray(planes, dtype=np.float64)
    y, cr, cb = p[..., 0], p[..., 1], p[..., 2]
    r = y + (cr - CHROMA_OFFSET) / CR_SCALE
    b = y + (cb - CHROMA_OFFSET) / CB_SCALE
    g = (y - KR * r - KB * b) / KG
    out = np.stack([r, g, b], axis=-1)
    return RasterImage(np.clip(np.rint(out), 0, 255).astype(np.uint8))


def rgb_to_hsv(img: RasterImage) -> np.ndarray:
    """Convert to (H, W, 3) float64 planes ordered H (degrees), S, V.

    S is fixed to 0 where V == 0, and H is fixed to 0 where S == 0, so the
    representation is unique and conversions are deterministic.
    """
    rgb = img.pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)

    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
        safe_c = np.where(c > 0, c, 1.0)
        h = np.where(
            c == 0,
            0.0,
            np.where(
                v == r,
                ((g - b) / safe_c) % 6.0,
                np.where(v == g, (b - r) / safe_c + 2.0, (r - g) / safe_c + 4.0),
            ),
        )
    h = (h * 60.0) % 360.0
    h = np.where(s == 0, 0.0, h)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(planes: np.ndarray) -> RasterImage:
    """Inverse hexcone conversion back to 8-bit RGB."""
    p = np.asarray(planes, dtype=np.float64)
    h = (p[..., 0] % 360.0) / 60.0
    s = np.clip(p[..., 1], 0.0, 1.0)
    v = np.clip(p[..., 2], 0.0, 1.0)

    c = v * s
    x = c * (1.0 - np.abs(h % 2.0 - 1.0))
    m = v - c
    sector = np.floor(h).astype(int) % 6

    z = np.zeros_like(c)
    r = np.choose(sector, [c, x, z, z, x, c])
    g = np.choose(sector, [x, c, c, x, z, z])
    b = np.choose(sector, [z, z, x, c, c, x])

    out = (np.stack([r, g, b], axis=-1) + m[..., None]) * 255.0
    return RasterImage(np.clip(np.rint(out), 0, 255).astype(np.uint8))
