"""Small raster geometry helpers shared by masking, metrics and fixtures."""

from __future__ import annotations

import numpy as np


def _grid(height: int, width: int):
    ys, xs = np.mgrid[0:height, 0:width]
    return xs.astype(np.float64), ys.astype(np.float64)


def disk_mask(height: int, width: int, center, radius: float) -> np.ndarray:
    """Boolean (H, W) array of pixels within `radius` of center (x, y)."""
    xs, ys = _grid(height, width)
    cx, cy = center
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= radius**2


def segment_distance(height: int, width: int, p0, p1) -> np.ndarray:
    """Per-pixel Euclidean distance to the segment p0-p1 (points are (x, y))."""
    xs, ys = _grid(height, width)
    x0, y0 = p0
    x1, y1 = p1
    dx, dy = x1 - x0, y1 - y0
    seg_sq = dx * dx + dy * dy
    if seg_sq == 0:
        return np.hypot(xs - x0, ys - y0)
    t = ((xs - x0) * dx + (ys - y0) * dy) / seg_sq
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(xs - (x0 + t * dx), ys - (y0 + t * dy))


def capsule_mask(height: int, width: int, p0, p1, radius: float) -> np.ndarray:
    """Boolean (H, W) array of pixels within `radius` of the segment p0-p1."""
    return segment_distance(height, width, p0, p1) <= radius


def polyline_capsule_mask(height: int, width: int, points, radius: float) -> np.ndarray:
    """Union of capsules along consecutive point pairs."""
    out = np.zeros((height, width), dtype=bool)
    for p0, p1 in zip(points[:-1], points[1:]):
        out |= capsule_mask(height, width, p0, p1, radius)
    return out


def half_plane(height: int, width: int, origin, direction) -> np.ndarray:
    """Pixels with (p - origin) . direction >= 0.

    The boundary line passes through `origin` perpendicular to `direction`;
    pixels on the line itself are included.
    """
    xs, ys = _grid(height, width)
    ox, oy = origin
    dx, dy = direction
    return (xs - ox) * dx + (ys - oy) * dy >= 0
