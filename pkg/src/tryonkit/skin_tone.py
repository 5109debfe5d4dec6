"""Skin detection in YCrCb and tone-matched blending in HSV.

Inpainted skin rarely lands on the person's own tone; the blend shifts
the restored region's HSV means onto a target estimate while keeping
each pixel's deviation from the mean, so texture and shading survive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .color import hsv_to_rgb, rgb_to_hsv, rgb_to_ycrcb
from .types import BinaryMask, RasterImage

# Widely used YCrCb skin box; the thresholds are configuration, not claims.
CR_RANGE = (133, 173)
CB_RANGE = (77, 127)
Y_MIN = 40

# Minimum pixels before a tone estimate is trusted.
MIN_TONE_SAMPLES = 500


class UnreliableToneWarning(UserWarning):
    """Tone estimate too small to apply; blending skipped."""


class EmptySkinRegionWarning(UserWarning):
    """No skin pixels found where some were expected."""


@dataclass(frozen=True)
class SkinToneEstimate:
    """Mean skin tone in HSV. H uses the circular mean."""

    mean_h: float
    mean_s: float
    mean_v: float
    sample_count: int
    reliable: bool

    def as_dict(self) -> dict:
        return {
            "mean_h": self.mean_h,
            "mean_s": self.mean_s,
            "mean_v": self.mean_v,
            "sample_count": self.sample_count,
            "reliable": self.reliable,
        }


def detect_skin(
    img: RasterImage,
    restrict_to: BinaryMask | None = None,
    cr_range=CR_RANGE,
    cb_range=CB_RANGE,
    y_min: int = Y_MIN,
) -> BinaryMask:
    """Box test in YCrCb, optionally intersected with a restriction mask."""
    ycrcb = rgb_to_ycrcb(img)
    y, cr, cb = ycrcb[..., 0], ycrcb[..., 1], ycrcb[..., 2]
    skin = (
        (cr >= cr_range[0])
        & (cr <= cr_range[1])
        & (cb >= cb_range[0])
        & (cb <= cb_range[1])
        & (y >= y_min)
    )
    if restrict_to is not None:
        if not restrict_to.matches(img):
            raise ValueError("restriction mask dimensions must match the image")
        skin &= restrict_to.bits
    return BinaryMask(skin)


def _circular_mean_deg(h_deg: np.ndarray) -> float:
    rad = np.deg2rad(h_deg)
    s, c = np.sin(rad).mean(), np.cos(rad).mean()
    if abs(s) < 1e-12 and abs(c) < 1e-12:
        return 0.0
    return math.degrees(math.atan2(s, c)) % 360.0


def estimate_tone(
    img: RasterImage, skin: BinaryMask, min_samples: int = MIN_TONE_SAMPLES
) -> SkinToneEstimate:
    """Mean HSV over the skin pixels; H uses the circular mean."""
    if not skin.matches(img):
        raise ValueError("skin mask dimensions must match the image")
    count = skin.count
    if count == 0:
        return SkinToneEstimate(0.0, 0.0, 0.0, 0, False)
    hsv = rgb_to_hsv(img)[skin.bits]
    return SkinToneEstimate(
        mean_h=_circular_mean_deg(hsv[:, 0]),
        mean_s=float(hsv[:, 1].mean()),
        mean_v=float(hsv[:, 2].mean()),
        sample_count=count,
        reliable=count >= min_samples,
    )


def _signed_hue_delta(target_deg: float, source_deg: float) -> float:
    """Shortest signed rotation from source to target, in (-180, 180]."""
    delta = (target_deg - source_deg) % 360.0
    if delta > 180.0:
        delta -= 360.0
    return delta


def blend_to_tone(
    img: RasterImage,
    region: BinaryMask,
    target: SkinToneEstimate,
    strength: float,
) -> RasterImage:
    """Shift the region's HSV means toward `target` by `strength` in [0, 1].

    Per-pixel deviations from the region mean are preserved; pixels
    outside the region are returned bit-exact. An unreliable target (or
    strength 0, or an empty region) leaves the image unchanged.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError("strength must lie in [0, 1]")
    if not region.matches(img):
        raise ValueError("region dimensions must match the image")
    if not target.reliable:
        warnings.warn(UnreliableToneWarning("target tone unreliable; blend skipped"))
        return img
    if strength == 0.0 or region.is_empty():
        return img

    hsv = rgb_to_hsv(img)
    sel = region.bits
    current_h = _circular_mean_deg(hsv[..., 0][sel])
    current_s = float(hsv[..., 1][sel].mean())
    current_v = float(hsv[..., 2][sel].mean())

    shifted = hsv[sel]
    shifted[:, 0] = (shifted[:, 0] + strength * _signed_hue_delta(target.mean_h, current_h)) % 360.0
    shifted[:, 1] = np.clip(shifted[:, 1] + strength * (target.mean_s - current_s), 0.0, 1.0)
    shifted[:, 2] = np.clip(shifted[:, 2] + strength * (target.mean_v - current_v), 0.0, 1.0)

    out = img.pixels.copy()
    out[sel] = hsv_to_rgb(shifted[None, :, :]).pixels[0]
    return RasterImage(out)
