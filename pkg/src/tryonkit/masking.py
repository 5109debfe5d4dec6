"""Mask construction from parse + pose.

Two masks drive the pipeline: the skin-restoration inpainting mask for
stage 1 (sleeve clothing below the target sleeve line plus exposed arm
regions) and the multi-category clothing-agnostic mask for stage 2.
Both are deterministic geometry over the parse labels and skeleton.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import capsule_mask, disk_mask, half_plane
from .types import BinaryMask, GarmentCategory, ParseMap, PoseSkeleton, SleeveClass, dilate


class MissingRegionWarning(UserWarning):
    """No pixel carried any of the requested include labels."""


class DegeneratePoseWarning(UserWarning):
    """Required joints missing; the mask degraded to a label-only fallback."""


# Reference height for the default limb margin of 8 px at 768x1024.
REFERENCE_HEIGHT = 1024
DEFAULT_LIMB_MARGIN = 8

# Corridor / hand-zone radii as fractions of image height.
SLEEVE_CORRIDOR_FRAC = 0.08
HAND_RADIUS_FRAC = 0.05

STRATEGY_DRESSCODE = "dresscode"
STRATEGY_VITONHD = "vitonhd"
MASK_STRATEGIES = (STRATEGY_DRESSCODE, STRATEGY_VITONHD)

_CATEGORY_LABELS = {
    GarmentCategory.UPPER: frozenset({"upper_clothes"}),
    GarmentCategory.LOWER: frozenset({"pants", "skirt", "left_leg", "right_leg"}),
    GarmentCategory.DRESS: frozenset(
        {"upper_clothes", "dress", "pants", "skirt", "left_leg", "right_leg"}
    ),
}


def default_limb_margin(height: int) -> int:
    """Default mask margin, scaled proportionally with image height."""
    return max(0, round(DEFAULT_LIMB_MARGIN * height / REFERENCE_HEIGHT))


@dataclass(frozen=True)
class MaskSpec:
    """What to erase for one garment category."""

    category: GarmentCategory
    include_labels: frozenset = field(default_factory=frozenset)
    limb_margin: int = 0
    include_arms: bool = False
    include_neck: bool = False

    def __post_init__(self):
        if not self.include_labels:
            raise ValueError("include_labels must be nonempty")
        if self.limb_margin < 0:
            raise ValueError("limb_margin must be >= 0")
        object.__setattr__(self, "category", GarmentCategory(self.category))
        object.__setattr__(self, "include_labels", frozenset(self.include_labels))


def mask_spec_for(
    category: GarmentCategory,
    strategy: str = STRATEGY_DRESSCODE,
    limb_margin: int = DEFAULT_LIMB_MARGIN,
) -> MaskSpec:
    """Resolve a mask strategy identifier into a concrete MaskSpec.

    "dresscode" supports the full multi-category vocabulary; "vitonhd"
    is upper-body only and applies its upper spec whatever the requested
    category, which reproduces that model family's lower-body blind spot.
    """
    category = GarmentCategory(category)
    if strategy not in MASK_STRATEGIES:
        raise ValueError(f"unknown mask strategy {strategy!r}; known: {MASK_STRATEGIES}")
    effective = GarmentCategory.UPPER if strategy == STRATEGY_VITONHD else category
    wants_arms = effective in (GarmentCategory.UPPER, GarmentCategory.DRESS)
    return MaskSpec(
        category=category,
        include_labels=_CATEGORY_LABELS[effective],
        limb_margin=limb_margin,
        include_arms=wants_arms,
        include_neck=wants_arms,
    )


def build_agnostic_mask(parse: ParseMap, pose: PoseSkeleton, spec: MaskSpec) -> BinaryMask:
    """Clothing-agnostic region for try-on synthesis.

    Label union -> arm/neck union when flagged -> face/hair subtraction ->
    margin dilation, in that order, so a margin-m mask equals the dilation
    of the margin-0 mask.
    """
    base = parse.mask_for(*spec.include_labels).bits
    if not base.any():
        warnings.warn(
            MissingRegionWarning(
                f"no pixels carry labels {sorted(spec.include_labels)} "
                f"for category {spec.category.value}"
            )
        )
        return BinaryMask.empty(parse.width, parse.height)
    if spec.include_arms:
        base = base | parse.mask_for("left_arm", "right_arm").bits
    if spec.include_neck:
        base = base | parse.mask_for("neck").bits
    base = base & ~parse.mask_for("face", "hair").bits
    return dilate(BinaryMask(base), spec.limb_margin)


def _arm_vector(shoulder, elbow):
    d = np.asarray(elbow, dtype=np.float64) - np.asarray(shoulder, dtype=np.float64)
    norm = np.hypot(*d)
    return d / norm if norm > 0 else None


def build_skin_inpaint_mask(
    parse: ParseMap,
    pose: PoseSkeleton,
    target: SleeveClass,
    margin: int = 0,
    corridor_frac: float = SLEEVE_CORRIDOR_FRAC,
    hand_radius_frac: float = HAND_RADIUS_FRAC,
) -> BinaryMask:
    """Region to inpaint with skin so the original sleeves cannot leak.

    Per arm: sleeve clothing within a capsule corridor around the arm,
    clipped below the sleeve line (mid upper-arm for short sleeves, the
    shoulder joint for sleeveless), unioned with the exposed arm labels
    below the same line. Face, hair and hand disks around valid wrists
    are always preserved. An arm whose shoulder or elbow is missing
    degrades to its full arm-label region; if both arms are missing the
    operation warns and falls back to arm labels only.
    """
    target = SleeveClass(target)
    if target == SleeveClass.LONG_SLEEVE:
        raise ValueError("skin restoration targets short_sleeve or sleeveless only")
    if margin < 0:
        raise ValueError("margin must be >= 0")

    h, w = parse.height, parse.width
    clothing = parse.mask_for("upper_clothes", "dress").bits
    corridor_r = corridor_frac * h
    hand_r = hand_radius_frac * h

    core = np.zeros((h, w), dtype=bool)
    degenerate = []
    for side in ("left", "right"):
        arm = parse.mask_for(f"{side}_arm").bits
        shoulder = pose.point(f"{side}_shoulder")
        elbow = pose.point(f"{side}_elbow")
        direction = _arm_vector(shoulder, elbow) if shoulder and elbow else None
        if direction is None:
            degenerate.append(side)
            core |= arm
            continue
        origin = shoulder
        if target == SleeveClass.SHORT_SLEEVE:
            origin = ((shoulder[0] + elbow[0]) / 2.0, (shoulder[1] + elbow[1]) / 2.0)
        below = half_plane(h, w, origin, tuple(direction))
        wrist = pose.point(f"{side}_wrist")
        if wrist is None:
            wrist = (2 * elbow[0] - shoulder[0], 2 * elbow[1] - shoulder[1])
        corridor = capsule_mask(h, w, shoulder, elbow, corridor_r)
        corridor |= capsule_mask(h, w, elbow, wrist, corridor_r)
        core |= clothing & corridor & below
        core |= arm & below

    if len(degenerate) == 2:
        warnings.warn(
            DegeneratePoseWarning("both arms lack shoulder/elbow joints; full-arm fallback")
        )
    elif degenerate:
        warnings.warn(
            DegeneratePoseWarning(f"{degenerate[0]} arm lacks shoulder/elbow; full-arm fallback")
        )

    if margin > 0:
        core = dilate(BinaryMask(core), margin).bits

    protected = parse.mask_for("face", "hair").bits.copy()
    for side in ("left", "right"):
        wrist = pose.point(f"{side}_wrist")
        if wrist is not None:
            protected |= disk_mask(h, w, wrist, hand_r)
    return BinaryMask(core & ~protected)


def overlay_mask(img, mask: BinaryMask, color=(255, 0, 0), alpha: float = 0.5):
    """Red-highlight visualization of a mask over its image."""
    from .types import RasterImage

    if not mask.matches(img):
        raise ValueError("mask dimensions must match the image")
    out = img.pixels.astype(np.float64)
    tint = np.asarray(color, dtype=np.float64)
    out[mask.bits] = (1.0 - alpha) * out[mask.bits] + alpha * tint
    return RasterImage(np.clip(np.rint(out), 0, 255).astype(np.uint8))
