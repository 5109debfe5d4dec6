"""Stage 1: remove the existing garment silhouette and restore skin.

Composes parse -> pose -> skin-inpaint mask -> pose-conditioned inpaint
-> outside-mask copy-back -> tone-matched blend, and returns every
intermediate so later stages (and tests) can inspect provenance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .backends import BackendSet, run_inpaint, run_parser, run_pose
from .masking import build_skin_inpaint_mask
from .skin_tone import MIN_TONE_SAMPLES, SkinToneEstimate, blend_to_tone, detect_skin, estimate_tone
from .types import BinaryMask, ParseMap, PoseSkeleton, RasterImage, SleeveClass

# Flat fill used when a neutral base garment is requested.
BASE_GARMENT_COLOR = (176, 176, 176)


@dataclass
class GenerateSkinConfig:
    target_sleeve: SleeveClass = SleeveClass.SHORT_SLEEVE
    steps: int = 30
    seed: int = 0
    prompt: str = "bare skin, realistic arms"
    blend_strength: float = 1.0
    limb_margin: int = 8
    # Paint remaining torso clothing as a plain neutral base garment.
    paint_base_garment: bool = False
    # Sample floor before a tone estimate is trusted.
    min_tone_samples: int = MIN_TONE_SAMPLES

    def __post_init__(self):
        self.target_sleeve = SleeveClass(self.target_sleeve)
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 0.0 <= self.blend_strength <= 1.0:
            raise ValueError("blend_strength must lie in [0, 1]")
        if self.limb_margin < 0:
            raise ValueError("limb_margin must be >= 0")

    def as_dict(self) -> dict:
        return {
            "target_sleeve": self.target_sleeve.value,
            "steps": self.steps,
            "seed": self.seed,
            "prompt": self.prompt,
            "blend_strength": self.blend_strength,
            "limb_margin": self.limb_margin,
            "paint_base_garment": self.paint_base_garment,
            "min_tone_samples": self.min_tone_samples,
        }

    @classmethod
    def from_dict(cls, d: dict | None) -> "GenerateSkinConfig":
        return cls(**dict(d or {}))


@dataclass
class GenerateSkinResult:
    preinpainted: RasterImage
    inpaint_mask: BinaryMask
    pose: PoseSkeleton
    parse: ParseMap
    tone: SkinToneEstimate
    warnings: list = field(default_factory=list)


def _estimate_person_tone(src, parse, min_samples, collected):
    """Face-derived tone first, then any visible skin, else unreliable."""
    face = detect_skin(src, restrict_to=parse.mask_for("face"))
    tone = estimate_tone(src, face, min_samples)
    if tone.reliable:
        return tone
    fallback = estimate_tone(src, detect_skin(src), min_samples)
    if fallback.reliable:
        collected.append("tone: face estimate unreliable; using visible skin instead")
        return fallback
    return tone if tone.sample_count >= fallback.sample_count else fallback


def generate_skin(
    src: RasterImage, cfg: GenerateSkinConfig, backends: BackendSet
) -> GenerateSkinResult:
    """Produce the pre-inpainted, silhouette-free image from a source photo.

    Pixels outside the inpaint mask are copied back from the source
    unconditionally, so the person's identity survives backends that
    perturb unmasked pixels. Every degradation encountered along the way
    lands in the result's `warnings`.
    """
    collected: list[str] = []
    parse = run_parser(backends.parser, src)
    pose = run_pose(backends.pose, src)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mask = build_skin_inpaint_mask(parse, pose, cfg.target_sleeve, margin=cfg.limb_margin)
    collected.extend(str(w.message) for w in caught)

    if mask.is_empty():
        pre = src
    else:
        raw = run_inpaint(backends.inpaint, src, mask, pose, cfg.prompt, cfg.steps, cfg.seed)
        merged = src.pixels.copy()
        merged[mask.bits] = raw.pixels[mask.bits]
        pre = RasterImage(merged)

    tone = _estimate_person_tone(src, parse, cfg.min_tone_samples, collected)
    if not mask.is_empty():
        restored_skin = detect_skin(pre, restrict_to=mask)
        if not tone.reliable:
            collected.append("tone: no reliable estimate; blend skipped")
        elif restored_skin.is_empty():
            collected.append("tone: no skin detected in restored region; blend skipped")
        else:
            pre = blend_to_tone(pre, restored_skin, tone, cfg.blend_strength)

    result_mask = mask
    if cfg.paint_base_garment:
        base_region = parse.mask_for("upper_clothes").bits & ~mask.bits
        if base_region.any():
            merged = pre.pixels.copy()
            merged[base_region] = np.asarray(BASE_GARMENT_COLOR, dtype=np.uint8)
            pre = RasterImage(merged)
            result_mask = BinaryMask(mask.bits | base_region)
            collected.append("base garment painted over remaining torso clothing")

    return GenerateSkinResult(
        preinpainted=pre,
        inpaint_mask=result_mask,
        pose=pose,
        parse=parse,
        tone=tone,
        warnings=collected,
    )
