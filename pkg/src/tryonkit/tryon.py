"""Stage 2: ensemble try-on, and the full two-stage pipeline.

The ensemble is configuration, not code: `mask_source` picks the mask
strategy and `synth_source` picks the named try-on backend, so strategy
comparisons are a config sweep. The agnostic mask for the full pipeline
is always computed from the stage-1 output, never from the raw person
image; the manifest records that provenance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .backends import BackendSet, run_parser, run_pose, run_tryon
from .generate_skin import GenerateSkinConfig, GenerateSkinResult, generate_skin
from .masking import build_agnostic_mask, mask_spec_for
from .types import BinaryMask, GarmentCategory, RasterImage


@dataclass
class EnsembleConfig:
    mask_source: str = "dresscode"
    synth_source: str = "vitonhd"
    category: GarmentCategory = GarmentCategory.UPPER
    seed: int = 0

    def __post_init__(self):
        self.category = GarmentCategory(self.category)

    def as_dict(self) -> dict:
        return {
            "mask_source": self.mask_source,
            "synth_source": self.synth_source,
            "category": self.category.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict | None) -> "EnsembleConfig":
        return cls(**dict(d or {}))


@dataclass
class TryOnResult:
    output: RasterImage
    agnostic_mask: BinaryMask
    stage1: GenerateSkinResult | None
    manifest: dict


def _resolve_synth(backends: BackendSet, name: str):
    if name not in backends.tryon:
        raise ValueError(
            f"synth_source {name!r} not configured; available: {sorted(backends.tryon)}"
        )
    return backends.tryon[name]


def _run_stage2(person_like, garment, pose, parse, cfg, skin_cfg, backends):
    spec = mask_spec_for(cfg.category, cfg.mask_source, skin_cfg.limb_margin)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mask = build_agnostic_mask(parse, pose, spec)
    mask_warnings = [str(w.message) for w in caught]
    synth = _resolve_synth(backends, cfg.synth_source)
    output = run_tryon(synth, person_like, garment, mask, pose, cfg.category, cfg.seed)
    return output, mask, mask_warnings


def _base_manifest(person, garment, cfg, skin_cfg):
    return {
        "ensemble": cfg.as_dict(),
        "skin": skin_cfg.as_dict(),
        "person_size": [person.width, person.height],
        "garment_size": [garment.width, garment.height],
    }


def tryon(
    person: RasterImage,
    garment: RasterImage,
    cfg: EnsembleConfig,
    skin_cfg: GenerateSkinConfig,
    backends: BackendSet,
) -> TryOnResult:
    """Full two-stage pipeline: skin restoration, re-parse, masked synthesis."""
    _resolve_synth(backends, cfg.synth_source)
    stage1 = generate_skin(person, skin_cfg, backends)
    pre = stage1.preinpainted
    reparse = run_parser(backends.parser, pre)
    output, mask, mask_warnings = _run_stage2(
        pre, garment, stage1.pose, reparse, cfg, skin_cfg, backends
    )
    manifest = _base_manifest(person, garment, cfg, skin_cfg)
    manifest.update(
        {
            "stage1": True,
            "agnostic_mask_from": "preinpainted",
            "warnings": list(stage1.warnings) + mask_warnings,
        }
    )
    return TryOnResult(output=output, agnostic_mask=mask, stage1=stage1, manifest=manifest)


def tryon_direct(
    person: RasterImage,
    garment: RasterImage,
    cfg: EnsembleConfig,
    skin_cfg: GenerateSkinConfig,
    backends: BackendSet,
) -> TryOnResult:
    """Stage 2 alone, masking the raw person image (baseline/ablation path)."""
    _resolve_synth(backends, cfg.synth_source)
    parse = run_parser(backends.parser, person)
    pose = run_pose(backends.pose, person)
    output, mask, mask_warnings = _run_stage2(
        person, garment, pose, parse, cfg, skin_cfg, backends
    )
    manifest = _base_manifest(person, garment, cfg, skin_cfg)
    manifest.update(
        {
            "stage1": False,
            "agnostic_mask_from": "person",
            "warnings": mask_warnings,
        }
    )
    return TryOnResult(output=output, agnostic_mask=mask, stage1=None, manifest=manifest)
