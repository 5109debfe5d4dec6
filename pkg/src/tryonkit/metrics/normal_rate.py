"""Silhouette-consistency scoring: the normal output rate.

A long-sleeve input converted toward a short-sleeve/sleeveless garment
is "normal" when the output actually exposes the forearms. A human
label, when present, always wins; otherwise the automated rule measures
the skin-exposure ratio inside a capsule corridor along each visible
elbow-to-wrist segment and requires it to clear a threshold on every
visible arm.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from ..geometry import capsule_mask
from ..skin_tone import detect_skin
from ..types import BinaryMask, ParseMap, PoseSkeleton, RasterImage, SleeveClass

# Skin-exposure ratio an arm corridor must reach to count as exposed.
NORMAL_RATIO_THRESHOLD = 0.35
# Corridor radius as a fraction of image height.
FOREARM_CORRIDOR_FRAC = 0.04


class DegenerateCaseWarning(UserWarning):
    """Case lacked usable arm joints and was excluded from the rate."""


@dataclass(frozen=True)
class NormalRateCase:
    output: RasterImage
    pose: PoseSkeleton
    parse: ParseMap | None
    reference: SleeveClass
    human_label: bool | None = None
    case_id: str = ""

    def __post_init__(self):
        ref = SleeveClass(self.reference)
        if ref == SleeveClass.LONG_SLEEVE:
            raise ValueError("reference sleeve must be short_sleeve or sleeveless")
        object.__setattr__(self, "reference", ref)


@dataclass(frozen=True)
class CaseClassification:
    case_id: str
    status: str  # "normal" | "abnormal" | "excluded"
    source: str  # "human" | "automated"
    arm_ratios: dict = field(default_factory=dict)


@dataclass(frozen=True)
class NormalRateResult:
    rate: float
    normal: int
    counted: int
    classifications: tuple


def _arm_ratios(case, corridor_frac):
    h, w = case.output.height, case.output.width
    radius = corridor_frac * h
    skin = detect_skin(case.output).bits
    ratios = {}
    for side in ("left", "right"):
        elbow = case.pose.point(f"{side}_elbow")
        wrist = case.pose.point(f"{side}_wrist")
        if elbow is None or wrist is None:
            continue
        corridor = capsule_mask(h, w, elbow, wrist, radius)
        area = int(corridor.sum())
        if area == 0:
            continue
        ratios[side] = float((skin & corridor).sum() / area)
    return ratios


def normal_output_rate(
    cases,
    threshold: float = NORMAL_RATIO_THRESHOLD,
    corridor_frac: float = FOREARM_CORRIDOR_FRAC,
) -> NormalRateResult:
    """Fraction of cases whose output shows the reference silhouette.

    Human-labeled cases are counted as labeled. Unlabeled cases with no
    visible arm (elbow or wrist missing on both sides) are excluded from
    the denominator with a warning.
    """
    classifications = []
    normal = 0
    counted = 0
    for idx, case in enumerate(cases):
        case_id = case.case_id or f"case-{idx}"
        if case.human_label is not None:
            counted += 1
            normal += int(case.human_label)
            classifications.append(
                CaseClassification(
                    case_id=case_id,
                    status="normal" if case.human_label else "abnormal",
                    source="human",
                )
            )
            continue
        ratios = _arm_ratios(case, corridor_frac)
        if not ratios:
            warnings.warn(
                DegenerateCaseWarning(f"{case_id}: no visible arms; excluded from the rate")
            )
            classifications.append(
                CaseClassification(case_id=case_id, status="excluded", source="automated")
            )
            continue
        counted += 1
        ok = all(r >= threshold for r in ratios.values())
        normal += int(ok)
        classifications.append(
            CaseClassification(
                case_id=case_id,
                status="normal" if ok else "abnormal",
                source="automated",
                arm_ratios=ratios,
            )
        )
    rate = normal / counted if counted else 0.0
    return NormalRateResult(
        rate=rate, normal=normal, counted=counted, classifications=tuple(classifications)
    )
