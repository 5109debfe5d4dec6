"""Synthetic person scenes for tests, fixtures and demos.

People are painted with the stub-parser palette, so parse labels round-trip
exactly through the stub backend chain, and body parts sit on the stub
pose template's joints so mask geometry lines up with the skeleton.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as tio
from .backends import STUB_PALETTE, template_skeleton
from .geometry import capsule_mask, disk_mask
from .types import (
    DEFAULT_LABEL_SCHEMA,
    ParseMap,
    PoseSkeleton,
    RasterImage,
    SleeveClass,
)

# Body-part radii as fractions of image height.
ARM_RADIUS = 0.040
LEG_RADIUS = 0.045
HEAD_RADIUS = 0.060
HAIR_RADIUS = 0.068
NECK_RADIUS = 0.028
HAND_RADIUS = 0.032

_NAME_TO_ID = {name: i for i, name in DEFAULT_LABEL_SCHEMA.items()}


@dataclass(frozen=True)
class SyntheticPerson:
    image: RasterImage
    parse: ParseMap
    pose: PoseSkeleton
    sleeve: SleeveClass


class _Canvas:
    def __init__(self, width, height, palette):
        self.palette = palette
        self.px = np.empty((height, width, 3), dtype=np.uint8)
        self.px[:] = palette[_NAME_TO_ID["background"]]
        self.labels = np.zeros((height, width), dtype=np.int32)

    def paint(self, region: np.ndarray, label_name: str):
        label_id = _NAME_TO_ID[label_name]
        self.px[region] = self.palette[label_id]
        self.labels[region] = label_id


def _mid(a, b):
    return ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0)


def make_person(
    width: int = 64,
    height: int = 64,
    sleeve: SleeveClass = SleeveClass.LONG_SLEEVE,
    lower: str | None = "pants",
    dress: bool = False,
    palette=None,
) -> SyntheticPerson:
    """Paint a frontal person. `lower` is "pants", "skirt" or None (bare
    legs); `dress` replaces both garments with a single dress."""
    sleeve = SleeveClass(sleeve)
    palette = palette or STUB_PALETTE
    pose = template_skeleton(width, height)
    canvas = _Canvas(width, height, palette)
    h = height

    joints = {name: pose.point(name) for name in
              ("nose", "neck", "right_shoulder", "right_elbow", "right_wrist",
               "left_shoulder", "left_elbow", "left_wrist",
               "right_hip", "right_knee", "right_ankle",
               "left_hip", "left_knee", "left_ankle")}

    # Head: hair cap behind/above, face in front.
    nose = joints["nose"]
    hair_center = (nose[0], nose[1] - 0.03 * h)
    canvas.paint(disk_mask(h, width, hair_center, HAIR_RADIUS * h), "hair")
    canvas.paint(disk_mask(h, width, (nose[0], nose[1] + 0.005 * h), HEAD_RADIUS * h), "face")

    # Neck column between chin and the neck joint.
    neck = joints["neck"]
    canvas.paint(
        capsule_mask(h, width, (nose[0], nose[1] + 0.05 * h), neck, NECK_RADIUS * h), "neck"
    )

    # Legs first, then lower garment over them.
    for side in ("right", "left"):
        hip, knee, ankle = joints[f"{side}_hip"], joints[f"{side}_knee"], joints[f"{side}_ankle"]
        leg = capsule_mask(h, width, hip, knee, LEG_RADIUS * h)
        leg |= capsule_mask(h, width, knee, ankle, LEG_RADIUS * h)
        canvas.paint(leg, f"{side}_leg")

    if not dress and lower == "pants":
        for side in ("right", "left"):
            hip, knee, ankle = (
                joints[f"{side}_hip"],
                joints[f"{side}_knee"],
                joints[f"{side}_ankle"],
            )
            pant = capsule_mask(h, width, hip, knee, (LEG_RADIUS + 0.008) * h)
            pant |= capsule_mask(h, width, knee, ankle, (LEG_RADIUS + 0.008) * h)
            canvas.paint(pant, "pants")
    elif not dress and lower == "skirt":
        x0 = joints["right_hip"][0] - 0.06 * width
        x1 = joints["left_hip"][0] + 0.06 * width
        y0 = joints["right_hip"][1] - 0.02 * h
        y1 = 0.70 * h
        region = np.zeros((h, width), dtype=bool)
        region[int(y0) : int(y1), int(x0) : int(x1)] = True
        canvas.paint(region, "skirt")

    # Arms: skin below the sleeve hem, garment above.
    for side in ("right", "left"):
        shoulder, elbow, wrist = (
            joints[f"{side}_shoulder"],
            joints[f"{side}_elbow"],
            joints[f"{side}_wrist"],
        )
        whole = capsule_mask(h, width, shoulder, elbow, ARM_RADIUS * h)
        whole |= capsule_mask(h, width, elbow, wrist, ARM_RADIUS * h)
        whole |= disk_mask(h, width, wrist, HAND_RADIUS * h)
        if sleeve == SleeveClass.LONG_SLEEVE:
            canvas.paint(disk_mask(h, width, wrist, HAND_RADIUS * h), f"{side}_arm")
            sleeve_region = capsule_mask(h, width, shoulder, elbow, ARM_RADIUS * h)
            sleeve_region |= capsule_mask(h, width, elbow, wrist, ARM_RADIUS * h)
            sleeve_region &= ~disk_mask(h, width, wrist, HAND_RADIUS * h)
            canvas.paint(sleeve_region, "dress" if dress else "upper_clothes")
        elif sleeve == SleeveClass.SHORT_SLEEVE:
            canvas.paint(whole, f"{side}_arm")
            hem = capsule_mask(h, width, shoulder, _mid(shoulder, elbow), ARM_RADIUS * h)
            canvas.paint(hem, "dress" if dress else "upper_clothes")
        else:
            canvas.paint(whole, f"{side}_arm")

    # Torso garment last so it owns the shoulder seam.
    x0 = joints["right_shoulder"][0] - 0.01 * width
    x1 = joints["left_shoulder"][0] + 0.01 * width
    y0 = neck[1] - 0.01 * h
    torso = np.zeros((h, width), dtype=bool)
    if dress:
        torso[int(y0) : int(0.72 * h), int(x0) : int(x1)] = True
        canvas.paint(torso, "dress")
    else:
        torso[int(y0) : int(joints["right_hip"][1] + 0.01 * h), int(x0) : int(x1)] = True
        canvas.paint(torso, "upper_clothes")

    return SyntheticPerson(
        image=RasterImage(canvas.px),
        parse=ParseMap(canvas.labels, dict(DEFAULT_LABEL_SCHEMA)),
        pose=pose,
        sleeve=sleeve,
    )


def make_garment(
    width: int = 64,
    height: int = 64,
    color=(204, 51, 51),
    stripe=None,
    stripe_period: int = 8,
) -> RasterImage:
    """Flat (optionally striped) garment swatch on a white ground."""
    px = np.empty((height, width, 3), dtype=np.uint8)
    px[:] = (250, 250, 250)
    y0, y1 = int(0.1 * height), int(0.9 * height)
    x0, x1 = int(0.15 * width), int(0.85 * width)
    px[y0:y1, x0:x1] = np.asarray(color, dtype=np.uint8)
    if stripe is not None:
        for y in range(y0, y1, stripe_period):
            px[y : y + stripe_period // 2, x0:x1] = np.asarray(stripe, dtype=np.uint8)
    return RasterImage(px)


def write_dataset(root, persons: dict, garments: dict, metadata: dict | None = None) -> None:
    """Write persons/garments in the conventional evaluation layout:
    image/, cloth/, image-parse-v3/, openpose_json/ plus metadata.json."""
    root = Path(root)
    for item_id, person in persons.items():
        tio.save_image(person.image, root / "image" / f"{item_id}.png")
        tio.save_parse(person.parse, root / "image-parse-v3" / f"{item_id}.png")
        tio.save_pose(person.pose, root / "openpose_json" / f"{item_id}_keypoints.json")
    for item_id, garment in garments.items():
        tio.save_image(garment, root / "cloth" / f"{item_id}.png")
    if metadata is not None:
        root.mkdir(parents=True, exist_ok=True)
        (root / "metadata.json").write_text(json.dumps(metadata, indent=2, sort_keys=True))
