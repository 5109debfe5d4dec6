"""File formats: PNG rasters/masks, paletted parse maps with a sidecar
label schema, and OpenPose-style keypoint JSON restricted to 18 joints."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .types import BinaryMask, ParseMap, PoseSkeleton, RasterImage

# Deterministic display palette for parse-map PNGs (label -> RGB).
_PARSE_PALETTE_SEED = [
    (0, 0, 0),
    (128, 0, 0),
    (255, 0, 0),
    (0, 85, 0),
    (170, 0, 51),
    (255, 85, 0),
    (0, 0, 85),
    (0, 119, 221),
    (85, 85, 0),
    (0, 85, 85),
    (85, 51, 0),
    (52, 86, 128),
    (0, 128, 0),
    (0, 0, 255),
    (51, 170, 221),
    (0, 255, 255),
    (85, 255, 170),
    (170, 255, 85),
    (255, 255, 0),
    (255, 170, 0),
]


def load_image(path) -> RasterImage:
    with Image.open(path) as im:
        return RasterImage(np.asarray(im.convert("RGB")))


def save_image(img: RasterImage, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img.pixels).save(path, format="PNG")


def load_mask(path) -> BinaryMask:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    values = np.unique(arr)
    if not set(values.tolist()) <= {0, 255}:
        raise ValueError(f"mask PNG must contain only 0/255, found values {values.tolist()}")
    return BinaryMask(arr == 255)


def save_mask(mask: BinaryMask, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    arr = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def _schema_path(png_path) -> Path:
    p = Path(png_path)
    return p.with_name(p.stem + ".labels.txt")


def save_parse(parse: ParseMap, path, schema_path=None) -> None:
    """Write a paletted PNG with label ids as pixel values plus a sidecar
    `<stem>.labels.txt` schema table (one `id name` pair per line)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if parse.labels.max(initial=0) > 255:
        raise ValueError("paletted PNG serialization supports label ids <= 255 only")
    im = Image.fromarray(parse.labels.astype(np.uint8), mode="P")
    palette = []
    for i in range(256):
        base = _PARSE_PALETTE_SEED[i % len(_PARSE_PALETTE_SEED)]
        shift = (i // len(_PARSE_PALETTE_SEED)) * 29
        palette.extend(((base[0] + shift) % 256, (base[1] + shift) % 256, (base[2] + shift) % 256))
    im.putpalette(palette)
    im.save(path, format="PNG")

    schema_path = Path(schema_path) if schema_path else _schema_path(path)
    lines = [f"{i} {name}" for i, name in sorted(parse.label_schema.items())]
    schema_path.write_text("\n".join(lines) + "\n")


def load_parse(path, schema_path=None) -> ParseMap:
    path = Path(path)
    schema_path = Path(schema_path) if schema_path else _schema_path(path)
    schema = {}
    for line in schema_path.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        label_id, name = line.split(None, 1)
        schema[int(label_id)] = name
    with Image.open(path) as im:
        if im.mode != "P":
            raise ValueError(f"parse map PNG must be paletted, got mode {im.mode}")
        labels = np.asarray(im)
    return ParseMap(labels.astype(np.int32), schema)


def save_pose(pose: PoseSkeleton, path) -> None:
    """OpenPose-style JSON dump: people[0].pose_keypoints_2d with 54 numbers."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    doc = {"version": 1.3, "people": [{"pose_keypoints_2d": pose.flat()}]}
    Path(path).write_text(json.dumps(doc))


def load_pose(path) -> PoseSkeleton:
    doc = json.loads(Path(path).read_text())
    people = doc.get("people", [])
    if not people:
        raise ValueError(f"no people in pose document {path}")
    flat = people[0]["pose_keypoints_2d"]
    if len(flat) != 54:
        raise ValueError(f"expected 54 keypoint numbers (18 joints), got {len(flat)}")
    return PoseSkeleton(np.asarray(flat, dtype=np.float64).reshape(18, 3))
