"""Core raster/mask/pose types shared by every stage of the pipeline.

All types validate their invariants at construction time and expose
read-only numpy buffers, so instances are safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class GarmentCategory(str, Enum):
    UPPER = "upper"
    LOWER = "lower"
    DRESS = "dress"


class SleeveClass(str, Enum):
    LONG_SLEEVE = "long_sleeve"
    SHORT_SLEEVE = "short_sleeve"
    SLEEVELESS = "sleeveless"


# COCO 18-joint ordering (OpenPose convention).
COCO18_KEYPOINT_NAMES = (
    "nose",
    "neck",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_hip",
    "right_knee",
    "right_ankle",
    "left_hip",
    "left_knee",
    "left_ankle",
    "right_eye",
    "left_eye",
    "right_ear",
    "left_ear",
)

# ATR/DressCode-style human parsing labels. The schema is data, not code:
# loaders may supply any mapping, this is only the default vocabulary.
DEFAULT_LABEL_SCHEMA = {
    0: "background",
    1: "hat",
    2: "hair",
    3: "sunglasses",
    4: "upper_clothes",
    5: "skirt",
    6: "pants",
    7: "dress",
    8: "belt",
    9: "left_shoe",
    10: "right_shoe",
    11: "face",
    12: "left_leg",
    13: "right_leg",
    14: "left_arm",
    15: "right_arm",
    16: "bag",
    17: "scarf",
    18: "neck",
}


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit RGB raster, shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) pixel buffer, got shape {px.shape}")
        if px.dtype != np.uint8:
            if np.issubdtype(px.dtype, np.integer) and px.min() >= 0 and px.max() <= 255:
                px = px.astype(np.uint8)
            else:
                raise ValueError(f"pixel values must be 8-bit, got dtype {px.dtype}")
        object.__setattr__(self, "pixels", _freeze(px))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def size(self) -> tuple[int, int]:
        """(width, height), PIL convention."""
        return (self.width, self.height)

    @classmethod
    def full(cls, width: int, height: int, color=(0, 0, 0)) -> "RasterImage":
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[:] = np.asarray(color, dtype=np.uint8)
        return cls(px)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Per-pixel boolean region indicator (True = inpaint / replace)."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise ValueError(f"expected (H, W) mask, got shape {bits.shape}")
        if bits.dtype != np.bool_:
            bits = bits.astype(bool)
        object.__setattr__(self, "bits", _freeze(bits))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def is_empty(self) -> bool:
        return not self.bits.any()

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))

    def matches(self, other) -> bool:
        """True when dimensions equal those of another raster/mask/parse."""
        return self.width == other.width and self.height == other.height


@dataclass(frozen=True, eq=False)
class ParseMap:
    """Per-pixel semantic body/clothing labels plus their schema."""

    labels: np.ndarray
    label_schema: dict = field(default_factory=lambda: dict(DEFAULT_LABEL_SCHEMA))

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise ValueError(f"expected (H, W) label map, got shape {labels.shape}")
        if not np.issubdtype(labels.dtype, np.integer):
            raise ValueError(f"labels must be integers, got dtype {labels.dtype}")
        labels = labels.astype(np.int32)
        present = set(np.unique(labels).tolist())
        unknown = present - set(self.label_schema)
        if unknown:
            raise ValueError(f"labels {sorted(unknown)} missing from label schema")
        object.__setattr__(self, "labels", _freeze(labels))
        object.__setattr__(self, "label_schema", dict(self.label_schema))

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def ids_for(self, *names: str) -> list[int]:
        """Label ids whose schema name is in `names` (missing names ignored)."""
        wanted = set(names)
        return [i for i, n in self.label_schema.items() if n in wanted]

    def mask_for(self, *names: str) -> BinaryMask:
        """Binary mask of all pixels carrying any of the named labels."""
        ids = self.ids_for(*names)
        if not ids:
            return BinaryMask.empty(self.width, self.height)
        return BinaryMask(np.isin(self.labels, ids))


@dataclass(frozen=True, eq=False)
class PoseSkeleton:
    """18-keypoint 2-D body pose, COCO-18 ordering.

    `points` has shape (18, 3) = (x, y, confidence). A confidence of 0
    marks the joint invalid; its coordinates must never be dereferenced.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (18, 3):
            raise ValueError(f"expected (18, 3) keypoints, got shape {pts.shape}")
        if ((pts[:, 2] < 0) | (pts[:, 2] > 1)).any():
            raise ValueError("keypoint confidences must lie in [0, 1]")
        object.__setattr__(self, "points", _freeze(pts))

    def index(self, name: str) -> int:
        return COCO18_KEYPOINT_NAMES.index(name)

    def is_valid(self, name: str) -> bool:
        return self.points[self.index(name), 2] > 0

    def point(self, name: str):
        """(x, y) of a joint, or None when its confidence is 0."""
        row = self.points[self.index(name)]
        if row[2] <= 0:
            return None
        return (float(row[0]), float(row[1]))

    def flat(self) -> list[float]:
        """x, y, confidence triples flattened to 54 numbers."""
        return [float(v) for v in self.points.reshape(-1)]


def _dilate_axis(bits: np.ndarray, radius: int, axis: int) -> np.ndarray:
    out = bits.copy()
    n = bits.shape[axis]
    for off in range(1, radius + 1):
        src = [slice(None), slice(None)]
        dst = [slice(None), slice(None)]
        src[axis] = slice(off, n)
        dst[axis] = slice(0, n - off)
        out[tuple(dst)] |= bits[tuple(src)]
        src[axis] = slice(0, n - off)
        dst[axis] = slice(off, n)
        out[tuple(dst)] |= bits[tuple(src)]
    return out


def dilate(mask: BinaryMask, radius: int) -> BinaryMask:
    """Dilate with a square (Chebyshev) structuring element of given radius.

    Radius 0 is the identity. The square element is separable, so the
    composition law dilate(dilate(m, a), b) == dilate(m, a + b) holds exactly.
    """
    if radius < 0:
        raise ValueError("dilation radius must be >= 0")
    if radius == 0 or mask.is_empty():
        return mask
    bits = _dilate_axis(mask.bits, radius, axis=0)
    bits = _dilate_axis(bits, radius, axis=1)
    return BinaryMask(bits)
