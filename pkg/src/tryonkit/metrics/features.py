"""Feature extractors and the binary feature-dump file format.

Heavy embedding networks stay external: their features are ingested from
dump files, so the scoring engine runs without any weights. The toy
extractors below are deterministic stand-ins used in tests and demos.
"""

from __future__ import annotations

import struct
from abc import ABC, abstractmethod
from pathlib import Path

import numpy as np

from ..types import RasterImage
from .errors import ExtractorContractViolation

MAGIC = b"CAPF"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


class FlatFeatureExtractor(ABC):
    """One flat vector per image (distribution-distance role)."""

    name: str = "flat"

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @abstractmethod
    def features(self, img: RasterImage) -> np.ndarray: ...


class LayeredFeatureExtractor(ABC):
    """Per-layer feature maps plus per-layer channel weights (perceptual role)."""

    name: str = "layered"

    @property
    @abstractmethod
    def layer_weights(self) -> list: ...

    @abstractmethod
    def feature_maps(self, img: RasterImage) -> list: ...


class PatchMeanExtractor(FlatFeatureExtractor):
    """Mean color of each cell of a fixed grid, flattened."""

    name = "patch-mean"

    def __init__(self, grid: int = 4):
        if grid < 1:
            raise ValueError("grid must be >= 1")
        self.grid = grid

    @property
    def dim(self) -> int:
        return self.grid * self.grid * 3

    def features(self, img: RasterImage) -> np.ndarray:
        px = img.pixels.astype(np.float64) / 255.0
        h_edges = np.linspace(0, img.height, self.grid + 1).astype(int)
        w_edges = np.linspace(0, img.width, self.grid + 1).astype(int)
        out = np.empty((self.grid, self.grid, 3))
        for i in range(self.grid):
            for j in range(self.grid):
                cell = px[h_edges[i] : h_edges[i + 1], w_edges[j] : w_edges[j + 1]]
                out[i, j] = cell.mean(axis=(0, 1)) if cell.size else 0.0
        return out.reshape(-1)


class IdentityLayerExtractor(LayeredFeatureExtractor):
    """The image itself as a single (3, H, W) layer in [0, 1]."""

    name = "identity"

    def __init__(self, weights=(1.0, 1.0, 1.0)):
        self._weights = np.asarray(weights, dtype=np.float64)

    @property
    def layer_weights(self) -> list:
        return [self._weights]

    def feature_maps(self, img: RasterImage) -> list:
        return [np.moveaxis(img.pixels.astype(np.float64) / 255.0, -1, 0)]


def validate_layered(extractor, maps) -> None:
    weights = extractor.layer_weights
    if len(weights) != len(maps):
        raise ExtractorContractViolation(
            f"{len(weights)} weight vectors for {len(maps)} feature layers"
        )
    for w, fmap in zip(weights, maps):
        fmap = np.asarray(fmap)
        if fmap.ndim != 3:
            raise ExtractorContractViolation(f"feature map must be (C, H, W), got {fmap.shape}")
        if np.asarray(w).reshape(-1).size != fmap.shape[0]:
            raise ExtractorContractViolation(
                f"weight vector of size {np.asarray(w).size} for {fmap.shape[0]} channels"
            )


def write_features(path, features: np.ndarray) -> None:
    """Binary dump: magic CAPF, version u32, count u64, dim u64, then
    count*dim little-endian float32 values, row-major."""
    x = np.asarray(features, dtype=np.float32)
    if x.ndim != 2:
        raise ValueError(f"expected (count, dim) features, got shape {x.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, x.shape[0], x.shape[1]))
        fh.write(np.ascontiguousarray(x, dtype="<f4").tobytes())


def read_features(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"truncated feature file {path}")
        magic, version, count, dim = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"not a feature dump (bad magic {magic!r})")
        if version != VERSION:
            raise ValueError(f"unsupported feature dump version {version}")
        payload = fh.read(count * dim * 4)
    if len(payload) != count * dim * 4:
        raise ValueError(f"feature file {path} shorter than its header claims")
    return np.frombuffer(payload, dtype="<f4").reshape(count, dim).astype(np.float64)
