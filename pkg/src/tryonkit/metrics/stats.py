"""Gaussian feature statistics: single-pass accumulation and exact merging."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InsufficientSamples

_SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class GaussianStats:
    """Sample mean and unbiased covariance of a feature distribution."""

    mean: np.ndarray
    cov: np.ndarray
    n: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        cov = np.asarray(self.cov, dtype=np.float64)
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(
                f"covariance shape {cov.shape} inconsistent with mean of size {mean.size}"
            )
        if np.abs(cov - cov.T).max(initial=0.0) > _SYMMETRY_TOL:
            raise ValueError("covariance must be symmetric within 1e-9")
        if self.n < 2:
            raise InsufficientSamples("covariance needs at least 2 samples")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", (cov + cov.T) / 2.0)

    @property
    def dim(self) -> int:
        return self.mean.size

    @classmethod
    def from_features(cls, features: np.ndarray) -> "GaussianStats":
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2:
            raise DimensionMismatch(f"expected (n, dim) feature array, got shape {x.shape}")
        if x.shape[0] < 2:
            raise InsufficientSamples("need at least 2 feature vectors")
        mean = x.mean(axis=0)
        centered = x - mean
        cov = centered.T @ centered / (x.shape[0] - 1)
        return cls(mean, cov, x.shape[0])

    def merge(self, other: "GaussianStats") -> "GaussianStats":
        """Exact combination of two disjoint shards (associative)."""
        if self.dim != other.dim:
            raise DimensionMismatch("cannot merge stats of different dimension")
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.n / n)
        scatter = (
            self.cov * (self.n - 1)
            + other.cov * (other.n - 1)
            + np.outer(delta, delta) * (self.n * other.n / n)
        )
        return GaussianStats(mean, scatter / (n - 1), n)


def accumulate_stats(features) -> GaussianStats:
    """Single-pass, numerically stable mean/covariance over a vector stream.

    Welford's recurrence generalized to the outer-product scatter matrix;
    the covariance is unbiased (divides by n - 1).
    """
    mean = None
    scatter = None
    n = 0
    for vec in features:
        x = np.asarray(vec, dtype=np.float64).reshape(-1)
        if mean is None:
            mean = np.zeros_like(x)
            scatter = np.zeros((x.size, x.size))
        elif x.size != mean.size:
            raise DimensionMismatch(
                f"feature of dimension {x.size} in a stream of dimension {mean.size}"
            )
        n += 1
        delta = x - mean
        mean += delta / n
        scatter += np.outer(delta, x - mean)
    if n < 2:
        raise InsufficientSamples("need at least 2 feature vectors")
    return GaussianStats(mean, scatter / (n - 1), n)
