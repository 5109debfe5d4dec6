"""Frechet distance between Gaussian feature statistics.

d^2 = ||mu1 - mu2||^2 + Tr(C1 + C2 - 2 (C1 C2)^(1/2))

The matrix square root is taken via eigendecomposition of the
symmetrized product C1^(1/2) C2 C1^(1/2), whose eigenvalues are real; any
negative eigenvalue from round-off is clamped to zero, and the final
value is clamped at zero as well.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NumericalFailure
from .stats import GaussianStats


def _sqrt_psd(matrix: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(matrix)
    if not np.isfinite(eigvals).all():
        raise NumericalFailure("non-finite eigenvalues in covariance square root")
    eigvals = np.clip(eigvals, 0.0, None)
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T


def fid(real: GaussianStats, gen: GaussianStats) -> float:
    """Squared Frechet distance between two Gaussian fits (lower = closer)."""
    if real.dim != gen.dim:
        raise DimensionMismatch(f"stats dimensions differ: {real.dim} vs {gen.dim}")
    if not (np.isfinite(real.mean).all() and np.isfinite(gen.mean).all()):
        raise NumericalFailure("non-finite mean")
    if not (np.isfinite(real.cov).all() and np.isfinite(gen.cov).all()):
        raise NumericalFailure("non-finite covariance")

    diff = real.mean - gen.mean
    sqrt_c1 = _sqrt_psd(real.cov)
    inner = sqrt_c1 @ gen.cov @ sqrt_c1
    inner = (inner + inner.T) / 2.0
    cross_eigvals, _ = np.linalg.eigh(inner)
    if not np.isfinite(cross_eigvals).all():
        raise NumericalFailure("non-finite eigenvalues in cross term")
    cross = np.sqrt(np.clip(cross_eigvals, 0.0, None)).sum()

    value = float(diff @ diff + np.trace(real.cov) + np.trace(gen.cov) - 2.0 * cross)
    if not np.isfinite(value):
        raise NumericalFailure("non-finite distance")
    return max(value, 0.0)
