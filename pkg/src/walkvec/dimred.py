"""PCA via covariance eigendecomposition.

Column counts here stay in the hundreds (concatenated multi-level embedding
blocks), so a dense symmetric eigensolve is cheap and easy to verify.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PCAResult:
    components: np.ndarray        # (m, target_dim), columns = principal directions
    explained_variance: np.ndarray  # (target_dim,), non-increasing
    mean: np.ndarray              # (m,) column means of the input


def fit_pca(x: np.ndarray, target_dim: int) -> PCAResult:
    """Fit non-whitened PCA on the rows of ``x``.

    Columns are mean-centered, the sample covariance (n-1 denominator) is
    eigendecomposed, and components are ordered by decreasing explained
    variance. Each component's sign is fixed so its largest-magnitude loading
    is positive.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("input must be a 2-d matrix")
    n, m = x.shape
    if not 1 <= target_dim <= min(n, m):
        raise ValueError(f"target_dim must be in [1, min(n, m)] = [1, {min(n, m)}], got {target_dim}")
    mean = x.mean(axis=0)
    centered = x - mean
    denom = max(n - 1, 1)
    cov = centered.T @ centered / denom
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:target_dim]
    components = eigvecs[:, order]
    explained = np.maximum(eigvals[order], 0.0)
    for j in range(components.shape[1]):
        i = np.argmax(np.abs(components[:, j]))
        if components[i, j] < 0:
            components[:, j] = -components[:, j]
    return PCAResult(components, explained, mean)


def pca(x: np.ndarray, target_dim: int) -> np.ndarray:
    """Project the rows of ``x`` onto the top ``target_dim`` principal
    directions (mean-centered, no variance scaling)."""
    fit = fit_pca(x, target_dim)
    return (np.asarray(x, dtype=np.float64) - fit.mean) @ fit.components
