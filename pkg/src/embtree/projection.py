"""Principal-direction projections of embedding subsets.

Each tree node projects its member embeddings onto the top eigenvector of
the subset covariance before scoring candidate splits; the explorer view
uses the top two directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Dense eigendecomposition is cheap for typical embedding widths; fall back
# to power iteration with deflation above this.
EIGH_MAX_DIM = 256
POWER_TOL = 1e-9
POWER_MAX_ITER = 1000


@dataclass(eq=False)
class PrincipalProjection:
    """Top-k principal directions of a point set and the projected scores.

    components holds k orthonormal rows; scores is (rows - mean) @
    components.T; explained_variance is non-increasing.  Sign convention:
    each component's largest-magnitude entry is non-negative, which makes
    the decomposition deterministic.
    """

    mean: np.ndarray  # (p,)
    components: np.ndarray  # (k, p)
    scores: np.ndarray  # (n, k)
    explained_variance: np.ndarray  # (k,)


def project(subset, k: int = 1) -> PrincipalProjection:
    """Project a point subset onto its top-k principal directions.

    The covariance uses the population normalization (divide by n), matching
    the maximum-likelihood variance convention of the split criterion.  A
    single point, or a subset of identical points, projects to all-zero
    scores along the first k standard basis directions.
    """
    points = np.asarray(subset, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError("subset must be a non-empty n x p matrix")
    n, p = points.shape
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    if p < k:
        raise ValueError(f"cannot extract {k} components from {p}-dimensional points")

    mean = points.mean(axis=0)
    centered = points - mean

    if not centered.any():
        components = np.eye(p, dtype=np.float64)[:k]
        variances = np.zeros(k)
    elif p <= EIGH_MAX_DIM:
        cov = centered.T @ centered / n
        eigvals, eigvecs = np.linalg.eigh(cov)  # ascending
        components = eigvecs[:, -1 : -k - 1 : -1].T.copy()
        variances = np.maximum(eigvals[-1 : -k - 1 : -1], 0.0)
    else:
        components, variances = _power_components(centered, k)

    _fix_signs(components)
    scores = centered @ components.T
    return PrincipalProjection(
        mean=mean,
        components=components,
        scores=scores,
        explained_variance=np.asarray(variances, dtype=np.float64),
    )


def _fix_signs(components: np.ndarray) -> None:
    # flip each direction so its largest-magnitude entry is non-negative
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            np.negative(row, out=row)


def _power_components(centered: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-k eigenpairs of centered.T @ centered / n by power iteration.

    The covariance matrix is never materialized; matvecs go through the
    centered data.  Deflation keeps later directions orthogonal to the ones
    already found.  The fixed RNG seed makes the start vectors, and hence
    the whole iteration, deterministic.
    """
    n, p = centered.shape
    rng = np.random.default_rng(0)
    components = np.zeros((k, p), dtype=np.float64)
    variances = np.zeros(k, dtype=np.float64)

    for comp in range(k):
        v = rng.standard_normal(p)
        for prev in components[:comp]:
            v -= (v @ prev) * prev
        norm = np.linalg.norm(v)
        if norm == 0.0:  # pathological start; any basis vector will do
            v = np.eye(p)[comp].copy()
            norm = 1.0
        v /= norm
        for _ in range(POWER_MAX_ITER):
            w = centered.T @ (centered @ v) / n
            for prev in components[:comp]:
                w -= (w @ prev) * prev
            norm = np.linalg.norm(w)
            if norm == 0.0:
                # remaining variance is zero; keep a deterministic direction
                w = _orthogonal_basis_vector(components[:comp], p)
                v = w
                break
            w /= norm
            done = 1.0 - abs(w @ v) <= POWER_TOL
            v = w
            if done:
                break
        components[comp] = v
        variances[comp] = v @ (centered.T @ (centered @ v)) / n
    return components, np.maximum(variances, 0.0)


def _orthogonal_basis_vector(existing: np.ndarray, p: int) -> np.ndarray:
    for j in range(p):
        v = np.eye(p)[j]
        for prev in existing:
            v = v - (v @ prev) * prev
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm
    raise RuntimeError("could not construct an orthogonal direction")
