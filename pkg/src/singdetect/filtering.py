"""Density filters that keep the "high-density" part of a point set.

Both filters are brute force, O(N^2) in time, evaluated in row blocks so
memory stays O(block * N).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import BatchedPointSet, PointSet, merge_batches

_BLOCK = 512


def silverman_bandwidth(n: int, d: int = 2) -> float:
    """``h = (n (d + 2) / 4) ** (-1 / (d + 4))``.

    No sample-spread factor is applied; pass a fixed bandwidth to
    :class:`KdeParams` for the scaled variant.
    """
    if n < 1:
        raise ValueError("need at least one point")
    return (n * (d + 2) / 4.0) ** (-1.0 / (d + 4))


def _sq_dists(block: np.ndarray, pts: np.ndarray) -> np.ndarray:
    diff = block[:, None, :] - pts[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kde_density(X, h: float) -> np.ndarray:
    """Gaussian kernel density at every point of ``X``, self term included."""
    pts = X.points if isinstance(X, PointSet) else np.asarray(X, dtype=np.float64)
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    n = pts.shape[0]
    norm = 1.0 / (2.0 * math.pi * n * h * h)
    out = np.empty(n)
    for start in range(0, n, _BLOCK):
        blk = pts[start:start + _BLOCK]
        k = np.exp(-_sq_dists(blk, pts) / (2.0 * h * h))
        out[start:start + _BLOCK] = norm * k.sum(axis=1)
    return out


def knn_indices(X, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest other points of every point.

    The query point is excluded from its own neighbourhood; equal distances
    are resolved by input order.
    """
    pts = X.points if isinstance(X, PointSet) else np.asarray(X, dtype=np.float64)
    n = pts.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < {n}, got {k}")
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _BLOCK):
        d2 = _sq_dists(pts[start:start + _BLOCK], pts)
        rows = np.arange(d2.shape[0])
        d2[rows, start + rows] = np.inf
        if k < n - 1:
            # partition first, then a stable sort of the candidates keeps ties in index order
            kth = np.partition(d2, k - 1, axis=1)[:, k - 1:k]
            for r in rows:
                cand = np.flatnonzero(d2[r] <= kth[r, 0])
                order = np.argsort(d2[r, cand], kind="stable")
                out[start + r] = cand[order[:k]]
        else:
            out[start:start + _BLOCK] = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return out


def knn_scores(X, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Sum of squared distances to the ``k`` nearest neighbours, and the neighbours."""
    pts = X.points if isinstance(X, PointSet) else np.asarray(X, dtype=np.float64)
    nbrs = knn_indices(pts, k)
    diff = pts[nbrs] - pts[:, None, :]
    return np.einsum("ijk,ijk->i", diff, diff), nbrs


@dataclass(frozen=True)
class KdeParams:
    gamma: float
    bandwidth: float | str = "silverman"

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.bandwidth != "silverman":
            if isinstance(self.bandwidth, str) or not self.bandwidth > 0:
                raise ValueError(f"bandwidth must be 'silverman' or a positive number, "
                                 f"got {self.bandwidth!r}")

    def resolve_bandwidth(self, n: int) -> float:
        if self.bandwidth == "silverman":
            return silverman_bandwidth(n, 2)
        return float(self.bandwidth)

    def to_dict(self) -> dict:
        return {"method": "kde", "gamma": self.gamma, "bandwidth": self.bandwidth}


@dataclass(frozen=True)
class KnnParams:
    gamma: float
    k: int = 5

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    def to_dict(self) -> dict:
        return {"method": "knn", "gamma": self.gamma, "k": self.k}


@dataclass(frozen=True, eq=False)
class FilterReport:
    kept: PointSet
    kept_indices: np.ndarray
    scores: np.ndarray
    threshold_value: float
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "n_input": int(self.scores.size),
            "n_kept": int(self.kept_indices.size),
            "threshold": float(self.threshold_value),
            "kept_indices": self.kept_indices.tolist(),
            "scores": self.scores.tolist(),
        }


def _as_pointset(X) -> PointSet:
    if isinstance(X, BatchedPointSet):
        return merge_batches(X)
    if isinstance(X, PointSet):
        return X
    return PointSet(X)


def kde_filter(X, params: KdeParams) -> FilterReport:
    """Keep points with ``rho(x) > gamma * max rho``."""
    X = _as_pointset(X)
    if len(X) == 0:
        raise ValueError("cannot filter an empty point set")
    h = params.resolve_bandwidth(len(X))
    rho = kde_density(X, h)
    threshold = params.gamma * rho.max()
    idx = np.flatnonzero(rho > threshold)
    echo = params.to_dict() | {"h": h}
    return FilterReport(X[idx], idx, rho, threshold, echo)


def knn_filter(X, params: KnnParams) -> FilterReport:
    """Keep points with ``delta(x) < min delta / gamma``."""
    X = _as_pointset(X)
    if params.k >= len(X):
        raise ValueError(f"k={params.k} needs more than {params.k} points, got {len(X)}")
    delta, _ = knn_scores(X, params.k)
    threshold = delta.min() / params.gamma
    idx = np.flatnonzero(delta < threshold)
    if idx.size == 0:
        # every delta is 0 (all neighbourhoods coincident): 0 < 0 keeps nothing
        idx = np.flatnonzero(delta == delta.min())
    return FilterReport(X[idx], idx, delta, threshold, params.to_dict())


def apply_filter(X, params: KdeParams | KnnParams) -> FilterReport:
    if isinstance(params, KdeParams):
        return kde_filter(X, params)
    if isinstance(params, KnnParams):
        return knn_filter(X, params)
    raise TypeError(f"unsupported filter parameters {params!r}")
