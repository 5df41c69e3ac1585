"""Small shared numeric helpers."""

from __future__ import annotations

import numpy as np

# Exact O(k^2) diameter up to this many points, iterated farthest-point above.
_DIAMETER_EXACT_LIMIT = 96


def lexsort_rows(points: np.ndarray) -> np.ndarray:
    """Indices sorting rows lexicographically by coordinates."""
    keys = tuple(points[:, d] for d in reversed(range(points.shape[1])))
    return np.lexsort(keys)


def diameter(points: np.ndarray) -> tuple[float, int, int]:
    """Diameter of a point set and the indices of an achieving pair.

    Exact for small sets; for large sets an iterated farthest-point sweep is
    used, which is exact on the arc/ring/cluster-pair sets seen here and never
    overestimates.
    """
    k = len(points)
    if k == 0:
        return 0.0, -1, -1
    if k == 1:
        return 0.0, 0, 0
    if k <= _DIAMETER_EXACT_LIMIT:
        d2 = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1)
        flat = int(np.argmax(d2))
        i, j = divmod(flat, k)
        return float(np.sqrt(d2[i, j])), i, j
    i = int(lexsort_rows(points)[0])
    best = (-1.0, i, i)
    for _ in range(6):
        d2 = np.sum((points - points[i]) ** 2, axis=1)
        j = int(np.argmax(d2))
        d = float(np.sqrt(d2[j]))
        if d <= best[0] + 1e-15:
            break
        best = (d, i, j)
        i = j
    return best


def farthest_pair(points: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Diameter plus the achieving pair of points."""
    d, i, j = diameter(points)
    return d, points[i].copy(), points[j].copy()


def single_linkage_split(points: np.ndarray, link: float) -> tuple[int, float]:
    """Number of single-linkage clusters at the given link distance and the
    smallest inter-cluster gap (inf when there is a single cluster)."""
    from . import _kernels

    k = len(points)
    if k <= 1:
        return k, np.inf
    labels = _kernels.linkage_components(points, link)
    n_clusters = int(labels.max()) + 1
    if n_clusters == 1:
        return 1, np.inf
    d = np.sqrt(np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1))
    gap = np.inf
    for a in range(n_clusters):
        sel = labels == a
        gap = min(gap, float(d[np.ix_(sel, ~sel)].min()))
    return n_clusters, gap


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & 0xFFFFFFFF)


def derive_seed(seed: int, *salts: int) -> int:
    """Stable per-task seed derivation (order-sensitive)."""
    x = (int(seed) & 0xFFFFFFFF) or 0x9E3779B9
    for s in salts:
        x = (x * 0x01000193 + (int(s) & 0xFFFFFFFF) + 0x7F4A7C15) & 0xFFFFFFFF
    return x
