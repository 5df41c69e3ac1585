"""Pure numpy kernel backend.

Every query is answered by an exact, chunked linear scan.  This is the
fallback when the compiled core is unavailable and the reference oracle the
compiled core is tested against.  Semantics (tie-breaking, ordering, ragged
result layout) match ``_core``.
"""

from __future__ import annotations

import heapq

import numpy as np

BACKEND = "pure"

# Bytes allowed for one (chunk x n_points) distance buffer.
_BUFFER_BYTES = 200_000_000


def _chunk_rows(n_points: int) -> int:
    return max(1, min(512, _BUFFER_BYTES // (8 * max(n_points, 1))))


def _dist2_row(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    diff = points - q
    return np.einsum("ij,ij->i", diff, diff)


class KDTree:
    """Exact nearest-neighbor index over a fixed point set (linear scan)."""

    def __init__(self, points: np.ndarray):
        self.points = np.ascontiguousarray(points, dtype=np.float64)
        if self.points.ndim != 2 or len(self.points) == 0:
            raise ValueError("points must be a nonempty (n, dim) array")
        self.n, self.dim = self.points.shape
        self._sq = np.einsum("ij,ij->i", self.points, self.points)

    def query_one(self, q) -> tuple[float, int]:
        """Distance and index of the nearest point (ties: smallest index)."""
        d2 = _dist2_row(self.points, np.asarray(q, dtype=np.float64))
        i = int(np.argmin(d2))
        return float(np.sqrt(d2[i])), i

    def query_many(self, qs) -> tuple[np.ndarray, np.ndarray]:
        qs = np.atleast_2d(np.asarray(qs, dtype=np.float64))
        m = len(qs)
        dist = np.empty(m, dtype=np.float64)
        idx = np.empty(m, dtype=np.int64)
        step = _chunk_rows(self.n)
        for lo in range(0, m, step):
            hi = min(lo + step, m)
            d2 = (-2.0 * qs[lo:hi]) @ self.points.T
            d2 += self._sq[None, :]
            ii = np.argmin(d2, axis=1)
            idx[lo:hi] = ii
            diff = qs[lo:hi] - self.points[ii]
            dist[lo:hi] = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        return dist, idx

    def query_ball(self, q, r: float) -> np.ndarray:
        """Sorted indices of points within distance r (inclusive)."""
        d2 = _dist2_row(self.points, np.asarray(q, dtype=np.float64))
        return np.nonzero(d2 <= r * r)[0].astype(np.int64)

    def near_members_batch(self, qs, eps: float):
        """For each query: min distance and indices within min+eps.

        Returns ``(dist, indptr, members)`` with members of query i stored in
        ``members[indptr[i]:indptr[i+1]]`` in ascending index order.
        """
        qs = np.atleast_2d(np.asarray(qs, dtype=np.float64))
        m = len(qs)
        dist = np.empty(m, dtype=np.float64)
        counts = np.empty(m, dtype=np.int64)
        rows: list[np.ndarray] = []
        for j in range(m):
            d2 = _dist2_row(self.points, qs[j])
            d2min = float(d2.min())
            dmin = float(np.sqrt(max(d2min, 0.0)))
            dist[j] = dmin
            cut = dmin + eps
            # the nearest point itself must never round out of its own ball
            cut2 = max(cut * cut, d2min)
            members = np.nonzero(d2 <= cut2)[0].astype(np.int64)
            rows.append(members)
            counts[j] = len(members)
        indptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        members = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
        return dist, indptr, members


def radius_pairs(points: np.ndarray, r: float):
    """Symmetric CSR adjacency of all pairs within distance r (no self loops).

    Returns ``(indptr, indices, weights)`` with neighbor lists in ascending
    index order and Euclidean edge weights.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = len(pts)
    r2 = r * r
    neigh_idx: list[np.ndarray] = []
    neigh_w: list[np.ndarray] = []
    counts = np.zeros(n, dtype=np.int64)
    for i in range(n):
        row = _dist2_row(pts, pts[i])
        mask = row <= r2
        mask[i] = False
        cols = np.nonzero(mask)[0].astype(np.int64)
        neigh_idx.append(cols)
        neigh_w.append(np.sqrt(row[cols]))
        counts[i] = len(cols)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = (
        np.concatenate(neigh_idx) if neigh_idx else np.empty(0, dtype=np.int64)
    )
    weights = (
        np.concatenate(neigh_w) if neigh_w else np.empty(0, dtype=np.float64)
    )
    return indptr, indices, weights


def linkage_components(points, link: float) -> np.ndarray:
    """Single-linkage component labels of a small point set at a link radius."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = len(pts)
    labels = np.full(n, -1, dtype=np.int64)
    link2 = link * link
    comp = 0
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = comp
        frontier = [s]
        while frontier:
            u = frontier.pop()
            d2 = np.einsum("ij,ij->i", pts - pts[u], pts - pts[u])
            reach = np.nonzero((d2 <= link2) & (labels < 0))[0]
            labels[reach] = comp
            frontier.extend(int(v) for v in reach)
        comp += 1
    return labels


def connected_components(indptr, indices) -> np.ndarray:
    """Component labels (0-based, in first-visit order) of a CSR graph."""
    n = len(indptr) - 1
    labels = np.full(n, -1, dtype=np.int64)
    comp = 0
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = comp
        stack = [s]
        while stack:
            u = stack.pop()
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if labels[v] < 0:
                    labels[v] = comp
                    stack.append(v)
        comp += 1
    return labels


def dijkstra(indptr, indices, weights, source: int, targets=None):
    """Single-source shortest paths on a CSR graph.

    Returns ``(dist, parent)``; unreachable nodes carry ``inf`` / ``-1``.
    With ``targets`` given, stops once all of them are settled.
    """
    n = len(indptr) - 1
    dist = np.full(n, np.inf, dtype=np.float64)
    parent = np.full(n, -1, dtype=np.int64)
    remaining = None
    if targets is not None:
        remaining = set(int(t) for t in np.asarray(targets).ravel())
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = np.zeros(n, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if remaining is not None:
            remaining.discard(u)
            if not remaining:
                break
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            nd = d + weights[k]
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, parent
