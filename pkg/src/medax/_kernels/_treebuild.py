"""Array-based k-d tree construction shared by both kernel backends.

The tree is built once in numpy (construction is not the hot path) so the
compiled and pure backends traverse bit-identical structures.  Nodes are
median splits on the widest coordinate; leaves own contiguous ranges of the
``perm`` index array.  Stable argsorts keep the layout deterministic for a
given point array.
"""

from __future__ import annotations

import numpy as np

LEAF_SIZE = 16


def build_tree(points: np.ndarray, leaf_size: int = LEAF_SIZE) -> dict:
    """Build the split-array representation of a median k-d tree.

    Returns a dict of flat arrays: ``split_dim``/``split_val`` per node,
    ``left``/``right`` child ids (-1 for leaves), ``start``/``end`` ranges
    into ``perm`` (populated for leaves only), plus ``perm`` itself.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("points must be a nonempty (n, dim) array")
    n = len(pts)

    split_dim: list[int] = []
    split_val: list[float] = []
    left: list[int] = []
    right: list[int] = []
    start: list[int] = []
    end: list[int] = []
    perm = np.arange(n, dtype=np.int64)

    def new_node() -> int:
        split_dim.append(-1)
        split_val.append(0.0)
        left.append(-1)
        right.append(-1)
        start.append(0)
        end.append(0)
        return len(split_dim) - 1

    # (node_id, lo, hi) ranges over perm awaiting processing
    stack = [(new_node(), 0, n)]
    while stack:
        node, lo, hi = stack.pop()
        count = hi - lo
        idx = perm[lo:hi]
        if count <= leaf_size:
            start[node] = lo
            end[node] = hi
            continue
        sub = pts[idx]
        extent = sub.max(axis=0) - sub.min(axis=0)
        dim = int(np.argmax(extent))
        order = np.argsort(sub[:, dim], kind="stable")
        perm[lo:hi] = idx[order]
        mid = lo + count // 2
        split_dim[node] = dim
        split_val[node] = float(pts[perm[mid], dim])
        lc = new_node()
        rc = new_node()
        left[node] = lc
        right[node] = rc
        stack.append((lc, lo, mid))
        stack.append((rc, mid, hi))

    return {
        "points": pts,
        "split_dim": np.asarray(split_dim, dtype=np.int32),
        "split_val": np.asarray(split_val, dtype=np.float64),
        "left": np.asarray(left, dtype=np.int32),
        "right": np.asarray(right, dtype=np.int32),
        "start": np.asarray(start, dtype=np.int64),
        "end": np.asarray(end, dtype=np.int64),
        "perm": perm,
    }
