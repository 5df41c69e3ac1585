# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend: exact k-d tree queries and CSR Dijkstra.

Tree layout comes from ``_treebuild.build_tree`` so the compiled and pure
backends see identical structures; only the traversal loops live here.
"""

import numpy as np

cimport numpy as cnp

from . import _treebuild

cnp.import_array()

BACKEND = "compiled"

ctypedef cnp.float64_t f64
ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32


cdef inline f64 _dist2(const f64[:, ::1] pts, Py_ssize_t i, const f64* q, Py_ssize_t dim) noexcept nogil:
    cdef f64 acc = 0.0
    cdef f64 d
    cdef Py_ssize_t k
    for k in range(dim):
        d = pts[i, k] - q[k]
        acc += d * d
    return acc


cdef class KDTree:
    """Exact nearest-neighbor index over a fixed point set (median k-d tree)."""

    cdef readonly object points_arr
    cdef f64[:, ::1] pts
    cdef i32[::1] split_dim
    cdef f64[::1] split_val
    cdef i32[::1] left
    cdef i32[::1] right
    cdef i64[::1] start
    cdef i64[::1] end
    cdef i64[::1] perm
    cdef Py_ssize_t n, dim, n_nodes
    cdef i32[::1] stack_buf

    def __init__(self, points):
        tree = _treebuild.build_tree(points)
        self.points_arr = tree["points"]
        self.pts = tree["points"]
        self.split_dim = tree["split_dim"]
        self.split_val = tree["split_val"]
        self.left = tree["left"]
        self.right = tree["right"]
        self.start = tree["start"]
        self.end = tree["end"]
        self.perm = tree["perm"]
        self.n = self.pts.shape[0]
        self.dim = self.pts.shape[1]
        self.n_nodes = self.split_dim.shape[0]
        self.stack_buf = np.empty(self.n_nodes + 2, dtype=np.int32)

    @property
    def points(self):
        return self.points_arr

    cdef void _nn(self, const f64* q, f64* best_d2, i64* best_i) noexcept nogil:
        cdef i32* stack = &self.stack_buf[0]
        cdef Py_ssize_t top = 0
        cdef i32 node
        cdef Py_ssize_t k, j
        cdef f64 d2, plane
        cdef i64 idx
        best_d2[0] = 1e308
        best_i[0] = -1
        stack[top] = 0
        top += 1
        while top > 0:
            top -= 1
            node = stack[top]
            if self.split_dim[node] < 0:
                for k in range(self.start[node], self.end[node]):
                    idx = self.perm[k]
                    d2 = _dist2(self.pts, idx, q, self.dim)
                    if d2 < best_d2[0] or (d2 == best_d2[0] and idx < best_i[0]):
                        best_d2[0] = d2
                        best_i[0] = idx
                continue
            plane = q[self.split_dim[node]] - self.split_val[node]
            if plane <= 0.0:
                # near side first: push far side below so it pops later
                if plane * plane <= best_d2[0]:
                    stack[top] = self.right[node]
                    top += 1
                stack[top] = self.left[node]
                top += 1
            else:
                if plane * plane <= best_d2[0]:
                    stack[top] = self.left[node]
                    top += 1
                stack[top] = self.right[node]
                top += 1

    def query_one(self, q):
        """Distance and index of the nearest point (ties: smallest index)."""
        cdef cnp.ndarray[f64, ndim=1] qa = np.ascontiguousarray(q, dtype=np.float64)
        cdef f64 best_d2
        cdef i64 best_i
        self._nn(<f64*> qa.data, &best_d2, &best_i)
        return float(best_d2 ** 0.5), int(best_i)

    def query_many(self, qs):
        cdef cnp.ndarray[f64, ndim=2] qa = np.ascontiguousarray(np.atleast_2d(qs), dtype=np.float64)
        cdef Py_ssize_t m = qa.shape[0]
        cdef cnp.ndarray[f64, ndim=1] dist = np.empty(m, dtype=np.float64)
        cdef cnp.ndarray[i64, ndim=1] idx = np.empty(m, dtype=np.int64)
        cdef f64 best_d2
        cdef i64 best_i
        cdef Py_ssize_t j
        for j in range(m):
            self._nn(<f64*> qa.data + j * self.dim, &best_d2, &best_i)
            dist[j] = best_d2 ** 0.5
            idx[j] = best_i
        return dist, idx

    cdef Py_ssize_t _ball(self, const f64* q, f64 r2, i64* out) noexcept nogil:
        cdef i32* stack = &self.stack_buf[0]
        cdef Py_ssize_t top = 0
        cdef Py_ssize_t count = 0
        cdef i32 node
        cdef Py_ssize_t k
        cdef f64 d2, plane
        cdef i64 idx
        stack[top] = 0
        top += 1
        while top > 0:
            top -= 1
            node = stack[top]
            if self.split_dim[node] < 0:
                for k in range(self.start[node], self.end[node]):
                    idx = self.perm[k]
                    d2 = _dist2(self.pts, idx, q, self.dim)
                    if d2 <= r2:
                        out[count] = idx
                        count += 1
                continue
            plane = q[self.split_dim[node]] - self.split_val[node]
            if plane <= 0.0:
                stack[top] = self.left[node]
                top += 1
                if plane * plane <= r2:
                    stack[top] = self.right[node]
                    top += 1
            else:
                stack[top] = self.right[node]
                top += 1
                if plane * plane <= r2:
                    stack[top] = self.left[node]
                    top += 1
        return count

    def query_ball(self, q, double r):
        """Sorted indices of points within distance r (inclusive)."""
        cdef cnp.ndarray[f64, ndim=1] qa = np.ascontiguousarray(q, dtype=np.float64)
        cdef cnp.ndarray[i64, ndim=1] buf = np.empty(self.n, dtype=np.int64)
        cdef Py_ssize_t count = self._ball(<f64*> qa.data, r * r, <i64*> buf.data)
        out = buf[:count].copy()
        out.sort()
        return out

    def near_members_batch(self, qs, double eps):
        """For each query: min distance and indices within min+eps (sorted)."""
        cdef cnp.ndarray[f64, ndim=2] qa = np.ascontiguousarray(np.atleast_2d(qs), dtype=np.float64)
        cdef Py_ssize_t m = qa.shape[0]
        cdef cnp.ndarray[f64, ndim=1] dist = np.empty(m, dtype=np.float64)
        cdef cnp.ndarray[i64, ndim=1] indptr = np.zeros(m + 1, dtype=np.int64)
        cdef cnp.ndarray[i64, ndim=1] buf = np.empty(self.n, dtype=np.int64)
        cdef list rows = []
        cdef f64 best_d2, dmin, cut, cut2
        cdef i64 best_i
        cdef Py_ssize_t j, count
        for j in range(m):
            self._nn(<f64*> qa.data + j * self.dim, &best_d2, &best_i)
            dmin = best_d2 ** 0.5
            dist[j] = dmin
            cut = dmin + eps
            cut2 = cut * cut
            if cut2 < best_d2:  # never round the nearest point out of its ball
                cut2 = best_d2
            count = self._ball(<f64*> qa.data + j * self.dim, cut2, <i64*> buf.data)
            row = buf[:count].copy()
            row.sort()
            rows.append(row)
            indptr[j + 1] = count
        np.cumsum(indptr, out=indptr)
        members = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
        return dist, indptr, members


def radius_pairs(points, double r):
    """Symmetric CSR adjacency of all pairs within distance r (no self loops)."""
    cdef KDTree tree = KDTree(points)
    cdef cnp.ndarray[f64, ndim=2] pts = tree.points_arr
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t dim = pts.shape[1]
    cdef cnp.ndarray[i64, ndim=1] buf = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] indptr = np.zeros(n + 1, dtype=np.int64)
    cdef list rows = []
    cdef list wrows = []
    cdef Py_ssize_t i, count
    cdef f64 r2 = r * r
    for i in range(n):
        count = tree._ball(<f64*> pts.data + i * dim, r2, <i64*> buf.data)
        row = buf[:count].copy()
        row = row[row != i]
        row.sort()
        diff = pts[row] - pts[i]
        w = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        rows.append(row)
        wrows.append(w)
        indptr[i + 1] = len(row)
    np.cumsum(indptr, out=indptr)
    indices = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    weights = np.concatenate(wrows) if wrows else np.empty(0, dtype=np.float64)
    return indptr, indices, weights


def linkage_components(points, double link):
    """Single-linkage component labels of a small point set at a link radius."""
    cdef cnp.ndarray[f64, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t dim = pts.shape[1]
    cdef cnp.ndarray[i64, ndim=1] labels = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] stack = np.empty(n, dtype=np.int64)
    cdef f64 link2 = link * link
    cdef Py_ssize_t top, comp = 0
    cdef Py_ssize_t s, u, v, k
    cdef f64 acc, diff
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = comp
        stack[0] = s
        top = 1
        while top > 0:
            top -= 1
            u = stack[top]
            for v in range(n):
                if labels[v] >= 0:
                    continue
                acc = 0.0
                for k in range(dim):
                    diff = pts[u, k] - pts[v, k]
                    acc += diff * diff
                if acc <= link2:
                    labels[v] = comp
                    stack[top] = v
                    top += 1
        comp += 1
    return labels


def connected_components(indptr, indices):
    """Component labels (0-based, in first-visit order) of a CSR graph."""
    cdef cnp.ndarray[i64, ndim=1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] ind = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    cdef cnp.ndarray[i64, ndim=1] labels = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] stack = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t top, comp = 0
    cdef Py_ssize_t s, u, v, k
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = comp
        stack[0] = s
        top = 1
        while top > 0:
            top -= 1
            u = stack[top]
            for k in range(ip[u], ip[u + 1]):
                v = ind[k]
                if labels[v] < 0:
                    labels[v] = comp
                    stack[top] = v
                    top += 1
        comp += 1
    return labels


def dijkstra(indptr, indices, weights, source, targets=None):
    """Single-source shortest paths on a CSR graph; see the pure backend."""
    cdef cnp.ndarray[i64, ndim=1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] ind = np.ascontiguousarray(indices, dtype=np.int64)
    cdef cnp.ndarray[f64, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    cdef cnp.ndarray[f64, ndim=1] dist = np.full(n, np.inf, dtype=np.float64)
    cdef cnp.ndarray[i64, ndim=1] parent = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] done = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] want
    cdef Py_ssize_t n_want = 0
    if targets is not None:
        want = np.zeros(n, dtype=np.uint8)
        tgt = np.unique(np.asarray(targets, dtype=np.int64).ravel())
        for t in tgt:
            if not want[t]:
                want[t] = 1
                n_want += 1
    else:
        want = np.zeros(0, dtype=np.uint8)

    # binary heap with lazy deletion
    cdef Py_ssize_t cap = max(64, 2 * n)
    cdef cnp.ndarray[f64, ndim=1] hkey = np.empty(cap, dtype=np.float64)
    cdef cnp.ndarray[i64, ndim=1] hnode = np.empty(cap, dtype=np.int64)
    cdef Py_ssize_t size = 0
    cdef Py_ssize_t src = int(source)
    cdef f64 d, nd
    cdef Py_ssize_t u, v, k, child, pos

    dist[src] = 0.0
    hkey[0] = 0.0
    hnode[0] = src
    size = 1
    while size > 0:
        d = hkey[0]
        u = hnode[0]
        size -= 1
        hkey[0] = hkey[size]
        hnode[0] = hnode[size]
        pos = 0
        while True:
            child = 2 * pos + 1
            if child >= size:
                break
            if child + 1 < size and (hkey[child + 1] < hkey[child] or
                                     (hkey[child + 1] == hkey[child] and hnode[child + 1] < hnode[child])):
                child += 1
            if hkey[child] < hkey[pos] or (hkey[child] == hkey[pos] and hnode[child] < hnode[pos]):
                hkey[pos], hkey[child] = hkey[child], hkey[pos]
                hnode[pos], hnode[child] = hnode[child], hnode[pos]
                pos = child
            else:
                break
        if done[u]:
            continue
        done[u] = 1
        if n_want > 0 and want[u]:
            n_want -= 1
            if n_want == 0:
                break
        for k in range(ip[u], ip[u + 1]):
            v = ind[k]
            nd = d + w[k]
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                if size >= cap:
                    cap *= 2
                    hkey = np.resize(hkey, cap)
                    hnode = np.resize(hnode, cap)
                hkey[size] = nd
                hnode[size] = v
                pos = size
                size += 1
                while pos > 0:
                    child = (pos - 1) // 2
                    if hkey[pos] < hkey[child] or (hkey[pos] == hkey[child] and hnode[pos] < hnode[child]):
                        hkey[pos], hkey[child] = hkey[child], hkey[pos]
                        hnode[pos], hnode[child] = hnode[child], hnode[pos]
                        pos = child
                    else:
                        break
    return dist, parent
