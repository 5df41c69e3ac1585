"""Kernel backends: exactness against linear scan, cross-backend parity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medax._kernels import _pure

try:
    from medax._kernels import _core
except ImportError:
    _core = None

BACKENDS = [_pure] + ([_core] if _core is not None else [])


def brute_nn(points, q):
    d2 = np.sum((points - q) ** 2, axis=1)
    i = int(np.argmin(d2))
    return float(np.sqrt(d2[i])), i


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
def test_nn_matches_linear_scan(backend):
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(3000, 3))
    tree = backend.KDTree(pts)
    for q in rng.normal(size=(100, 3)) * 2:
        d, i = tree.query_one(q)
        d_ref, i_ref = brute_nn(pts, q)
        assert i == i_ref
        assert d == pytest.approx(d_ref, abs=1e-14)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
def test_ball_query_matches_linear_scan(backend):
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(2000, 2))
    tree = backend.KDTree(pts)
    for q in rng.normal(size=(50, 2)):
        r = rng.uniform(0.05, 0.6)
        got = tree.query_ball(q, r)
        want = np.nonzero(np.sum((pts - q) ** 2, axis=1) <= r * r)[0]
        assert np.array_equal(got, want)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
def test_near_members_batch_never_empty(backend):
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(500, 2))
    tree = backend.KDTree(pts)
    qs = rng.normal(size=(200, 2)) * 3
    dist, indptr, members = tree.near_members_batch(qs, 0.0)
    counts = np.diff(indptr)
    assert (counts >= 1).all()
    # each member block is sorted and contains the exact argmin
    for j in range(len(qs)):
        blk = members[indptr[j] : indptr[j + 1]]
        assert np.array_equal(blk, np.sort(blk))
        assert brute_nn(pts, qs[j])[1] in blk


@pytest.mark.skipif(_core is None, reason="compiled backend unavailable")
def test_backend_parity():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(4000, 3))
    qs = rng.normal(size=(300, 3)) * 1.5
    tp, tc = _pure.KDTree(pts), _core.KDTree(pts)
    dp, ip = tp.query_many(qs)
    dc, ic = tc.query_many(qs)
    assert np.array_equal(ip, ic)
    assert np.allclose(dp, dc, atol=1e-14, rtol=0)
    d1, p1, m1 = tp.near_members_batch(qs, 0.05)
    d2, p2, m2 = tc.near_members_batch(qs, 0.05)
    assert np.array_equal(p1, p2) and np.array_equal(m1, m2)
    ip1, ix1, w1 = _pure.radius_pairs(pts[:800], 0.3)
    ip2, ix2, w2 = _core.radius_pairs(pts[:800], 0.3)
    assert np.array_equal(ip1, ip2) and np.array_equal(ix1, ix2)
    assert np.allclose(w1, w2, atol=1e-15)
    da, _ = _pure.dijkstra(ip1, ix1, w1, 0)
    db, _ = _core.dijkstra(ip2, ix2, w2, 0)
    assert np.allclose(da, db, equal_nan=True)
    la = _pure.linkage_components(pts[:200], 0.4)
    lb = _core.linkage_components(pts[:200], 0.4)
    assert np.array_equal(la, lb)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
def test_dijkstra_vs_bellman_ford(backend):
    rng = np.random.default_rng(4)
    pts = rng.uniform(size=(60, 2))
    indptr, indices, weights = backend.radius_pairs(pts, 0.35)
    dist, parent = backend.dijkstra(indptr, indices, weights, 0)
    # Bellman-Ford reference
    n = len(pts)
    ref = np.full(n, np.inf)
    ref[0] = 0.0
    for _ in range(n):
        for u in range(n):
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if ref[u] + weights[k] < ref[v]:
                    ref[v] = ref[u] + weights[k]
    assert np.allclose(dist, ref, equal_nan=True, atol=1e-12)
    # parents reconstruct the distances
    for v in range(n):
        if np.isfinite(dist[v]) and v != 0:
            length, node = 0.0, v
            while node != 0:
                prev = parent[node]
                length += float(np.sqrt(np.sum((pts[node] - pts[prev]) ** 2)))
                node = prev
            assert length == pytest.approx(dist[v], rel=1e-12)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
def test_dijkstra_targets_early_stop(backend):
    rng = np.random.default_rng(5)
    pts = rng.uniform(size=(400, 2))
    indptr, indices, weights = backend.radius_pairs(pts, 0.15)
    full, _ = backend.dijkstra(indptr, indices, weights, 7)
    part, _ = backend.dijkstra(indptr, indices, weights, 7, targets=[3, 11, 200])
    for t in (3, 11, 200):
        assert part[t] == pytest.approx(full[t], rel=0, abs=0)


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(5, 120),
    dim=st.integers(1, 4),
    seed=st.integers(0, 2**31 - 1),
)
def test_property_nn_exact(n, dim, seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, dim))
    qs = rng.normal(size=(10, dim)) * 1.5
    for backend in BACKENDS:
        tree = backend.KDTree(pts)
        for q in qs:
            d, i = tree.query_one(q)
            d_ref, _ = brute_nn(pts, q)
            assert d == pytest.approx(d_ref, abs=1e-12)


def test_empty_points_rejected():
    for backend in BACKENDS:
        with pytest.raises(ValueError):
            backend.KDTree(np.empty((0, 2)))
