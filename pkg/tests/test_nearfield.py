"""Distance, near-set, gradient and line-jacobian queries."""

import math

import numpy as np
import pytest

from medax.errors import MedialCrossingError, MedialPointError, UndefinedGradientError
from medax.nearfield import (
    QueryTrace,
    cluster_centroid,
    distance,
    grad_distance,
    jacobian_along_line,
    near_set,
    nearest_point,
)


def test_distance_examples(circle_index, helix_index, cone_index):
    fill_h = helix_index.cloud.fill_distance
    assert distance(helix_index, (0.0, 0.0, 1.0)) == pytest.approx(1.0, abs=fill_h)
    assert distance(circle_index, (0.0, 0.0)) == pytest.approx(1.0, abs=1e-6)
    fill_c = cone_index.cloud.fill_distance
    assert distance(cone_index, (0.0, 0.0, 1.0)) == pytest.approx(
        1.0 / math.sqrt(2.0), abs=fill_c
    )


def test_distance_zero_on_cloud_points(circle_index):
    for p in circle_index.points[::321]:
        assert distance(circle_index, p) == 0.0


def test_distance_is_one_lipschitz(circle_index):
    rng = np.random.default_rng(0)
    a = rng.uniform(-2, 2, size=(200, 2))
    b = rng.uniform(-2, 2, size=(200, 2))
    for p, q in zip(a, b):
        lhs = abs(distance(circle_index, p) - distance(circle_index, q))
        assert lhs <= np.sqrt(np.sum((p - q) ** 2)) + 1e-12


def test_near_set_two_points(two_points_index):
    ns = near_set(two_points_index, (0.0, 0.5), epsilon=0.0)
    assert len(ns) == 2
    assert ns.spread == pytest.approx(2.0)
    assert np.allclose(ns.members, [[-1.0, 0.0], [1.0, 0.0]])  # lexicographic


def test_near_set_circle_width_matches_geometry(circle_index):
    # derived oracle: members are the arc cos(theta) >= 1 - eps(1-g)/g - eps^2/2g
    # for a query at radius g inside the unit circle
    fill = circle_index.cloud.fill_distance
    eps = fill
    g = 0.5
    ns = near_set(circle_index, (g, 0.0), epsilon=eps)
    theta = math.acos(1.0 - eps * (1.0 - g) / g - eps**2 / (2.0 * g))
    predicted = 2.0 * math.sin(theta)
    assert ns.spread == pytest.approx(predicted, rel=0.25)
    # all members hug the radial foot (1, 0)
    assert np.all(np.sqrt(np.sum((ns.members - [1.0, 0.0]) ** 2, axis=1)) < 0.2)


def test_near_set_cone_ring(cone_index):
    # derived oracle: members are the band |rho - 1/2| <= sqrt((2 d eps + eps^2)/2)
    # around the minimizer ring, so the spread is the band's outer diameter
    fill = cone_index.cloud.fill_distance
    d = 1.0 / math.sqrt(2.0)
    eps = 2 * fill
    ns = near_set(cone_index, (0.0, 0.0, 1.0), epsilon=eps)
    halfwidth = math.sqrt((2 * d * eps + eps**2) / 2.0)
    assert ns.spread == pytest.approx(2 * (0.5 + halfwidth), rel=0.1)
    # with a tight slack the spread approaches the ring diameter 1
    ns_tight = near_set(cone_index, (0.0, 0.0, 1.0), epsilon=1e-3)
    assert ns_tight.spread == pytest.approx(1.0, abs=0.1)


def test_near_set_members_sorted_and_deterministic(circle_index):
    a = near_set(circle_index, (0.3, 0.4), epsilon=0.01)
    b = near_set(circle_index, (0.3, 0.4), epsilon=0.01)
    assert np.array_equal(a.members, b.members)
    order = np.lexsort((a.members[:, 1], a.members[:, 0]))
    assert np.array_equal(order, np.arange(len(a.members)))


def test_near_set_spread_zero_for_single(circle_index):
    ns = near_set(circle_index, (2.0, 0.0), epsilon=0.0)
    assert len(ns) == 1
    assert ns.spread == 0.0


def test_grad_circle(circle_index):
    g = grad_distance(circle_index, (2.0, 0.0))
    assert np.allclose(g, [1.0, 0.0], atol=2 * circle_index.cloud.fill_distance)
    assert np.linalg.norm(g) == pytest.approx(1.0, abs=1e-12)


def test_grad_helix_example(helix_index):
    g = grad_distance(helix_index, (0.0, 0.0, 1.0))
    want = np.asarray([-math.cos(1.0), -math.sin(1.0), 0.0])
    assert np.allclose(g, want, atol=5e-3)
    assert np.linalg.norm(g) == pytest.approx(1.0, abs=1e-12)


def test_grad_errors(two_points_index, circle_index):
    with pytest.raises(MedialPointError):
        grad_distance(two_points_index, (0.0, 0.5))
    with pytest.raises(UndefinedGradientError):
        grad_distance(circle_index, circle_index.points[17])


def test_grad_matches_finite_differences(circle_index):
    h = 1e-5
    rng = np.random.default_rng(2)
    checked = 0
    for q in rng.uniform(-3, 3, size=(200, 2)):
        d = distance(circle_index, q)
        if d < 0.2 or abs(np.hypot(*q) - 0.0) < 0.3:
            continue
        try:
            g = grad_distance(circle_index, q)
        except (MedialPointError, UndefinedGradientError):
            continue
        fd = np.zeros(2)
        idx_ref = None
        stable = True
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            dp, ip = circle_index.tree.query_one(q + e)
            dm, im = circle_index.tree.query_one(q - e)
            if idx_ref is None:
                idx_ref = ip
            stable &= ip == im == idx_ref
            fd[i] = (dp - dm) / (2 * h)
        if not stable:
            continue
        assert np.linalg.norm(g - fd) / np.linalg.norm(fd) < 1e-6
        checked += 1
    assert checked > 50


def test_jacobian_shape_backed_helix(half_helix_shape):
    # the blow-up law |J| = sqrt(1 + 1/(4t)) along the axis
    for t in (1.0, 0.25, 0.04, 0.01):
        J = jacobian_along_line(half_helix_shape, ((0, 0, 0), (0, 0, 1)), t, min(1e-4, t * 1e-2))
        want = math.sqrt(1.0 + 1.0 / (4.0 * t))
        assert np.linalg.norm(J) == pytest.approx(want, rel=5e-3)
    J1 = jacobian_along_line(half_helix_shape, ((0, 0, 0), (0, 0, 1)), 1.0, 1e-4)
    assert np.allclose(J1, [-math.sin(1.0) / 2, math.cos(1.0) / 2, 1.0], atol=1e-4)


def test_jacobian_index_backed_circle(circle_index):
    # m is constant along a ray through the center: nearest-sample map too
    J = jacobian_along_line(circle_index, ((0, 0), (1, 0)), 2.0, 1e-4)
    assert np.allclose(J, [0.0, 0.0], atol=1e-12)


def test_jacobian_medial_crossing(full_helix_shape, two_points_index):
    with pytest.raises(MedialCrossingError):
        jacobian_along_line(full_helix_shape, ((0, 0, 0), (0, 0, 1)), 1.0, 1e-4)
    with pytest.raises(MedialCrossingError):
        jacobian_along_line(two_points_index, ((0, -1), (0, 1)), 1.0, 1e-3)


def test_nearest_point_lexicographic_tie(two_points_index):
    d, rep = nearest_point(two_points_index, (0.0, 0.0))
    assert d == pytest.approx(1.0)
    assert np.allclose(rep, [-1.0, 0.0])  # lexicographically smaller of the tie


def test_cluster_centroid_near_projection(circle_index):
    c = cluster_centroid(circle_index, (0.5, 0.0))
    assert np.allclose(c, [1.0, 0.0], atol=5e-3)


def test_query_trace_csv(tmp_path, circle_index):
    trace = QueryTrace()
    for q in [(0.5, 0.0), (2.0, 1.0)]:
        trace.record(q, near_set(circle_index, q))
    out = tmp_path / "trace.csv"
    trace.write_csv(out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "x0,x1,distance,spread,member_count"
    assert len(lines) == 3
