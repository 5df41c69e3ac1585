"""Inner (geodesic) metric estimation on ε-neighborhood graphs.

Graph shortest paths over a sample cloud estimate the inner metric from
above; the projection of a straight segment under the closest-point map
gives an independent upper bound for the inner distance between the images
of its endpoints.  The artifact never claims the exact inner metric, only
the bracket [Euclidean, graph length].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._util import lexsort_rows
from .errors import GraphRadiusError, MedialCrossingError, NoPathError, SnapError
from .nearfield import SpatialIndex, weighted_centroid
from .shapes import SampleCloud

_CONNECT_FLOOR_FACTOR = 4.0


@dataclass(frozen=True)
class PathEstimate:
    """A polyline path with its length; kind names the estimator."""

    length: float
    vertices: np.ndarray  # (k, n)
    kind: str  # "graph_geodesic" | "projection_path"
    endpoints: tuple

    def polyline_length(self) -> float:
        if len(self.vertices) < 2:
            return 0.0
        return float(np.sum(np.sqrt(np.sum(np.diff(self.vertices, axis=0) ** 2, axis=1))))

    def write_csv(self, path) -> None:
        dim = self.vertices.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(dim)])
            for v in self.vertices:
                w.writerow([repr(float(x)) for x in v])


class GeodesicGraph:
    """ε-neighborhood graph over a cloud with Euclidean edge weights."""

    def __init__(self, cloud: SampleCloud, connect_radius: float):
        fill = float(cloud.fill_distance)
        floor = _CONNECT_FLOOR_FACTOR * fill
        if connect_radius <= 0:
            raise GraphRadiusError("connect_radius must be positive")
        if fill > 0 and connect_radius < floor:
            raise GraphRadiusError(
                f"connect_radius {connect_radius:.3g} below the enforced floor "
                f"4*fill = {floor:.3g}"
            )
        self.cloud = cloud
        self.points = np.ascontiguousarray(cloud.points, dtype=np.float64)
        self.connect_radius = float(connect_radius)
        self.indptr, self.indices, self.weights = _kernels.radius_pairs(
            self.points, self.connect_radius
        )
        self.tree = _kernels.KDTree(self.points)
        self.labels = self._components()
        self.component_count = int(self.labels.max()) + 1 if len(self.labels) else 0

    def _components(self) -> np.ndarray:
        n = len(self.points)
        labels = np.full(n, -1, dtype=np.int64)
        comp = 0
        for s in range(n):
            if labels[s] >= 0:
                continue
            stack = [s]
            labels[s] = comp
            while stack:
                u = stack.pop()
                for k in range(self.indptr[u], self.indptr[u + 1]):
                    v = int(self.indices[k])
                    if labels[v] < 0:
                        labels[v] = comp
                        stack.append(v)
            comp += 1
        return labels

    def snap(self, x, slack: float = 1.5) -> int:
        """Nearest cloud node; ties lexicographic; errors beyond slack*fill."""
        x = np.asarray(x, dtype=np.float64)
        d, i = self.tree.query_one(x)
        fill = self.cloud.fill_distance
        limit = max(slack * fill, 1e-9 * (1.0 + float(np.sqrt(np.sum(x**2)))))
        if fill > 0 and d > limit:
            raise SnapError(
                f"point at distance {d:.3g} from the cloud (fill {fill:.3g})"
            )
        ties = self.tree.query_ball(x, d * (1.0 + 1e-12) + 1e-300)
        if len(ties) > 1:
            pts = self.points[ties]
            return int(ties[lexsort_rows(pts)[0]])
        return int(i)


def build_geodesic_graph(cloud: SampleCloud, connect_radius: float) -> GeodesicGraph:
    """Build the ε-neighborhood graph (radius >= 4*fill enforced)."""
    return GeodesicGraph(cloud, connect_radius)


def shortest_path_lengths(graph: GeodesicGraph, source: int, targets=None) -> np.ndarray:
    """Graph distances from one node (to all nodes, or until targets settle)."""
    dist, _ = _kernels.dijkstra(
        graph.indptr, graph.indices, graph.weights, source, targets=targets
    )
    return dist


def inner_distance(graph: GeodesicGraph, x, y) -> PathEstimate:
    """Shortest-path estimate of the inner distance between two points.

    Endpoints snap to the nearest cloud nodes; different components raise
    NoPathError (the inner metric is undefined across components).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    sx, sy = graph.snap(x), graph.snap(y)
    if graph.labels[sx] != graph.labels[sy]:
        raise NoPathError("endpoints lie in different graph components")
    if sx == sy:
        return PathEstimate(0.0, graph.points[[sx]], "graph_geodesic", (x, y))
    dist, parent = _kernels.dijkstra(
        graph.indptr, graph.indices, graph.weights, sx, targets=[sy]
    )
    if not np.isfinite(dist[sy]):
        raise NoPathError("no path between the snapped endpoints")
    chain = [sy]
    while chain[-1] != sx:
        chain.append(int(parent[chain[-1]]))
    chain.reverse()
    return PathEstimate(float(dist[sy]), graph.points[chain], "graph_geodesic", (x, y))


def project_segment(
    index: SpatialIndex,
    x,
    y,
    steps: int = 200,
    lam: float | None = None,
    epsilon: float | None = None,
    max_steps: int = 6400,
    rel_tol: float = 1e-3,
) -> PathEstimate:
    """Image of the segment [x, y] under the closest-point map, as a polyline.

    Every sampled segment point must pass the medial detector; a flagged
    point raises MedialCrossingError naming the first offender.  The step
    count doubles until the polyline length settles to rel_tol.
    """
    from .medial import _flag_members

    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    eps = index.default_epsilon() if epsilon is None else float(epsilon)
    lam_v = index.default_lambda() if lam is None else float(lam)

    def polyline(n_steps: int) -> np.ndarray:
        ts = np.linspace(0.0, 1.0, n_steps + 1)
        pts = x[None, :] + ts[:, None] * (y - x)[None, :]
        dists, indptr, members = index.tree.near_members_batch(pts, eps)
        verts = np.empty_like(pts)
        for j in range(len(pts)):
            mem = index.points[members[indptr[j] : indptr[j + 1]]]
            flag, spread, _ = _flag_members(mem, float(dists[j]), eps, lam_v)
            if flag:
                raise MedialCrossingError(
                    f"segment point {pts[j].tolist()} flagged medial "
                    f"(spread {spread:.3g})",
                    point=pts[j].copy(),
                )
            verts[j] = weighted_centroid(mem, pts[j], float(dists[j]), eps)
        return verts

    if np.array_equal(x, y):
        verts = polyline(1)[:1]
        return PathEstimate(0.0, verts, "projection_path", (verts[0], verts[0]))

    n = max(int(steps), 1)
    verts = polyline(n)
    length = float(np.sum(np.sqrt(np.sum(np.diff(verts, axis=0) ** 2, axis=1))))
    while n < max_steps:
        n *= 2
        verts2 = polyline(n)
        length2 = float(np.sum(np.sqrt(np.sum(np.diff(verts2, axis=0) ** 2, axis=1))))
        settled = abs(length2 - length) <= rel_tol * max(length, 1e-300)
        verts, length = verts2, length2
        if settled:
            break
    return PathEstimate(length, verts, "projection_path", (verts[0], verts[-1]))
