"""Distance function, closest-point multifunction and gradient queries.

All queries run against a SpatialIndex: an exact nearest-neighbor structure
over a SampleCloud.  Discretization turns the closest-point multifunction
into an ε-near-set; "unique closest point" means the near-set spread stays
below the medial threshold λ.  Defaults tie both to the sampling resolution
(ε = 2·fill, λ = 10·fill).

The index is immutable after build and all queries are pure, so concurrent
readers need no synchronization.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._util import diameter, lexsort_rows
from .errors import (
    EmptyCloudError,
    MedialCrossingError,
    MedialPointError,
    UndefinedGradientError,
)
from .shapes import SampleCloud, Shape

# absolute floor keeping ε/λ sensible for exact clouds with fill 0
_THRESHOLD_FLOOR = 1e-12


@dataclass(frozen=True)
class NearSet:
    """ε-relaxed closest-point set: all cloud points within distance+ε."""

    distance: float
    epsilon: float
    members: np.ndarray  # (k, n), lexicographic row order
    spread: float

    def __len__(self) -> int:
        return len(self.members)


class SpatialIndex:
    """Exact nearest-neighbor index over one sample cloud."""

    def __init__(self, cloud: SampleCloud):
        if len(cloud.points) == 0:
            raise EmptyCloudError("cannot index an empty cloud")
        self.cloud = cloud
        self.points = np.ascontiguousarray(cloud.points, dtype=np.float64)
        self.tree = _kernels.KDTree(self.points)
        self.bounds = (self.points.min(axis=0), self.points.max(axis=0))
        diag = float(np.sqrt(np.sum((self.bounds[1] - self.bounds[0]) ** 2)))
        self.scale = diag if diag > 0 else 1.0
        self.fill = float(cloud.fill_distance)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def default_epsilon(self) -> float:
        return max(2.0 * self.fill, _THRESHOLD_FLOOR * self.scale)

    def default_lambda(self) -> float:
        return max(10.0 * self.fill, 10.0 * _THRESHOLD_FLOOR * self.scale)


def build_index(cloud: SampleCloud) -> SpatialIndex:
    """Build the exact spatial index (deterministic for a given cloud)."""
    return SpatialIndex(cloud)


def distance(index: SpatialIndex, a) -> float:
    """Euclidean distance from a to the cloud; 0 iff a is a cloud point."""
    return index.tree.query_one(np.asarray(a, dtype=np.float64))[0]


def distance_many(index: SpatialIndex, pts) -> np.ndarray:
    return index.tree.query_many(np.asarray(pts, dtype=np.float64))[0]


def nearest_point(index: SpatialIndex, a) -> tuple[float, np.ndarray]:
    """Nearest cloud point; exact ties resolved lexicographically."""
    a = np.asarray(a, dtype=np.float64)
    d, i = index.tree.query_one(a)
    ties = index.tree.query_ball(a, d * (1.0 + 1e-12) + 1e-300)
    if len(ties) > 1:
        pts = index.points[ties]
        return d, pts[lexsort_rows(pts)[0]].copy()
    return d, index.points[i].copy()


def near_set(index: SpatialIndex, a, epsilon: float | None = None) -> NearSet:
    """All cloud points within distance(a)+ε, lexicographically ordered."""
    a = np.asarray(a, dtype=np.float64)
    eps = index.default_epsilon() if epsilon is None else float(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be >= 0")
    dist, indptr, idx = index.tree.near_members_batch(a[None, :], eps)
    members = index.points[idx]
    members = members[lexsort_rows(members)]
    spread = diameter(members)[0] if len(members) > 1 else 0.0
    return NearSet(float(dist[0]), eps, members, spread)


def cluster_centroid(index: SpatialIndex, a, epsilon: float | None = None) -> np.ndarray:
    """Centroid of the ε-near-set (the smoothed closest-point representative)."""
    ns = near_set(index, a, epsilon)
    return weighted_centroid(ns.members, np.asarray(a, dtype=np.float64), ns.distance, ns.epsilon)


def weighted_centroid(members: np.ndarray, a: np.ndarray, d: float, eps: float) -> np.ndarray:
    """Tapered centroid of an ε-cluster.

    Members are weighted by 1 - ((dist - d)/ε)^2 so points entering or
    leaving at the ε edge carry weight ~0; without the taper the centroid
    jumps by O(spacing) at every membership event, which dominates
    difference quotients taken at the 4*fill pair floor.
    """
    if len(members) == 1 or eps <= 0:
        return members.mean(axis=0)
    dist = np.sqrt(np.sum((members - a) ** 2, axis=1))
    w = 1.0 - ((dist - d) / eps) ** 2
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total <= 0:
        return members.mean(axis=0)
    return (members * w[:, None]).sum(axis=0) / total


def grad_distance(index: SpatialIndex, a, epsilon: float | None = None, lam: float | None = None) -> np.ndarray:
    """Distance-field gradient (a - m(a)) / d(a) at a non-medial off-set point.

    The representative m(a) is the exact nearest cloud point, which makes the
    unit-norm identity hold to machine precision against the discrete
    distance field.
    """
    from .medial import is_medial  # local import to avoid a module cycle

    a = np.asarray(a, dtype=np.float64)
    eps = index.default_epsilon() if epsilon is None else float(epsilon)
    d, rep = nearest_point(index, a)
    if d <= max(2.0 * eps, _THRESHOLD_FLOOR * index.scale):
        raise UndefinedGradientError(
            f"gradient undefined on or too close to the set (d={d:.3g})"
        )
    flag, spread, _ = is_medial(index, a, eps, lam)
    if flag:
        raise MedialPointError(
            f"point flagged medial (near-set spread {spread:.3g}); gradient undefined"
        )
    return (a - rep) / d


def jacobian_along_line(
    shape_or_index,
    line: tuple,
    t: float,
    h: float,
    epsilon: float | None = None,
    lam: float | None = None,
) -> np.ndarray:
    """Central finite difference of the closest-point map along a line.

    ``line`` is (base_point, direction); the direction is normalized.  With a
    Shape the exact nearest-point map is differentiated; with a SpatialIndex
    the nearest-sample map is used.  A medial point inside the [t-h, t+h]
    stencil raises MedialCrossingError.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    base = np.asarray(line[0], dtype=np.float64)
    direction = np.asarray(line[1], dtype=np.float64)
    direction = direction / np.sqrt(np.sum(direction**2))
    xs = [base + (t + s) * direction for s in (-h, 0.0, h)]

    if isinstance(shape_or_index, Shape):
        reps = []
        for x in xs:
            en = shape_or_index.exact_nearest(x)
            if en.continuum or len(en.members) > 1:
                raise MedialCrossingError(
                    "nearest point not unique inside the stencil", point=x
                )
            reps.append(en.members[0])
        return (reps[2] - reps[0]) / (2.0 * h)

    index: SpatialIndex = shape_or_index
    from .medial import is_medial

    reps = []
    for x in xs:
        flag, _, _ = is_medial(index, x, epsilon, lam)
        if flag:
            raise MedialCrossingError("medial point inside the stencil", point=x)
        reps.append(nearest_point(index, x)[1])
    return (reps[2] - reps[0]) / (2.0 * h)


@dataclass
class QueryTrace:
    """Collects near-set query results for CSV export."""

    rows: list = field(default_factory=list)

    def record(self, a, ns: NearSet) -> None:
        a = np.asarray(a, dtype=np.float64)
        self.rows.append((a.copy(), ns.distance, ns.spread, len(ns)))

    def write_csv(self, path) -> None:
        if not self.rows:
            raise ValueError("no queries recorded")
        dim = len(self.rows[0][0])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(dim)] + ["distance", "spread", "member_count"])
            for a, d, s, k in self.rows:
                w.writerow([repr(float(v)) for v in a] + [repr(float(d)), repr(float(s)), k])
