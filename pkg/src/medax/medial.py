"""Medial-axis detection: near-set spread on grids and jump bisection.

A point is flagged medial when its ε-near-set shows genuine multivaluedness.
Two regimes are told apart:

* split: the near-set separates into >= 2 single-linkage clusters whose gap
  exceeds max(3ε, λ) — the discrete version of a closest-point jump;
* continuum: a single connected near-set whose diameter exceeds
  max(λ, 1.3·(d+ε), 3·sqrt((2d+ε)ε)) — a ring/arc of minimizers (circle
  center, cone axis).  The 1.3 factor sits below the sqrt(2) ratio a
  90°-subtending minimizer set attains, and the sqrt((2d+ε)ε) floor is the
  width an ε-slack near-set picks up on a smooth curve, so on-set smear never
  flags.

Either way a flag implies spread >= λ.  Points at distance d from the set are
detectable only when d is a few multiples of ε; scans that need to localize
medial structure near the set must be run against clouds whose fill scales
with the feature size (see probes.verify_theorem).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._util import diameter, single_linkage_split
from .errors import DoubleJumpError, MedialPointError, NoJumpError
from .nearfield import SpatialIndex, near_set, nearest_point

# cap on the O(k^2) linkage; larger near-sets are deterministically strided
_LINKAGE_CAP = 2048

_CONTINUUM_RATIO = 1.3
_ONSET_FLOOR = 3.0
_SPLIT_LINK = 3.0


def _flag_members(members: np.ndarray, d: float, eps: float, lam: float):
    """Core detector on a raw member array. Returns (flag, spread, witnesses)."""
    if len(members) < 2:
        w = members[0] if len(members) else None
        return False, 0.0, (w, w)
    spread, wi, wj = diameter(members)
    witnesses = (members[wi].copy(), members[wj].copy())
    if spread < lam:
        return False, spread, witnesses
    onset_floor = _ONSET_FLOOR * math.sqrt(max((2.0 * d + eps) * eps, 0.0))
    if spread >= max(lam, _CONTINUUM_RATIO * (d + eps), onset_floor):
        return True, spread, witnesses
    pts = members
    if len(pts) > _LINKAGE_CAP:
        stride = int(math.ceil(len(pts) / _LINKAGE_CAP))
        pts = pts[::stride]
    n_clusters, gap = single_linkage_split(pts, _SPLIT_LINK * eps)
    if n_clusters >= 2 and gap >= max(_SPLIT_LINK * eps, lam):
        return True, spread, witnesses
    return False, spread, witnesses


def is_medial(index: SpatialIndex, a, epsilon: float | None = None, lam: float | None = None):
    """Flag a point whose near-set shows more than one closest point.

    Returns (flag, spread, witnesses) with witnesses the farthest member pair.
    """
    eps = index.default_epsilon() if epsilon is None else float(epsilon)
    lam_v = index.default_lambda() if lam is None else float(lam)
    ns = near_set(index, a, eps)
    return _flag_members(ns.members, ns.distance, eps, lam_v)


@dataclass(frozen=True)
class MedialSample:
    """One detected medial point with its witness pair."""

    location: np.ndarray
    spread: float
    witnesses: tuple
    method: str  # "grid_spread" | "jump_bisection"
    iterations: int = 0


@dataclass
class MedialScanReport:
    """Grid scan result: flagged nodes plus per-node diagnostics."""

    grid_spec: dict
    samples: list
    min_distance_to: dict
    nodes: np.ndarray = field(default=None, repr=False)
    distances: np.ndarray = field(default=None, repr=False)
    spreads: np.ndarray = field(default=None, repr=False)
    flags: np.ndarray = field(default=None, repr=False)
    epsilon: float = 0.0
    lam: float = 0.0

    def flagged_locations(self) -> np.ndarray:
        if not self.samples:
            return np.empty((0, self.nodes.shape[1] if self.nodes is not None else 0))
        return np.stack([s.location for s in self.samples])

    def write_csv(self, path) -> None:
        dim = self.nodes.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(dim)] + ["distance", "spread", "flag"])
            for node, d, s, f in zip(self.nodes, self.distances, self.spreads, self.flags):
                w.writerow(
                    [repr(float(v)) for v in node]
                    + [repr(float(d)), repr(float(s)), int(f)]
                )


def grid_nodes(box, resolution) -> tuple[np.ndarray, tuple, float]:
    """Grid nodes over a box; returns (nodes, per-axis resolution, max step)."""
    lo = np.asarray(box[0], dtype=np.float64)
    hi = np.asarray(box[1], dtype=np.float64)
    dim = len(lo)
    if np.isscalar(resolution):
        res = (int(resolution),) * dim
    else:
        res = tuple(int(r) for r in resolution)
    if len(res) != dim or any(r < 2 for r in res):
        raise ValueError("resolution must be >= 2 per axis")
    axes = [np.linspace(lo[d], hi[d], res[d]) for d in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    step = max(
        (hi[d] - lo[d]) / (res[d] - 1) if res[d] > 1 else 0.0 for d in range(dim)
    )
    return nodes, res, float(step)


def scan_medial(
    index: SpatialIndex,
    box,
    resolution,
    epsilon: float | None = None,
    lam: float | None = None,
    probes: dict | None = None,
    edge_jumps: bool = False,
) -> MedialScanReport:
    """Evaluate the medial detector at every grid node and collect flags.

    ``probes`` maps names to points; the report records the distance from
    each probe to the nearest flagged node (None when nothing is flagged).
    With ``edge_jumps`` the sweep also bisects closest-point jumps along
    grid edges whose endpoints are unflagged: a thin medial sheet passing
    between nodes is then still localized (as jump_bisection samples).
    """
    eps = index.default_epsilon() if epsilon is None else float(epsilon)
    lam_v = index.default_lambda() if lam is None else float(lam)
    nodes, res, step = grid_nodes(box, resolution)
    if index.fill > 0 and step > 150.0 * index.fill and not edge_jumps:
        warnings.warn(
            f"grid step {step:.3g} is coarse against fill {index.fill:.3g}; "
            "thin medial structure may be missed",
            stacklevel=2,
        )
    dists, indptr, member_idx = index.tree.near_members_batch(nodes, eps)
    samples = []
    spreads = np.zeros(len(nodes))
    flags = np.zeros(len(nodes), dtype=bool)
    for j in range(len(nodes)):
        members = index.points[member_idx[indptr[j] : indptr[j + 1]]]
        flag, spread, witnesses = _flag_members(members, float(dists[j]), eps, lam_v)
        spreads[j] = spread
        flags[j] = flag
        if flag:
            samples.append(
                MedialSample(nodes[j].copy(), spread, witnesses, "grid_spread")
            )
    if edge_jumps:
        samples.extend(
            _edge_jump_samples(index, nodes, res, flags, step, eps, lam_v)
        )
    min_distance_to = {}
    if probes:
        flagged = (
            np.stack([s.location for s in samples]) if samples else None
        )
        for name, p in probes.items():
            if flagged is None:
                min_distance_to[name] = None
            else:
                p = np.asarray(p, dtype=np.float64)
                min_distance_to[name] = float(
                    np.sqrt(np.sum((flagged - p) ** 2, axis=1)).min()
                )
    return MedialScanReport(
        grid_spec={"box": (box[0], box[1]), "resolution": res, "step": step},
        samples=samples,
        min_distance_to=min_distance_to,
        nodes=nodes,
        distances=dists,
        spreads=spreads,
        flags=flags,
        epsilon=eps,
        lam=lam_v,
    )


def _edge_jump_samples(index, nodes, res, flags, step, eps, lam_v) -> list:
    """Bisect closest-point jumps along unflagged axis-aligned grid edges."""
    dim = nodes.shape[1]
    _, nn_idx = index.tree.query_many(nodes)
    reps = index.points[nn_idx]
    shape = tuple(res)
    strides = []
    s = 1
    for d in reversed(range(dim)):
        strides.insert(0, s)
        s *= shape[d]
    samples = []
    n = len(nodes)
    for d in range(dim):
        stride = strides[d]
        idx = np.arange(n)
        coords = (idx // stride) % shape[d]
        a = idx[coords < shape[d] - 1]
        b = a + stride
        ok = ~flags[a] & ~flags[b]
        jump = np.sqrt(np.sum((reps[a] - reps[b]) ** 2, axis=1)) >= lam_v
        for ia, ib in zip(a[ok & jump], b[ok & jump]):
            try:
                samples.append(
                    refine_jump(
                        index,
                        nodes[ia],
                        nodes[ib],
                        tol=max(step * 1e-3, 1e-12),
                        lam=lam_v,
                        epsilon=eps,
                        assume_unflagged=True,
                    )
                )
            except (DoubleJumpError, NoJumpError, MedialPointError):
                continue
    return samples


def refine_jump(
    index: SpatialIndex,
    u,
    v,
    tol: float,
    lam: float | None = None,
    epsilon: float | None = None,
    assume_unflagged: bool = False,
) -> MedialSample:
    """Bisect a closest-point jump across [u, v] down to a tol-length bracket.

    Both endpoints must be non-medial and the nearest-point map must jump by
    at least λ across the segment.  A jump that dissolves while narrowing was
    continuous drift, not a discontinuity (NoJumpError).  When the midpoint
    projects to a third cluster the segment meets the medial set more than
    once and the caller must shorten it.  ``assume_unflagged`` skips the
    endpoint medial checks when the caller already ran the detector there.
    """
    lam_v = index.default_lambda() if lam is None else float(lam)
    u = np.asarray(u, dtype=np.float64).copy()
    v = np.asarray(v, dtype=np.float64).copy()
    if not assume_unflagged:
        for endpoint in (u, v):
            flag, spread, _ = is_medial(index, endpoint, epsilon, lam_v)
            if flag:
                raise MedialPointError(
                    f"endpoint {endpoint.tolist()} is flagged medial (spread {spread:.3g})"
                )
    rep_u = nearest_point(index, u)[1]
    rep_v = nearest_point(index, v)[1]
    jump = float(np.sqrt(np.sum((rep_u - rep_v) ** 2)))
    if jump < lam_v:
        raise NoJumpError("no closest-point jump across the segment")
    iterations = 0
    while float(np.sqrt(np.sum((u - v) ** 2))) > tol:
        w = 0.5 * (u + v)
        rep_w = nearest_point(index, w)[1]
        d_u = float(np.sqrt(np.sum((rep_w - rep_u) ** 2)))
        d_v = float(np.sqrt(np.sum((rep_w - rep_v) ** 2)))
        iterations += 1
        # m drifts continuously within each side, so "belongs to a side" is
        # relative: rep(w) far from BOTH current reps signals a third cluster
        # (multiple crossings), unless w sits on the medial set itself.
        cut = max(lam_v, 0.5 * jump)
        if d_u >= cut and d_v >= cut:
            flag, _, _ = is_medial(index, w, epsilon, lam_v)
            if not flag:
                raise DoubleJumpError(
                    "midpoint projects to a third cluster; segment crosses the "
                    "medial set more than once, shorten it"
                )
        if d_u <= d_v:
            u, rep_u = w, rep_w
        else:
            v, rep_v = w, rep_w
        jump = float(np.sqrt(np.sum((rep_u - rep_v) ** 2)))
        if jump < lam_v:
            raise NoJumpError("jump dissolved during bisection")
    return MedialSample(
        0.5 * (u + v),
        jump,
        (rep_u, rep_v),
        "jump_bisection",
        iterations=iterations,
    )
