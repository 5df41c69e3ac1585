"""Experiment harnesses: Lipschitz quotients, local normal-embedding
constants, the medial-approach dichotomy, and the witness-pair probe.

Quantities measured here are finite-scale surrogates.  Verdicts ("bounded",
"diverging") come from radius sweeps with resolution proportional to the
radius: a fixed-fill cloud cannot exhibit behavior below its own fill
distance, so sweeps resample the shape locally whenever an analytic shape
is available.  Raw constant sequences are always reported alongside the
verdict so a reader can audit the call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._util import derive_seed, rng_from_seed
from .errors import BallTooSmallError, NoPathError, RegionInvalidError
from .innermetric import (
    GeodesicGraph,
    build_geodesic_graph,
    inner_distance,
    project_segment,
    shortest_path_lengths,
)
from .medial import MedialScanReport, is_medial, scan_medial
from .nearfield import SpatialIndex, build_index, weighted_centroid
from .shapes import Shape

_PAIR_FLOOR_FACTOR = 4.0  # discard pairs closer than 4*fill


@dataclass(frozen=True)
class ProbeRegion:
    """A ball certified medial-free, with the constants feeding the bound.

    delta is half the estimated infimum of distance-to-medial over the
    region; sup_dist the estimated supremum of d(., X).
    """

    center: np.ndarray
    radius: float
    delta: float
    sup_dist: float


@dataclass
class LipschitzReport:
    region: ProbeRegion
    empirical_quotient: float
    paper_bound: float
    pair_count: int
    on_set_quotient: float
    seed: int = 0
    epsilon: float = 0.0
    fill_distance: float = 0.0

    def to_dict(self) -> dict:
        return {
            "region": {
                "center": self.region.center.tolist(),
                "radius": self.region.radius,
                "delta": self.region.delta,
                "sup_dist": self.region.sup_dist,
            },
            "empirical_quotient": self.empirical_quotient,
            "paper_bound": self.paper_bound,
            "pair_count": self.pair_count,
            "on_set_quotient": self.on_set_quotient,
            "seed": self.seed,
            "epsilon": self.epsilon,
            "fill_distance": self.fill_distance,
        }


@dataclass
class LNEReport:
    point: np.ndarray
    radii: list
    constants: list
    verdict: str  # bounded | diverging | inconclusive
    pair_floor: float = 0.0

    def to_dict(self) -> dict:
        return {
            "point": self.point.tolist(),
            "radii": list(self.radii),
            "constants": list(self.constants),
            "verdict": self.verdict,
            "pair_floor": self.pair_floor,
        }


@dataclass
class TheoremVerdict:
    point: np.ndarray
    lne_verdict: str
    medial_approach: bool
    consistent: bool
    radii: list = field(default_factory=list)
    constants: list = field(default_factory=list)
    medial_min_distances: list = field(default_factory=list)
    rectifiable_checks: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "point": self.point.tolist(),
            "lne_verdict": self.lne_verdict,
            "medial_approach": self.medial_approach,
            "consistent": self.consistent,
            "radii": list(self.radii),
            "constants": list(self.constants),
            "medial_min_distances": self.medial_min_distances,
            "rectifiable_checks": self.rectifiable_checks,
        }


@dataclass
class ConjectureTrace:
    medial_points: list
    witness_pairs: list
    ratios: list
    diverges: bool
    vacuous: bool = False

    def to_dict(self) -> dict:
        return {
            "medial_points": [p.tolist() for p in self.medial_points],
            "witness_pairs": [
                (a.tolist(), b.tolist()) for a, b in self.witness_pairs
            ],
            "ratios": list(self.ratios),
            "diverges": self.diverges,
            "vacuous": self.vacuous,
        }


# ---------------------------------------------------------------------------
# region certification and Lipschitz quotients


def certify_region(
    index: SpatialIndex,
    center,
    radius: float,
    scan: MedialScanReport | None = None,
    pad: float | None = None,
    resolution: int = 13,
) -> ProbeRegion:
    """Build a ProbeRegion from a medial scan.

    With ``scan`` given, delta comes from the distance between region grid
    nodes and the scan's flagged nodes (inflated by one grid step).  Without
    it, a local scan over the region box padded by ``pad`` (default 2*radius)
    is run; if nothing is flagged there, delta falls back to pad/2 (medial
    structure beyond the scanned box cannot be closer than that).
    """
    center = np.asarray(center, dtype=np.float64)
    pad = 2.0 * radius if pad is None else float(pad)
    if scan is None:
        lo = center - (radius + pad)
        hi = center + (radius + pad)
        scan = scan_medial(index, (lo, hi), resolution, edge_jumps=True)
    step = float(scan.grid_spec["step"])
    flagged = scan.flagged_locations()
    # nodes covering the region ball
    lo = center - radius
    hi = center + radius
    n_axis = max(5, resolution)
    axes = [np.linspace(lo[d], hi[d], n_axis) for d in range(len(center))]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    keep = np.sqrt(np.sum((nodes - center) ** 2, axis=1)) <= radius
    nodes = nodes[keep]
    if len(flagged):
        d_in_region = np.sqrt(
            np.sum((flagged - center) ** 2, axis=1)
        )
        if (d_in_region <= radius + step).any():
            raise RegionInvalidError(
                "region intersects detected medial samples"
            )
        dmin = np.inf
        for node in nodes:
            dmin = min(
                dmin, float(np.sqrt(np.sum((flagged - node) ** 2, axis=1)).min())
            )
        delta = 0.5 * max(dmin - step, 0.0)
    else:
        delta = 0.5 * pad
    if delta <= 0:
        raise RegionInvalidError("certified delta is not positive")
    d_nodes = index.tree.query_many(nodes)[0]
    sup_dist = float(d_nodes.max() + step)
    return ProbeRegion(center, float(radius), float(delta), sup_dist)


def _sample_ball(rng, center, radius, count):
    dim = len(center)
    out = np.empty((count, dim))
    got = 0
    while got < count:
        cand = rng.normal(size=(count, dim))
        norm = np.sqrt(np.sum(cand**2, axis=1))
        cand = cand / norm[:, None] * radius * rng.uniform(0, 1, size=count)[:, None] ** (1.0 / dim)
        take = min(count - got, len(cand))
        out[got : got + take] = center + cand[:take]
        got += take
    return out


def lipschitz_quotient(
    index: SpatialIndex,
    region: ProbeRegion,
    pair_count: int,
    seed: int,
    epsilon: float | None = None,
) -> LipschitzReport:
    """Empirical Lipschitz quotient of the closest-point map over a region.

    Pairs are uniform in the region ball with separations in
    [4*fill, region.delta); the map representative is the ε-cluster
    centroid.  The on-set quotient uses exact (ε=0) minimizer sets.
    """
    if region.delta <= 0:
        raise RegionInvalidError("region has nonpositive delta")
    eps = index.default_epsilon() if epsilon is None else float(epsilon)
    floor = _PAIR_FLOOR_FACTOR * index.fill
    cap = region.delta
    if floor >= cap:
        raise RegionInvalidError(
            f"pair floor 4*fill={floor:.3g} is not below delta={cap:.3g}; "
            "refine the cloud"
        )
    rng = rng_from_seed(seed)
    ps = np.empty((pair_count, len(region.center)))
    qs = np.empty_like(ps)
    got = 0
    while got < pair_count:
        p = _sample_ball(rng, region.center, region.radius, 1)[0]
        sep = rng.uniform(floor, cap)
        direction = rng.normal(size=len(p))
        direction /= np.sqrt(np.sum(direction**2))
        q = p + sep * direction
        if np.sqrt(np.sum((q - region.center) ** 2)) > region.radius:
            continue
        ps[got], qs[got] = p, q
        got += 1
    dist_p, indptr_p, mem_p = index.tree.near_members_batch(ps, eps)
    dist_q, indptr_q, mem_q = index.tree.near_members_batch(qs, eps)
    quotients = np.empty(pair_count)
    for j in range(pair_count):
        cp = weighted_centroid(
            index.points[mem_p[indptr_p[j] : indptr_p[j + 1]]], ps[j], dist_p[j], eps
        )
        cq = weighted_centroid(
            index.points[mem_q[indptr_q[j] : indptr_q[j + 1]]], qs[j], dist_q[j], eps
        )
        quotients[j] = np.sqrt(np.sum((cp - cq) ** 2)) / np.sqrt(
            np.sum((ps[j] - qs[j]) ** 2)
        )
    empirical = float(quotients.max())
    bound = 2.0 * (region.delta + region.sup_dist) / region.delta

    # on-set case: p is a cloud point, q arbitrary in the region
    n_on = pair_count
    p_idx = rng.integers(0, len(index.points), size=n_on)
    q_on = _sample_ball(rng, region.center, region.radius, n_on)
    on_q = 0.0
    d_q, indptr_e, mem_e = index.tree.near_members_batch(q_on, 0.0)
    for j in range(n_on):
        p = index.points[p_idx[j]]
        sep = float(np.sqrt(np.sum((p - q_on[j]) ** 2)))
        if sep < max(floor, 1e-12):
            continue
        xi = index.points[mem_e[indptr_e[j] : indptr_e[j + 1]]]
        far = float(np.sqrt(np.sum((xi - p) ** 2, axis=1)).max())
        on_q = max(on_q, far / sep)
    return LipschitzReport(
        region=region,
        empirical_quotient=empirical,
        paper_bound=float(bound),
        pair_count=pair_count,
        on_set_quotient=on_q,
        seed=seed,
        epsilon=eps,
        fill_distance=index.fill,
    )


# ---------------------------------------------------------------------------
# local normal-embedding constants


def local_lne_constant(
    graph: GeodesicGraph,
    index: SpatialIndex,
    p,
    radius: float,
    pair_count: int = 4096,
    seed: int = 0,
) -> float:
    """Max inner/Euclidean ratio over sampled point pairs in B(p, radius).

    Pairs come from Dijkstra sources crossed with every ball node: sources
    mix the nodes nearest p (where pinching lives), the ball boundary, and a
    uniform draw, so at least ``pair_count`` pairs are evaluated.  Pairs
    closer than 4*fill are discarded.
    """
    p = np.asarray(p, dtype=np.float64)
    ball = graph.tree.query_ball(p, radius)
    if len(ball) < 2:
        raise BallTooSmallError(
            f"ball of radius {radius:.3g} captures {len(ball)} cloud points"
        )
    pts = graph.points[ball]
    labels = graph.labels[ball]
    # restrict to the component containing the snapped center
    center_label = graph.labels[graph.snap(p)]
    sel = labels == center_label
    if sel.sum() < 2:
        raise BallTooSmallError("ball captures < 2 connected points")
    ball = ball[sel]
    pts = pts[sel]
    floor = _PAIR_FLOOR_FACTOR * graph.cloud.fill_distance
    d_to_p = np.sqrt(np.sum((pts - p) ** 2, axis=1))
    order = np.argsort(d_to_p, kind="stable")
    n_sources = max(4, min(len(ball), int(math.ceil(pair_count / len(ball)))))
    rng = rng_from_seed(seed)
    # sources cover every scale: nearest block, ball boundary, dyadic shells
    # in distance-to-p (pinching can live at any scale inside the ball), plus
    # a uniform draw
    chosen = list(order[:32]) + list(order[-8:])
    shell_hi = radius
    while shell_hi > max(floor, radius * 2.0**-24):
        shell_lo = 0.5 * shell_hi
        members = np.nonzero((d_to_p > shell_lo) & (d_to_p <= shell_hi))[0]
        if len(members):
            stride = max(1, len(members) // 4)
            chosen += list(members[::stride][:4])
        shell_hi = shell_lo
    if n_sources > 0:
        chosen += list(rng.integers(0, len(ball), size=n_sources))
    chosen = sorted(set(int(c) for c in chosen))
    best = 1.0
    for c in chosen:
        src = int(ball[c])
        dist = shortest_path_lengths(graph, src, targets=ball)
        dg = dist[ball]
        de = np.sqrt(np.sum((pts - pts[c]) ** 2, axis=1))
        ok = (de >= max(floor, 1e-300)) & np.isfinite(dg)
        if ok.any():
            best = max(best, float((dg[ok] / de[ok]).max()))
    return best


def estimate_lne_verdict(
    graph: GeodesicGraph | None,
    index: SpatialIndex | None,
    p,
    radii,
    pair_count: int = 4096,
    seed: int = 0,
    shape: Shape | None = None,
    local_count: int = 2500,
    connect_factor: float = 5.0,
) -> LNEReport:
    """Constant-per-radius sweep with a bounded/diverging/inconclusive call.

    With ``shape`` given the shape is resampled inside each ball at a fill
    proportional to the radius (scale-proportional resolution); otherwise the
    fixed graph is probed, which cannot resolve behavior below its fill.
    """
    p = np.asarray(p, dtype=np.float64)
    radii = [float(r) for r in radii]
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    constants = []
    floor = 0.0
    for k, r in enumerate(radii):
        if shape is not None:
            cloud = shape.sample_in_ball(p, 3.0 * r, local_count, derive_seed(seed, k))
            if len(cloud) < 2:
                constants.append(1.0)  # single-point ball: vacuously embedded
                continue
            g = build_geodesic_graph(cloud, connect_factor * max(cloud.fill_distance, 1e-300))
            idx = build_index(cloud)
            floor = _PAIR_FLOOR_FACTOR * cloud.fill_distance
            constants.append(
                local_lne_constant(g, idx, p, r, pair_count, derive_seed(seed, k, 1))
            )
        else:
            if graph is None:
                raise ValueError("either a graph or a shape must be provided")
            floor = _PAIR_FLOOR_FACTOR * graph.cloud.fill_distance
            constants.append(
                local_lne_constant(graph, index, p, r, pair_count, derive_seed(seed, k, 1))
            )
    verdict = classify_constants(constants)
    return LNEReport(p, radii, constants, verdict, pair_floor=floor)


def classify_constants(constants) -> str:
    """bounded: last two within 20%; diverging: monotone (5% slack) and
    total growth >= 2x; inconclusive otherwise."""
    c = list(constants)
    if len(c) < 2:
        return "inconclusive"
    monotone = all(c[i + 1] >= 0.95 * c[i] for i in range(len(c) - 1))
    if monotone and c[-1] >= 2.0 * c[0]:
        return "diverging"
    if abs(c[-1] - c[-2]) <= 0.2 * abs(c[-2]):
        return "bounded"
    return "inconclusive"


# ---------------------------------------------------------------------------
# the medial-approach dichotomy


@dataclass
class TheoremConfig:
    local_count: int = 2500
    grid_resolution: int = 21
    pair_count: int = 4096
    seed: int = 0
    connect_factor: float = 5.0
    rectifiability_pairs: int = 3


def verify_theorem(shape: Shape, p, radii, config: TheoremConfig | None = None) -> TheoremVerdict:
    """Check the dichotomy at a point: either medial samples approach it or
    the set is locally normally embedded there.

    Per radius, the shape is resampled in the ball (fill proportional to the
    radius) and the one local cloud feeds both the normal-embedding constant
    and the medial scan (grid flags plus edge-jump bisection).  ``consistent``
    is the contrapositive invariant: not (diverging and no medial approach).
    For balls without medial samples a rectifiability spot-check confirms
    projection paths exist (the inner metric is locally defined).
    """
    cfg = config or TheoremConfig()
    p = np.asarray(p, dtype=np.float64)
    if not shape.contains(p[None, :], 1e-9 * max(shape.scale, 1.0))[0]:
        raise ValueError("probe point is not on the shape")
    radii = [float(r) for r in radii]
    constants = []
    min_dists = []
    rect_checks = []
    approach_all = True
    for k, r in enumerate(radii):
        cloud = shape.sample_in_ball(p, 3.0 * r, cfg.local_count, derive_seed(cfg.seed, k))
        if len(cloud) < 2:
            constants.append(1.0)  # single-point ball: vacuously embedded
            min_dists.append(None)
            approach_all = False
            continue
        idx = build_index(cloud)
        graph = build_geodesic_graph(
            cloud, cfg.connect_factor * max(cloud.fill_distance, 1e-300)
        )
        try:
            constants.append(
                local_lne_constant(graph, idx, p, r, cfg.pair_count, derive_seed(cfg.seed, k, 1))
            )
        except BallTooSmallError:
            constants.append(1.0)
        box = (p - r, p + r)
        scan = scan_medial(idx, box, cfg.grid_resolution, edge_jumps=True)
        flagged = scan.flagged_locations()
        found = False
        if len(flagged):
            d = np.sqrt(np.sum((flagged - p) ** 2, axis=1))
            inside = d <= r
            if inside.any():
                found = True
                min_dists.append(float(d[inside].min()))
        if not found:
            min_dists.append(None)
            approach_all = False
            ok = _rectifiability_check(shape, idx, p, r, cfg, k)
            rect_checks.append({"radius": r, "paths_ok": ok})
    verdict = classify_constants(constants)
    consistent = not (verdict == "diverging" and not approach_all)
    return TheoremVerdict(
        point=p,
        lne_verdict=verdict,
        medial_approach=bool(approach_all),
        consistent=bool(consistent),
        radii=radii,
        constants=constants,
        medial_min_distances=min_dists,
        rectifiable_checks=rect_checks,
    )


def _rectifiability_check(shape, idx, p, r, cfg, salt) -> bool:
    """In a medial-free ball, projection paths between on-shape pairs must
    exist and be finite (the inner metric is locally defined)."""
    pts = shape.random_points(16, derive_seed(cfg.seed, 11, salt))
    pts = pts[np.sqrt(np.sum((pts - p) ** 2, axis=1)) <= 0.9 * r]
    if len(pts) < 2:
        return True  # nothing to link
    ok = True
    for a, b in zip(pts[:-1], pts[1:]):
        if len(a) != len(b):
            continue
        try:
            pe = project_segment(idx, a, b, steps=64, max_steps=128)
            ok = ok and np.isfinite(pe.length)
        except NoPathError:
            ok = False
    return ok


# ---------------------------------------------------------------------------
# the witness-pair probe


@dataclass
class ConjectureConfig:
    anchors: list | None = None  # explicit medial anchor points
    start_offset: float = 0.04
    decay: float = 0.25
    seed: int = 0
    base_count: int = 4000
    max_count: int = 32000
    connect_factor: float = 5.0
    ball_factor: float = 3.0
    stable_rel: float = 0.015


def conjecture_probe(shape: Shape, p, count: int, config: ConjectureConfig | None = None) -> ConjectureTrace:
    """Witness pairs along medial anchors approaching p, with inner/outer
    ratios measured on per-anchor refined clouds.

    Anchors are either explicit or generated from the shape's exact medial
    descriptor as a geometric sequence approaching p.  Anchors that fail the
    medial detector on the locally refined cloud are dropped; an empty list
    yields a vacuous trace (a valid outcome).
    """
    cfg = config or ConjectureConfig()
    p = np.asarray(p, dtype=np.float64)
    anchors = _make_anchors(shape, p, count, cfg)
    medial_points = []
    pairs = []
    ratios = []
    for k, xi in enumerate(anchors):
        xi = np.asarray(xi, dtype=np.float64)
        result = _witness_ratio(shape, p, xi, cfg, k)
        if result is None:
            continue
        pair, ratio = result
        medial_points.append(xi)
        pairs.append(pair)
        ratios.append(ratio)
    if not ratios:
        return ConjectureTrace([], [], [], diverges=False, vacuous=True)
    diverges = _diverges(ratios)
    return ConjectureTrace(medial_points, pairs, ratios, diverges, vacuous=False)


def _make_anchors(shape, p, count, cfg) -> list:
    if cfg.anchors is not None:
        return [np.asarray(a, dtype=np.float64) for a in cfg.anchors]
    desc = shape.exact_medial()
    if desc is None:
        return []
    if desc[0] == "ray":
        base, direction = np.asarray(desc[1]), np.asarray(desc[2])
        rel = p - base
        foot = base + max(float(rel @ direction), 0.0) * direction
        if np.sqrt(np.sum((foot - p) ** 2)) > cfg.start_offset:
            return []  # medial ray does not approach p at these offsets
        return [
            foot + cfg.start_offset * (cfg.decay**k) * direction for k in range(count)
        ]
    if desc[0] == "hyperplane":
        normal, offset = np.asarray(desc[1]), float(desc[2])
        foot = p - (float(p @ normal) - offset) * normal
        if np.sqrt(np.sum((foot - p) ** 2)) > cfg.start_offset:
            return []
        return [foot.copy() for _ in range(1)]
    if desc[0] == "point":
        m = np.asarray(desc[1])
        if np.sqrt(np.sum((m - p) ** 2)) > cfg.start_offset:
            return []
        return [m.copy()]
    return []


def _witness_ratio(shape, p, xi, cfg, salt):
    """Witness pair of one anchor plus its refined inner/outer ratio."""
    scale = float(np.sqrt(np.sum((xi - p) ** 2)))
    if scale <= 0:
        return None
    ratio_prev = None
    result = None
    n = cfg.base_count
    while n <= cfg.max_count:
        cloud = shape.sample_in_ball(p, cfg.ball_factor * scale, n, derive_seed(cfg.seed, salt, n))
        if len(cloud) < 2:
            return None
        idx = build_index(cloud)
        flag, spread, witnesses = is_medial(idx, xi)
        if not flag:
            return None
        x, y = witnesses
        outer = float(np.sqrt(np.sum((x - y) ** 2)))
        if outer <= 0:
            return None
        g = build_geodesic_graph(cloud, cfg.connect_factor * max(cloud.fill_distance, 1e-300))
        try:
            pe = inner_distance(g, x, y)
        except NoPathError:
            return None
        ratio = pe.length / outer
        result = ((x, y), ratio)
        if ratio_prev is not None and abs(ratio - ratio_prev) <= cfg.stable_rel * ratio:
            break
        ratio_prev = ratio
        n *= 2
    return result


def _diverges(ratios) -> bool:
    """Ratios exceed 2x their initial value and increase monotonically
    (2% slack) over the last half of the trace."""
    if len(ratios) < 2:
        return False
    if ratios[-1] < 2.0 * ratios[0]:
        return False
    tail = ratios[(len(ratios) - 1) // 2 :]
    return all(b >= 0.98 * a for a, b in zip(tail, tail[1:]))
