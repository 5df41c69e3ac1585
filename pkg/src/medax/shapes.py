"""Analytic test-set catalog and point-cloud ingestion.

Each shape is a closed subset of R^n given either in closed form (circle,
two-point set, cusp curve, helix arcs, cone surface, segment lists) or as a
raw point cloud.  Shapes expose membership tests, deterministic samplers
(full-shape and ball-restricted), and exact nearest-point oracles where a
closed form or 1-d minimization applies.

Samplers preserve the symmetries of the shape exactly: mirrored curve
branches are emitted as mirrored floats and circle samples come in exact
antipodal pairs.  Downstream medial-axis localization leans on this.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import _kernels
from ._util import lexsort_rows, rng_from_seed
from .errors import OracleUnavailableError, RefinementError, ShapeError

MEMBERSHIP_TOL = 1e-12

_CURVE_GRID = 8192
_FILL_PROBE_FACTOR = 8


@dataclass(frozen=True)
class ShapeSpec:
    """Declarative description of a catalog shape.

    ``ambient_dim`` may be left 0 to infer it from the kind.
    """

    kind: str
    params: Mapping[str, object] = field(default_factory=dict)
    ambient_dim: int = 0


@dataclass(frozen=True)
class SampleCloud:
    """Finite sample of a shape with its estimated fill distance."""

    points: np.ndarray
    fill_distance: float
    seed: int
    shape_ref: str

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ExactNearest:
    """Result of an exact nearest-point query.

    ``members`` holds the full minimizer set; for a continuum of minimizers
    (e.g. the cone axis) a finite representative subset is returned and
    ``continuum`` is set.
    """

    distance: float
    members: np.ndarray
    continuum: bool = False

    @property
    def spread(self) -> float:
        from ._util import diameter

        return diameter(self.members)[0]


def _spec_ref(kind: str, params: Mapping[str, object]) -> str:
    blob = json.dumps({k: params[k] for k in sorted(params)}, default=list)
    return f"{kind}:{hashlib.md5(blob.encode()).hexdigest()[:8]}"


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Contiguous True runs of a boolean array as [start, stop) pairs."""
    idx = np.nonzero(mask)[0]
    if len(idx) == 0:
        return []
    breaks = np.nonzero(np.diff(idx) > 1)[0]
    starts = np.concatenate(([idx[0]], idx[breaks + 1]))
    stops = np.concatenate((idx[breaks] + 1, [idx[-1] + 1]))
    return list(zip(starts.tolist(), stops.tolist()))


class _CurveComponent:
    """One smooth parametric arc with closed-form arclength."""

    def __init__(
        self,
        lo: float,
        hi: float,
        point_fn: Callable[[np.ndarray], np.ndarray],
        arclen_fn: Callable[[np.ndarray], np.ndarray],
        arclen_inv: Callable[[np.ndarray], np.ndarray],
    ):
        self.lo = float(lo)
        self.hi = float(hi)
        self.point = point_fn
        self._s = arclen_fn
        self._sinv = arclen_inv

    def arclen(self, a, b) -> float:
        return float(self._s(np.asarray(b)) - self._s(np.asarray(a)))

    @property
    def length(self) -> float:
        return self.arclen(self.lo, self.hi)

    def equispaced(self, a: float, b: float, m: int) -> np.ndarray:
        """m params over [a, b], equally spaced in arclength, ends included."""
        if m <= 1:
            return np.asarray([0.5 * (a + b)])
        sa, sb = float(self._s(np.asarray(a))), float(self._s(np.asarray(b)))
        sigma = np.linspace(sa, sb, m)
        t = np.asarray(self._sinv(sigma), dtype=np.float64)
        return np.clip(t, min(a, b), max(a, b))

    def ball_windows(self, center: np.ndarray, radius: float) -> list[tuple[float, float]]:
        """Param windows whose points lie within the ball, grid+bisection."""
        grid = np.linspace(self.lo, self.hi, _CURVE_GRID + 1)
        pts = self.point(grid)
        inside = np.sum((pts - center) ** 2, axis=1) <= radius * radius
        windows = []
        for i0, i1 in _runs(inside):
            a = grid[i0]
            b = grid[i1 - 1]
            if i0 > 0:
                a = self._bisect_boundary(grid[i0 - 1], grid[i0], center, radius)
            if i1 < len(grid):
                b = self._bisect_boundary(grid[i1], grid[i1 - 1], center, radius)
            windows.append((float(a), float(b)))
        return windows

    def _bisect_boundary(self, t_out: float, t_in: float, center, radius) -> float:
        for _ in range(40):
            mid = 0.5 * (t_out + t_in)
            p = self.point(np.asarray([mid]))[0]
            if np.sum((p - center) ** 2) <= radius * radius:
                t_in = mid
            else:
                t_out = mid
        return t_in


def _golden_min(f, a: float, b: float, iters: int = 90) -> float:
    """Golden-section minimizer of a scalar function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


class Shape:
    """A closed set with samplers and optional exact oracles."""

    kind: str

    def __init__(self, spec: ShapeSpec):
        self.spec = spec
        self.params: dict = dict(spec.params)
        self.ref = _spec_ref(spec.kind, self.params)
        self.dim = 0  # set by subclass
        self.scale = 1.0  # set after construction

    # -- interface -------------------------------------------------------
    def contains(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        raise NotImplementedError

    def sample(self, count: int, seed: int, max_fill: float | None = None) -> SampleCloud:
        """Deterministic full-shape sample; raises RefinementError when the
        estimated fill distance exceeds ``max_fill``."""
        if count < 2:
            raise ShapeError("sample count must be >= 2")
        pts, probes, margin = self._sample_points(count, seed)
        fill = self._estimate_fill(pts, probes, margin)
        if max_fill is not None and fill > max_fill:
            raise RefinementError(
                f"fill distance {fill:.3g} above ceiling {max_fill:.3g}; increase count"
            )
        return SampleCloud(pts, fill, seed, self.ref)

    def sample_in_ball(self, center, radius: float, count: int, seed: int) -> SampleCloud:
        """Deterministic sample of the shape restricted to a closed ball."""
        center = np.asarray(center, dtype=np.float64)
        pts, probes, margin = self._sample_ball_points(center, radius, count, seed)
        if len(pts) == 0:
            return SampleCloud(pts.reshape(0, self.dim), 0.0, seed, self.ref)
        fill = self._estimate_fill(pts, probes, margin)
        return SampleCloud(pts, fill, seed, self.ref)

    def random_points(self, count: int, seed: int) -> np.ndarray:
        """Uniform-in-measure random points on the shape."""
        raise NotImplementedError

    def exact_nearest(self, a) -> ExactNearest:
        raise OracleUnavailableError(f"no exact oracle for kind {self.kind!r}")

    def exact_medial(self):
        """Descriptor of the analytically known medial set, or None."""
        return None

    def medial_distance(self, points) -> np.ndarray:
        """Distance from points to the exact medial set (where known)."""
        desc = self.exact_medial()
        if desc is None:
            raise OracleUnavailableError(f"no exact medial set for {self.kind!r}")
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        tag = desc[0]
        if tag == "point":
            return np.sqrt(np.sum((pts - desc[1]) ** 2, axis=1))
        if tag == "hyperplane":
            normal, offset = desc[1], desc[2]
            return np.abs(pts @ normal - offset)
        if tag == "ray":
            base, direction = desc[1], desc[2]
            rel = pts - base
            t = np.clip(rel @ direction, 0.0, None)
            return np.sqrt(np.sum((rel - t[:, None] * direction) ** 2, axis=1))
        raise ShapeError(f"unknown medial descriptor {tag!r}")

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        pts = self.sample(256, 0).points
        return pts.min(axis=0), pts.max(axis=0)

    # -- shared helpers --------------------------------------------------
    def _estimate_fill(self, pts: np.ndarray, probes: np.ndarray | None, margin: float) -> float:
        if probes is None or len(probes) == 0:
            return 0.0
        tree = _kernels.KDTree(pts)
        dist, _ = tree.query_many(probes)
        return float(dist.max() + margin)

    def _sample_points(self, count, seed):
        raise NotImplementedError

    def _sample_ball_points(self, center, radius, count, seed):
        raise NotImplementedError


class _CurveShape(Shape):
    """Shared machinery for 1-parameter shapes."""

    def _components(self) -> list[_CurveComponent]:
        raise NotImplementedError

    def _curve_sample(self, comps, counts) -> tuple[np.ndarray, np.ndarray, float]:
        pts = []
        probes = []
        spacing = 0.0
        for comp, m in zip(comps, counts):
            if m < 2:
                m = 2
            t = comp.equispaced(comp.lo, comp.hi, m)
            pts.append(comp.point(t))
            tp = comp.equispaced(comp.lo, comp.hi, m * _FILL_PROBE_FACTOR)
            probes.append(comp.point(tp))
            spacing = max(spacing, comp.length / max(m * _FILL_PROBE_FACTOR - 1, 1))
        return np.concatenate(pts), np.concatenate(probes), spacing / 2.0

    def _sample_ball_points(self, center, radius, count, seed):
        comps = self._components()
        windows = []
        for comp in comps:
            for a, b in comp.ball_windows(center, radius):
                windows.append((comp, a, b, comp.arclen(a, b)))
        total = sum(w[3] for w in windows)
        if not windows:
            return np.empty((0, self.dim)), None, 0.0
        pts = []
        probes = []
        spacing = 0.0
        for comp, a, b, length in windows:
            m = max(2, int(round(count * length / total)) + 1) if total > 0 else 2
            t = comp.equispaced(a, b, m)
            pts.append(comp.point(t))
            tp = comp.equispaced(a, b, m * _FILL_PROBE_FACTOR)
            probes.append(comp.point(tp))
            spacing = max(spacing, length / max(m * _FILL_PROBE_FACTOR - 1, 1))
        allpts = np.concatenate(pts)
        order = lexsort_rows(allpts)
        allpts = allpts[order]
        keep = np.ones(len(allpts), dtype=bool)
        if len(allpts) > 1:
            dup = np.all(np.abs(np.diff(allpts, axis=0)) <= 1e-15, axis=1)
            keep[1:][dup] = False
        return allpts[keep], np.concatenate(probes), spacing / 2.0

    def random_points(self, count: int, seed: int) -> np.ndarray:
        comps = self._components()
        lengths = np.asarray([c.length for c in comps])
        rng = rng_from_seed(seed)
        which = rng.choice(len(comps), size=count, p=lengths / lengths.sum())
        out = np.empty((count, self.dim))
        for i, c_idx in enumerate(which):
            comp = comps[c_idx]
            sigma = float(comp._s(np.asarray(comp.lo))) + rng.uniform(0.0, comp.length)
            t0 = float(np.clip(comp._sinv(np.asarray(sigma)), comp.lo, comp.hi))
            out[i] = comp.point(np.asarray([t0]))[0]
        return out

    def _curve_exact_nearest(self, a, n_grid: int = _CURVE_GRID) -> ExactNearest:
        a = np.asarray(a, dtype=np.float64)
        candidates: list[tuple[float, np.ndarray]] = []
        for comp in self._components():
            grid = np.linspace(comp.lo, comp.hi, n_grid + 1)
            vals = np.sum((comp.point(grid) - a) ** 2, axis=1)
            interior = np.nonzero(
                (vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:])
            )[0] + 1
            brackets = [(grid[i - 1], grid[i + 1]) for i in interior]
            brackets.append((grid[0], grid[1]))
            brackets.append((grid[-2], grid[-1]))

            def f(t, comp=comp):
                return float(np.sum((comp.point(np.asarray([t]))[0] - a) ** 2))

            for lo, hi in brackets:
                t_star = _golden_min(f, lo, hi)
                candidates.append((f(t_star), comp.point(np.asarray([t_star]))[0]))
        best = min(c[0] for c in candidates)
        dist = math.sqrt(max(best, 0.0))
        tol = max(1e-10 * self.scale, 1e-14) * max(dist, 1.0)
        members = [p for v, p in candidates if math.sqrt(max(v, 0.0)) <= dist + tol]
        arr = np.asarray(members)
        order = lexsort_rows(arr)
        arr = arr[order]
        keep = np.ones(len(arr), dtype=bool)
        if len(arr) > 1:
            dup = np.all(
                np.abs(np.diff(arr, axis=0)) <= 1e-8 * max(self.scale, 1.0), axis=1
            )
            keep[1:][dup] = False
        return ExactNearest(dist, arr[keep])


# ---------------------------------------------------------------------------
# concrete shapes


class CircleShape(_CurveShape):
    kind = "circle"

    def __init__(self, spec: ShapeSpec):
        super().__init__(spec)
        self.radius = float(self.params.get("radius", 1.0))
        self.center = np.asarray(self.params.get("center", (0.0, 0.0)), dtype=np.float64)
        if self.radius <= 0:
            raise ShapeError("circle radius must be positive")
        if self.center.shape != (2,):
            raise ShapeError("circle center must be a 2-vector")
        self.dim = 2
        self.scale = 2.0 * self.radius

    def _components(self):
        r, c = self.radius, self.center

        def point(theta):
            theta = np.asarray(theta, dtype=np.float64)
            return np.stack([c[0] + r * np.cos(theta), c[1] + r * np.sin(theta)], axis=-1)

        return [
            _CurveComponent(0.0, 2.0 * math.pi, point, lambda t: r * np.asarray(t), lambda s: np.asarray(s) / r)
        ]

    def contains(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.abs(np.sqrt(np.sum((pts - self.center) ** 2, axis=1)) - self.radius) <= tol

    def _sample_points(self, count, seed):
        # exact antipodal pairs: emit u and -u; even counts only
        half = max(count // 2, 1)
        phase = 2.0 * math.pi * ((seed % 10007) / 10007.0) / max(half, 1)
        theta = phase + np.pi * np.arange(half) / half
        u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        pts = np.concatenate([self.center + self.radius * u, self.center - self.radius * u])
        m = len(pts) * _FILL_PROBE_FACTOR
        tp = phase + 2.0 * np.pi * np.arange(m) / m
        probes = self.center + self.radius * np.stack([np.cos(tp), np.sin(tp)], axis=-1)
        margin = (2.0 * math.pi * self.radius / m) / 2.0
        return pts, probes, margin

    def random_points(self, count, seed):
        rng = rng_from_seed(seed)
        theta = rng.uniform(0.0, 2.0 * math.pi, size=count)
        return self.center + self.radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)

    def exact_nearest(self, a) -> ExactNearest:
        a = np.asarray(a, dtype=np.float64)
        rel = a - self.center
        rho = float(np.sqrt(np.sum(rel**2)))
        if rho <= 1e-13 * self.scale:
            reps = 16
            theta = 2.0 * np.pi * np.arange(reps) / reps
            ring = self.center + self.radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
            return ExactNearest(self.radius, ring, continuum=True)
        proj = self.center + self.radius * rel / rho
        return ExactNearest(abs(rho - self.radius), proj[None, :])

    def exact_medial(self):
        return ("point", self.center.copy())


class TwoPointsShape(Shape):
    kind = "two_points"

    def __init__(self, spec: ShapeSpec):
        super().__init__(spec)
        pts = np.asarray(self.params.get("points", [[-1.0, 0.0], [1.0, 0.0]]), dtype=np.float64)
        if pts.shape != (2, 2):
            raise ShapeError("two_points expects exactly two 2-vectors")
        if np.allclose(pts[0], pts[1]):
            raise ShapeError("two_points must be distinct")
        self.points = pts
        self.dim = 2
        self.scale = float(np.sqrt(np.sum((pts[1] - pts[0]) ** 2)))

    def contains(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        d = np.minimum(
            np.sqrt(np.sum((pts - self.points[0]) ** 2, axis=1)),
            np.sqrt(np.sum((pts - self.points[1]) ** 2, axis=1)),
        )
        return d <= tol

    def _sample_points(self, count, seed):
        return self.points.copy(), None, 0.0

    def _sample_ball_points(self, center, radius, count, seed):
        inside = np.sum((self.points - center) ** 2, axis=1) <= radius * radius
        return self.points[inside].copy(), None, 0.0

    def random_points(self, count, seed):
        rng = rng_from_seed(seed)
        return self.points[rng.integers(0, 2, size=count)]

    def exact_nearest(self, a) -> ExactNearest:
        a = np.asarray(a, dtype=np.float64)
        d = np.sqrt(np.sum((self.points - a) ** 2, axis=1))
        dmin = float(d.min())
        members = self.points[d <= dmin + 1e-12 * max(self.scale, 1.0)]
        return ExactNearest(dmin, members.copy())

    def exact_medial(self):
        normal = self.points[1] - self.points[0]
        normal = normal / np.sqrt(np.sum(normal**2))
        offset = float(0.5 * (self.points[0] + self.points[1]) @ normal)
        return ("hyperplane", normal, offset)


class CuspShape(_CurveShape):
    """Scaled cusp curve scale*(t, ±t^(3/2)), t in [0, t_max]."""

    kind = "cusp"

    def __init__(self, spec: ShapeSpec):
        super().__init__(spec)
        self.t_max = float(self.params.get("t_max", 1.0))
        self.cusp_scale = float(self.params.get("scale", 1.0))
        if self.t_max <= 0 or self.cusp_scale <= 0:
            raise ShapeError("cusp t_max and scale must be positive")
        self.dim = 2
        self.scale = self.cusp_scale * max(self.t_max, self.t_max**1.5) * 2.0

    def _arclen(self, t):
        t = np.asarray(t, dtype=np.float64)
        return self.cusp_scale * (8.0 / 27.0) * ((1.0 + 2.25 * t) ** 1.5 - 1.0)

    def _arclen_inv(self, s):
        s = np.asarray(s, dtype=np.float64) / self.cusp_scale
        return ((27.0 * s / 8.0 + 1.0) ** (2.0 / 3.0) - 1.0) / 2.25

    def _components(self):
        sc = self.cusp_scale

        def upper(t):
            t = np.asarray(t, dtype=np.float64)
            return np.stack([sc * t, sc * t**1.5], axis=-1)

        def lower(t):
            t = np.asarray(t, dtype=np.float64)
            return np.stack([sc * t, -(sc * t**1.5)], axis=-1)

        return [
            _CurveComponent(0.0, self.t_max, upper, self._arclen, self._arclen_inv),
            _CurveComponent(0.0, self.t_max, lower, self._arclen, self._arclen_inv),
        ]

    def contains(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        t = pts[:, 0] / self.cusp_scale
        ok = (t >= -tol) & (t <= self.t_max + tol)
        resid = np.abs(np.abs(pts[:, 1]) - self.cusp_scale * np.clip(t, 0.0, None) ** 1.5)
        return ok & (resid <= tol)

    def _sample_points(self, count, seed):
        # origin once plus mirrored branches: exact reflection symmetry
        m = max((count - 1) // 2, 1)
        upper, lower = self._components()
        t = upper.equispaced(0.0, self.t_max, m + 1)  # includes t=0
        up = upper.point(t)
        lo = lower.point(t[1:])
        pts = np.concatenate([up, lo])
        tp = upper.equispaced(0.0, self.t_max, (m + 1) * _FILL_PROBE_FACTOR)
        probes = np.concatenate([upper.point(tp), lower.point(tp[1:])])
        margin = self._arclen(self.t_max) / max(len(tp) - 1, 1) / 2.0
        return pts, probes, margin

    def exact_nearest(self, a) -> ExactNearest:
        return self._curve_exact_nearest(a)

    def exact_medial(self):
        return (
            "ray",
            np.zeros(2),
            np.asarray([1.0, 0.0]),
        )


def _helix_arclen(u):
    u = np.asarray(u, dtype=np.float64)
    return u * np.sqrt(1.0 + 4.0 * u * u) / 2.0 + np.arcsinh(2.0 * u) / 4.0


def _helix_arclen_inv(s):
    s = np.asarray(s, dtype=np.float64)
    u = np.sqrt(np.maximum(s / 2.0, 0.0))  # rough seed
    u = np.where(s > 1.0, np.sqrt(s / 2.0), s)
    for _ in range(60):
        f = _helix_arclen(u) - s
        df = np.sqrt(1.0 + 4.0 * u * u)
        step = f / df
        u = u - step
        if np.all(np.abs(step) < 1e-15 * (1.0 + np.abs(u))):
            break
    return u


class HelixShape(_CurveShape):
    """Arc of (cos u, sin u, u^2); half (u >= 0) or full (u in [-u_max, u_max])."""

    def __init__(self, spec: ShapeSpec, full: bool):
        super().__init__(spec)
        self.kind = "full_helix" if full else "half_helix"
        self.full = full
        self.u_max = float(self.params.get("u_max", 2.0 * math.pi))
        if self.u_max <= 0:
            raise ShapeError("helix u_max must be positive")
        self.dim = 3
        self.scale = math.sqrt(4.0 + self.u_max**4)

    def _components(self):
        def pos(u):
            u = np.asarray(u, dtype=np.float64)
            return np.stack([np.cos(u), np.sin(u), u * u], axis=-1)

        def neg(u):
            # mirror branch evaluated through the same cos/sin calls so the
            # cloud is exactly symmetric about the y=0 plane
            u = np.asarray(u, dtype=np.float64)
            return np.stack([np.cos(u), -np.sin(u), u * u], axis=-1)

        comps = [_CurveComponent(0.0, self.u_max, pos, _helix_arclen, _helix_arclen_inv)]
        if self.full:
            comps.append(_CurveComponent(0.0, self.u_max, neg, _helix_arclen, _helix_arclen_inv))
        return comps

    def contains(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        out = np.zeros(len(pts), dtype=bool)
        z = np.clip(pts[:, 2], 0.0, None)
        u = np.sqrt(z)
        for sgn in (1.0, -1.0) if self.full else (1.0,):
            cand = np.stack([np.cos(u), sgn * np.sin(u), u * u], axis=-1)
            ok = (pts[:, 2] >= -tol) & (u <= self.u_max + tol)
            ok &= np.sqrt(np.sum((pts - cand) ** 2, axis=1)) <= tol
            out |= ok
        return out

    def _sample_points(self, count, seed):
        comps = self._components()
        if not self.full:
            return self._curve_sample(comps, [count])
        m = max((count - 1) // 2, 1)
        pos, neg = comps
        t = pos.equispaced(0.0, self.u_max, m + 1)
        pts = np.concatenate([pos.point(t), neg.point(t[1:])])
        tp = pos.equispaced(0.0, self.u_max, (m + 1) * _FILL_PROBE_FACTOR)
        probes = np.concatenate([pos.point(tp), neg.point(tp[1:])])
        margin = pos.length / max(len(tp) - 1, 1) / 2.0
        return pts, probes, margin

    def exact_nearest(self, a) -> ExactNearest:
        a = np.asarray(a, dtype=np.float64)
        rho = math.hypot(a[0], a[1])
        if rho <= 1e-13:
            # on the axis: minimizers are u = +-sqrt(z) clipped into range
            z = a[2]
            if z <= 0:
                members = np.asarray([[1.0, 0.0, 0.0]])
                return ExactNearest(float(np.sqrt(np.sum((a - members[0]) ** 2))), members)
            u = min(math.sqrt(z), self.u_max)
            m_pos = np.asarray([math.cos(u), math.sin(u), u * u])
            members = [m_pos]
            if self.full:
                members.append(np.asarray([math.cos(u), -math.sin(u), u * u]))
            arr = np.asarray(members)
            d = float(np.sqrt(np.sum((a - arr[0]) ** 2)))
            return ExactNearest(d, arr)
        return self._curve_exact_nearest(a, n_grid=4 * _CURVE_GRID)

    def exact_medial(self):
        if self.full:
            return ("ray", np.zeros(3), np.asarray([0.0, 0.0, 1.0]))
        return None


class ConeShape(Shape):
    """Right-angle cone surface z = sqrt(x^2+y^2), truncated at z <= rho_max."""

    kind = "cone"

    def __init__(self, spec: ShapeSpec):
        super().__init__(spec)
        self.rho_max = float(self.params.get("rho_max", 2.0))
        if self.rho_max <= 0:
            raise ShapeError("cone rho_max must be positive")
        self.dim = 3
        self.scale = 2.0 * self.rho_max * math.sqrt(2.0)

    def contains(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        rho = np.sqrt(pts[:, 0] ** 2 + pts[:, 1] ** 2)
        return (np.abs(pts[:, 2] - rho) <= tol) & (rho <= self.rho_max + tol)

    # -- lattice sampler over (slant, angle) ------------------------------
    def _lattice(self, count: int, seed: int, center=None, radius: float = math.inf):
        if center is None:
            center = np.zeros(3)
            c_r, c_z = 0.0, 0.0
            phi_c = 0.0
            rho_lo, rho_hi = 0.0, self.rho_max
        else:
            c_r = math.hypot(center[0], center[1])
            c_z = float(center[2])
            phi_c = math.atan2(center[1], center[0]) if c_r > 0 else 0.0
            # rows with min-over-angle distance <= radius:
            # (rho - c_r)^2 + (rho - c_z)^2 <= r^2
            aa, bb = 2.0, -2.0 * (c_r + c_z)
            cc = c_r * c_r + c_z * c_z - radius * radius
            disc = bb * bb - 4.0 * aa * cc
            if disc < 0:
                return np.empty((0, 3)), np.empty((0, 3)), 0.0
            root = math.sqrt(disc)
            rho_lo = max(0.0, (-bb - root) / (2.0 * aa))
            rho_hi = min(self.rho_max, (-bb + root) / (2.0 * aa))
            if rho_hi <= rho_lo:
                return np.empty((0, 3)), np.empty((0, 3)), 0.0

        def build(n_target: int):
            # slant spacing from patch area (slant metric ds = sqrt(2) drho)
            rho_grid = np.linspace(rho_lo, rho_hi, 257)
            if math.isinf(radius):
                half = np.full(rho_grid.shape, math.pi)
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    A = (
                        rho_grid**2
                        + c_r**2
                        + (rho_grid - c_z) ** 2
                        - radius * radius
                    ) / (2.0 * rho_grid * c_r)
                A = np.where(c_r * rho_grid > 0, A, -1.0)
                half = np.arccos(np.clip(A, -1.0, 1.0))
            area = np.trapezoid(2.0 * half * rho_grid * math.sqrt(2.0), rho_grid)
            delta = math.sqrt(max(area, 1e-300) / max(n_target, 1))
            rows = max(1, int(round((rho_hi - rho_lo) * math.sqrt(2.0) / delta)))
            pts = []
            frac = (seed % 9973) / 9973.0
            for j in range(rows):
                rho = rho_lo + (j + 0.5) * (rho_hi - rho_lo) / rows
                if math.isinf(radius):
                    psi = math.pi
                elif c_r * rho > 0:
                    A = (rho * rho + c_r * c_r + (rho - c_z) ** 2 - radius * radius) / (
                        2.0 * rho * c_r
                    )
                    if A > 1.0:
                        continue
                    psi = math.acos(max(A, -1.0))
                else:
                    if rho * rho + (rho - c_z) ** 2 > radius * radius:
                        continue
                    psi = math.pi
                arc = 2.0 * psi * rho
                m = max(1, int(math.ceil(arc / delta)))
                if psi >= math.pi:  # full circle, exclude duplicate endpoint
                    phi = phi_c + 2.0 * math.pi * (np.arange(m) + ((j * 0.381966 + frac) % 1.0)) / m
                else:
                    phi = phi_c + np.linspace(-psi, psi, max(m, 2))
                pts.append(
                    np.stack([rho * np.cos(phi), rho * np.sin(phi), np.full(phi.shape, rho)], axis=-1)
                )
            if rho_lo <= 1e-15:
                pts.append(np.zeros((1, 3)))  # apex
            if not pts:
                return np.empty((0, 3)), delta
            return np.concatenate(pts), delta

        pts, delta = build(count)
        probes, pdelta = build(count * _FILL_PROBE_FACTOR)
        return pts, probes, pdelta * 0.75

    def _sample_points(self, count, seed):
        return self._lattice(count, seed)

    def _sample_ball_points(self, center, radius, count, seed):
        return self._lattice(count, seed, center=center, radius=radius)

    def random_points(self, count, seed):
        rng = rng_from_seed(seed)
        s = self.rho_max * np.sqrt(rng.uniform(0.0, 1.0, size=count))
        phi = rng.uniform(0.0, 2.0 * math.pi, size=count)
        return np.stack([s * np.cos(phi), s * np.sin(phi), s], axis=-1)

    def exact_nearest(self, a) -> ExactNearest:
        a = np.asarray(a, dtype=np.float64)
        rho_q = math.hypot(a[0], a[1])
        z_q = float(a[2])
        rho_star = min(max((rho_q + z_q) / 2.0, 0.0), self.rho_max)
        if rho_q <= 1e-13 * self.scale:
            if rho_star <= 0.0:
                member = np.zeros((1, 3))
                return ExactNearest(float(np.sqrt(np.sum(a**2))), member)
            reps = 16
            theta = 2.0 * np.pi * np.arange(reps) / reps
            ring = np.stack(
                [rho_star * np.cos(theta), rho_star * np.sin(theta), np.full(reps, rho_star)],
                axis=-1,
            )
            d = float(np.sqrt(np.sum((a - ring[0]) ** 2)))
            return ExactNearest(d, ring, continuum=True)
        u = np.asarray([a[0] / rho_q, a[1] / rho_q])
        p = np.asarray([rho_star * u[0], rho_star * u[1], rho_star])
        return ExactNearest(float(np.sqrt(np.sum((a - p) ** 2))), p[None, :])

    def exact_medial(self):
        return ("ray", np.zeros(3), np.asarray([0.0, 0.0, 1.0]))


class PointCloudShape(Shape):
    kind = "point_cloud"

    def __init__(self, spec: ShapeSpec):
        super().__init__(spec)
        pts = np.asarray(self.params.get("points", []), dtype=np.float64)
        if pts.ndim != 2 or len(pts) == 0:
            raise ShapeError("point_cloud requires a nonempty (n, dim) points array")
        self.points = pts
        self.dim = pts.shape[1]
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        self.scale = float(np.sqrt(np.sum((hi - lo) ** 2))) or 1.0

    def contains(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        tree = _kernels.KDTree(self.points)
        dist, _ = tree.query_many(pts)
        return dist <= tol

    def _sample_points(self, count, seed):
        if count >= len(self.points):
            return self.points.copy(), None, 0.0
        stride = len(self.points) / count
        idx = np.unique((np.arange(count) * stride).astype(np.int64))
        chosen = self.points[idx]
        return chosen, self.points.copy(), 0.0

    def _sample_ball_points(self, center, radius, count, seed):
        inside = np.sum((self.points - center) ** 2, axis=1) <= radius * radius
        return self.points[inside].copy(), None, 0.0

    def random_points(self, count, seed):
        rng = rng_from_seed(seed)
        return self.points[rng.integers(0, len(self.points), size=count)]


class SegmentListShape(_CurveShape):
    kind = "segment_list"

    def __init__(self, spec: ShapeSpec):
        super().__init__(spec)
        segs = np.asarray(self.params.get("segments", []), dtype=np.float64)
        if segs.ndim != 3 or segs.shape[1:] != (2, 2):
            raise ShapeError("segment_list requires segments of shape (k, 2, 2)")
        self.segments = segs
        self.dim = 2
        lo = segs.reshape(-1, 2).min(axis=0)
        hi = segs.reshape(-1, 2).max(axis=0)
        self.scale = float(np.sqrt(np.sum((hi - lo) ** 2))) or 1.0

    def _components(self):
        comps = []
        for seg in self.segments:
            p0, p1 = seg[0].copy(), seg[1].copy()
            length = float(np.sqrt(np.sum((p1 - p0) ** 2)))

            def point(t, p0=p0, p1=p1):
                t = np.asarray(t, dtype=np.float64)
                return p0 + t[..., None] * (p1 - p0)

            comps.append(
                _CurveComponent(
                    0.0,
                    1.0,
                    point,
                    lambda t, L=length: L * np.asarray(t),
                    lambda s, L=length: np.asarray(s) / L,
                )
            )
        return comps

    def contains(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        best = np.full(len(pts), np.inf)
        for seg in self.segments:
            d = _segment_distance(pts, seg[0], seg[1])
            best = np.minimum(best, d)
        return best <= tol

    def _sample_points(self, count, seed):
        comps = self._components()
        lengths = np.asarray([c.length for c in comps])
        counts = np.maximum(2, np.round(count * lengths / lengths.sum()).astype(int))
        return self._curve_sample(comps, counts)

    def exact_nearest(self, a) -> ExactNearest:
        a = np.asarray(a, dtype=np.float64)
        cands = []
        for seg in self.segments:
            t = _segment_param(a, seg[0], seg[1])
            p = seg[0] + t * (seg[1] - seg[0])
            cands.append((float(np.sqrt(np.sum((p - a) ** 2))), p))
        dmin = min(c[0] for c in cands)
        tol = 1e-12 * max(self.scale, 1.0)
        members = np.asarray([p for d, p in cands if d <= dmin + tol])
        members = members[lexsort_rows(members)]
        return ExactNearest(dmin, members)


def _segment_param(a: np.ndarray, p0: np.ndarray, p1: np.ndarray) -> float:
    v = p1 - p0
    t = float((a - p0) @ v / (v @ v))
    return min(max(t, 0.0), 1.0)


def _segment_distance(pts: np.ndarray, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    v = p1 - p0
    t = np.clip((pts - p0) @ v / (v @ v), 0.0, 1.0)
    proj = p0 + t[:, None] * v
    return np.sqrt(np.sum((pts - proj) ** 2, axis=1))


_KIND_MAP = {
    "circle": (CircleShape, 2),
    "two_points": (TwoPointsShape, 2),
    "cusp": (CuspShape, 2),
    "half_helix": (None, 3),
    "full_helix": (None, 3),
    "cone": (ConeShape, 3),
    "point_cloud": (PointCloudShape, 0),
    "segment_list": (SegmentListShape, 2),
}


def make_shape(spec: ShapeSpec) -> Shape:
    """Construct a Shape from its spec; validates kind/dim/params."""
    if spec.kind not in _KIND_MAP:
        raise ShapeError(f"unknown shape kind {spec.kind!r}")
    if spec.kind == "half_helix":
        shape: Shape = HelixShape(spec, full=False)
    elif spec.kind == "full_helix":
        shape = HelixShape(spec, full=True)
    else:
        cls, _ = _KIND_MAP[spec.kind]
        shape = cls(spec)
    expected = _KIND_MAP[spec.kind][1]
    if spec.ambient_dim and expected and spec.ambient_dim != expected:
        raise ShapeError(
            f"kind {spec.kind!r} lives in dimension {expected}, got ambient_dim={spec.ambient_dim}"
        )
    if spec.ambient_dim and not expected and spec.ambient_dim != shape.dim:
        raise ShapeError(
            f"point data has dimension {shape.dim}, got ambient_dim={spec.ambient_dim}"
        )
    return shape


def sample_shape(shape: Shape, count: int, seed: int, max_fill: float | None = None) -> SampleCloud:
    """Module-level alias for Shape.sample."""
    return shape.sample(count, seed, max_fill=max_fill)


def exact_nearest(shape: Shape, a) -> ExactNearest:
    """Module-level alias for Shape.exact_nearest."""
    return shape.exact_nearest(a)


def load_point_cloud_csv(path) -> ShapeSpec:
    """Read a point cloud from CSV with header x0,...,x{n-1}."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = [f"x{i}" for i in range(len(header))]
        if [h.strip() for h in header] != expected:
            raise ShapeError(f"CSV header must be {','.join(expected)}")
        rows = [[float(v) for v in row] for row in reader if row]
    pts = np.asarray(rows, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != len(header):
        raise ShapeError("CSV rows must all have the header's width")
    return ShapeSpec("point_cloud", {"points": pts}, ambient_dim=pts.shape[1])
