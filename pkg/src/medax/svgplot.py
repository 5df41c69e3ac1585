"""Standalone SVG slice plots: shape samples, medial samples, probe paths.

Hand-rolled SVG writer (no plotting dependency): gray shape points, medial
samples colored by spread, polyline overlays, axes and a legend.  For
3-d data a slice plane (axis, value, thickness) projects onto the two
remaining axes.
"""

from __future__ import annotations

import warnings

import numpy as np

_W = 640
_H = 640
_MARGIN = 60
_MAX_SHAPE_POINTS = 4000


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _color(t: float) -> str:
    """Blue (0) to red (1) ramp."""
    t = min(max(t, 0.0), 1.0)
    r = int(40 + 215 * t)
    g = int(70 + 40 * (1 - t))
    b = int(220 * (1 - t) + 35)
    return f"rgb({r},{g},{b})"


def _slice_project(points: np.ndarray, slice_spec: dict | None):
    """Project points to 2-d; returns (xy, kept_mask, axis_names)."""
    dim = points.shape[1] if len(points) else 2
    if dim == 2:
        return points, np.ones(len(points), dtype=bool), ("x0", "x1")
    if slice_spec is None:
        raise ValueError("3-d data needs a slice_spec {axis, value, thickness}")
    axis = int(slice_spec["axis"]) if not isinstance(slice_spec["axis"], str) else {
        "x": 0, "y": 1, "z": 2, "x0": 0, "x1": 1, "x2": 2
    }[slice_spec["axis"]]
    value = float(slice_spec.get("value", 0.0))
    thickness = float(slice_spec.get("thickness", 0.1))
    keep = np.abs(points[:, axis] - value) <= thickness
    rest = [d for d in range(dim) if d != axis]
    return points[np.ix_(keep, rest)] if keep.any() else np.empty((0, 2)), keep, (
        f"x{rest[0]}",
        f"x{rest[1]}",
    )


class SvgCanvas:
    def __init__(self, lo, hi, labels=("x0", "x1")):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        span = np.maximum(self.hi - self.lo, 1e-12)
        pad = 0.05 * span
        self.lo = self.lo - pad
        self.hi = self.hi + pad
        self.labels = labels
        self.parts: list[str] = []

    def tx(self, p) -> tuple[float, float]:
        u = (p[0] - self.lo[0]) / (self.hi[0] - self.lo[0])
        v = (p[1] - self.lo[1]) / (self.hi[1] - self.lo[1])
        return _MARGIN + u * (_W - 2 * _MARGIN), _H - _MARGIN - v * (_H - 2 * _MARGIN)

    def points(self, pts, radius, fill, opacity=1.0, title=None):
        for p in pts:
            x, y = self.tx(p)
            t = f"><title>{title}</title></circle>" if title else "/>"
            self.parts.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{radius}" '
                f'fill="{fill}" fill-opacity="{opacity}"{t}'
            )

    def polyline(self, pts, stroke, width=1.5):
        if len(pts) < 2:
            return
        coords = " ".join("%s,%s" % (_fmt(x), _fmt(y)) for x, y in (self.tx(p) for p in pts))
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{width}"/>'
        )

    def _axes(self):
        x0, y0 = _MARGIN, _H - _MARGIN
        x1, y1 = _W - _MARGIN, _MARGIN
        self.parts.append(
            f'<rect x="{x0}" y="{y1}" width="{x1-x0}" height="{y0-y1}" '
            'fill="none" stroke="#333" stroke-width="1"/>'
        )
        for k in range(5):
            fx = self.lo[0] + (self.hi[0] - self.lo[0]) * k / 4
            fy = self.lo[1] + (self.hi[1] - self.lo[1]) * k / 4
            px = x0 + (x1 - x0) * k / 4
            py = y0 - (y0 - y1) * k / 4
            self.parts.append(
                f'<text x="{_fmt(px)}" y="{y0+18}" font-size="11" text-anchor="middle">{_fmt(fx)}</text>'
            )
            self.parts.append(
                f'<text x="{x0-8}" y="{_fmt(py+4)}" font-size="11" text-anchor="end">{_fmt(fy)}</text>'
            )
        self.parts.append(
            f'<text x="{(x0+x1)//2}" y="{_H-18}" font-size="13" text-anchor="middle">{self.labels[0]}</text>'
        )
        self.parts.append(
            f'<text x="18" y="{(y0+y1)//2}" font-size="13" text-anchor="middle" '
            f'transform="rotate(-90 18 {(y0+y1)//2})">{self.labels[1]}</text>'
        )

    def legend(self, entries):
        x = _W - _MARGIN - 160
        y = _MARGIN + 10
        for label, color in entries:
            self.parts.append(f'<circle cx="{x}" cy="{y}" r="4" fill="{color}"/>')
            self.parts.append(
                f'<text x="{x+10}" y="{y+4}" font-size="12">{label}</text>'
            )
            y += 18

    def render(self) -> str:
        self._axes()
        body = "\n".join(self.parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">\n<rect width="100%" height="100%" fill="white"/>\n'
            f"{body}\n</svg>\n"
        )


def emit_svg(
    path,
    shape_points: np.ndarray | None = None,
    medial_samples=None,
    paths=None,
    slice_spec: dict | None = None,
) -> None:
    """Write a slice plot; warns and writes an empty frame when the slice
    misses all data."""
    layers = []
    medial_samples = medial_samples or []
    paths = paths or []
    pts2 = np.empty((0, 2))
    if shape_points is not None and len(shape_points):
        if len(shape_points) > _MAX_SHAPE_POINTS:
            stride = int(np.ceil(len(shape_points) / _MAX_SHAPE_POINTS))
            shape_points = shape_points[::stride]
        pts2, _, labels = _slice_project(shape_points, slice_spec)
        layers.append(("shape", pts2))
    else:
        labels = ("x0", "x1")
    med_pts = (
        np.stack([np.asarray(s.location) for s in medial_samples])
        if medial_samples
        else np.empty((0, pts2.shape[1] if pts2.size else 2))
    )
    med2 = np.empty((0, 2))
    spreads = np.asarray([s.spread for s in medial_samples]) if medial_samples else np.empty(0)
    if len(med_pts):
        med2, keep, labels = _slice_project(med_pts, slice_spec)
        spreads = spreads[keep]
    path2 = []
    for pe in paths:
        verts = np.asarray(pe.vertices)
        v2, _, labels2 = _slice_project(verts, slice_spec)
        if len(v2):
            path2.append(v2)
            labels = labels2
    allpts = [a for a in [pts2, med2] + path2 if len(a)]
    if not allpts:
        warnings.warn("slice plane misses all data; writing an empty plot", stacklevel=2)
        canvas = SvgCanvas(np.zeros(2), np.ones(2), labels)
        with open(path, "w") as fh:
            fh.write(canvas.render())
        return
    stacked = np.concatenate(allpts)
    canvas = SvgCanvas(stacked.min(axis=0), stacked.max(axis=0), labels)
    if len(pts2):
        canvas.points(pts2, 1.2, "#9a9a9a", opacity=0.6)
    if len(med2):
        smax = float(spreads.max()) if len(spreads) else 1.0
        for p, s in zip(med2, spreads):
            canvas.points([p], 2.5, _color(s / smax if smax > 0 else 1.0))
    for v2 in path2:
        canvas.polyline(v2, "#0a7d36", width=2.0)
    entries = []
    if len(pts2):
        entries.append(("shape samples", "#9a9a9a"))
    if len(med2):
        entries.append(("medial (by spread)", _color(0.8)))
    if path2:
        entries.append(("paths", "#0a7d36"))
    canvas.legend(entries)
    with open(path, "w") as fh:
        fh.write(canvas.render())
