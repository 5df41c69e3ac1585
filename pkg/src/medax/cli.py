"""Config-driven experiment runner.

One JSON config describes a shape, a sampling budget, and a list of
experiments (scan-medial | lne-field | lipschitz | verify-theorem |
conjecture).  Each experiment writes a JSON report, a CSV table and an SVG
slice plot; the run writes a manifest plus a combined summary CSV.  Exit
status is 0 iff every check embedded in the experiments passed.

Reruns with identical configs are byte-identical except for the manifest
timestamp.  MEDAX_SEED_OVERRIDE=<int> replaces every seed in the run.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from ._util import derive_seed
from .errors import ConfigError, MedaxError
from .innermetric import build_geodesic_graph
from .medial import scan_medial
from .nearfield import build_index
from .probes import (
    ConjectureConfig,
    TheoremConfig,
    certify_region,
    conjecture_probe,
    estimate_lne_verdict,
    lipschitz_quotient,
    verify_theorem,
)
from .shapes import ShapeSpec, load_point_cloud_csv, make_shape
from .svgplot import emit_svg

log = logging.getLogger("medax")

EXPERIMENT_TYPES = ("scan-medial", "lne-field", "lipschitz", "verify-theorem", "conjecture")
SHAPE_KINDS = (
    "circle",
    "two_points",
    "cusp",
    "half_helix",
    "full_helix",
    "cone",
    "point_cloud",
    "segment_list",
)
SEED_ENV = "MEDAX_SEED_OVERRIDE"


# ---------------------------------------------------------------------------
# config validation


def _require(cfg: dict, field: str, types, path: str):
    if field not in cfg:
        raise ConfigError("missing required field", f"{path}.{field}")
    if types is not None and not isinstance(cfg[field], types):
        raise ConfigError(
            f"expected {getattr(types, '__name__', types)}", f"{path}.{field}"
        )
    return cfg[field]


def validate_config(cfg: dict) -> dict:
    """Validate and normalize a config document; raises ConfigError."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object", "$")
    shape = _require(cfg, "shape", dict, "$")
    kind = _require(shape, "kind", str, "$.shape")
    if kind not in SHAPE_KINDS:
        raise ConfigError(f"unknown kind {kind!r}", "$.shape.kind")
    params = shape.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("expected object", "$.shape.params")
    if "csv" in params and kind == "point_cloud":
        pass  # resolved at run time
    _require(cfg, "sample_count", int, "$")
    if cfg["sample_count"] < 2:
        raise ConfigError("must be >= 2", "$.sample_count")
    _require(cfg, "seed", int, "$")
    if "connect_radius_factor" in cfg and not isinstance(
        cfg["connect_radius_factor"], (int, float)
    ):
        raise ConfigError("expected number", "$.connect_radius_factor")
    exps = _require(cfg, "experiments", list, "$")
    names = set()
    for i, exp in enumerate(exps):
        path = f"$.experiments[{i}]"
        if not isinstance(exp, dict):
            raise ConfigError("expected object", path)
        etype = _require(exp, "type", str, path)
        if etype not in EXPERIMENT_TYPES:
            raise ConfigError(f"unknown experiment type {etype!r}", f"{path}.type")
        name = exp.get("name", f"{etype}-{i}")
        if name in names:
            raise ConfigError(f"duplicate experiment name {name!r}", f"{path}.name")
        names.add(name)
        if etype == "scan-medial":
            box = _require(exp, "box", list, path)
            if len(box) != 2 or len(box[0]) != len(box[1]):
                raise ConfigError("box must be [lo, hi] of equal length", f"{path}.box")
            _require(exp, "resolution", (int, list), path)
        elif etype == "lipschitz":
            region = _require(exp, "region", dict, path)
            _require(region, "center", list, f"{path}.region")
            _require(region, "radius", (int, float), f"{path}.region")
        elif etype in ("lne-field", "verify-theorem"):
            _require(exp, "point", list, path)
            radii = _require(exp, "radii", list, path)
            if any(b >= a for a, b in zip(radii, radii[1:])):
                raise ConfigError("radii must be strictly decreasing", f"{path}.radii")
        elif etype == "conjecture":
            _require(exp, "point", list, path)
    if "output_dir" in cfg and not isinstance(cfg["output_dir"], str):
        raise ConfigError("expected string", "$.output_dir")
    return cfg


def _shape_from_config(cfg: dict):
    sc = cfg["shape"]
    params = dict(sc.get("params", {}))
    if sc["kind"] == "point_cloud" and "csv" in params:
        spec = load_point_cloud_csv(params["csv"])
    else:
        spec = ShapeSpec(sc["kind"], params, int(sc.get("ambient_dim", 0)))
    return make_shape(spec)


# ---------------------------------------------------------------------------
# JSON helpers (deterministic output)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# experiment drivers


class _RunContext:
    """Lazily built shared objects for one run."""

    def __init__(self, cfg: dict, seed_override: int | None):
        self.cfg = cfg
        self.shape = _shape_from_config(cfg)
        self.seed_override = seed_override
        self.base_seed = seed_override if seed_override is not None else int(cfg["seed"])
        self.connect_factor = float(cfg.get("connect_radius_factor", 5.0))
        self._cloud = None
        self._index = None
        self._graph = None

    def seed_for(self, i: int) -> int:
        if self.seed_override is not None:
            return self.seed_override
        return derive_seed(self.base_seed, i)

    @property
    def cloud(self):
        if self._cloud is None:
            self._cloud = self.shape.sample(int(self.cfg["sample_count"]), self.base_seed)
        return self._cloud

    @property
    def index(self):
        if self._index is None:
            self._index = build_index(self.cloud)
        return self._index

    @property
    def graph(self):
        if self._graph is None:
            radius = self.connect_factor * max(self.cloud.fill_distance, 1e-300)
            self._graph = build_geodesic_graph(self.cloud, radius)
        return self._graph


def _check(name, value, threshold, passed) -> dict:
    return {
        "name": name,
        "value": _jsonable(value),
        "threshold": _jsonable(threshold),
        "passed": bool(passed),
    }


def _run_scan_medial(ctx: _RunContext, exp: dict, seed: int):
    box = (np.asarray(exp["box"][0], float), np.asarray(exp["box"][1], float))
    report = scan_medial(
        ctx.index,
        box,
        exp["resolution"],
        epsilon=exp.get("epsilon"),
        lam=exp.get("lambda"),
        probes=exp.get("probes"),
    )
    checks = []
    expect = exp.get("expect", {})
    for probe, limit in expect.get("probe_max_distance", {}).items():
        got = report.min_distance_to.get(probe)
        ok = got is not None and got <= limit
        checks.append(_check(f"probe_distance[{probe}]", got, limit, ok))
    result = {
        "flagged_count": int(report.flags.sum()),
        "node_count": len(report.nodes),
        "min_distance_to": report.min_distance_to,
        "epsilon": report.epsilon,
        "lambda": report.lam,
        "grid_step": report.grid_spec["step"],
    }
    return result, checks, report


def _run_lipschitz(ctx: _RunContext, exp: dict, seed: int):
    region_cfg = exp["region"]
    scan = None
    if "scan" in exp:
        sc = exp["scan"]
        scan = scan_medial(
            ctx.index,
            (np.asarray(sc["box"][0], float), np.asarray(sc["box"][1], float)),
            sc["resolution"],
        )
    region = certify_region(
        ctx.index,
        np.asarray(region_cfg["center"], float),
        float(region_cfg["radius"]),
        scan=scan,
        pad=region_cfg.get("pad"),
    )
    rep = lipschitz_quotient(
        ctx.index, region, int(exp.get("pair_count", 4096)), seed
    )
    checks = [
        _check(
            "quotient_le_bound", rep.empirical_quotient, rep.paper_bound,
            rep.empirical_quotient <= rep.paper_bound,
        ),
        _check(
            "on_set_quotient_le_2", rep.on_set_quotient, 2.0 * (1.0 + 1e-2),
            rep.on_set_quotient <= 2.0 * (1.0 + 1e-2),
        ),
    ]
    expect = exp.get("expect", {})
    if "quotient_range" in expect:
        lo, hi = expect["quotient_range"]
        checks.append(
            _check("quotient_range", rep.empirical_quotient, [lo, hi],
                   lo <= rep.empirical_quotient <= hi)
        )
    return rep.to_dict(), checks, rep


def _run_lne_field(ctx: _RunContext, exp: dict, seed: int):
    refine = bool(exp.get("refine", True))
    shape = ctx.shape if refine else None
    rep = estimate_lne_verdict(
        None if refine else ctx.graph,
        None if refine else ctx.index,
        np.asarray(exp["point"], float),
        exp["radii"],
        pair_count=int(exp.get("pair_count", 4096)),
        seed=seed,
        shape=shape,
        local_count=int(exp.get("local_count", 2500)),
        connect_factor=ctx.connect_factor,
    )
    checks = [
        _check("constants_ge_1", min(rep.constants), 0.99,
               min(rep.constants) >= 0.99)
    ]
    expect = exp.get("expect", {})
    if "verdict" in expect:
        checks.append(_check("verdict", rep.verdict, expect["verdict"],
                             rep.verdict == expect["verdict"]))
    return rep.to_dict(), checks, rep


def _run_verify_theorem(ctx: _RunContext, exp: dict, seed: int):
    cfg = TheoremConfig(
        local_count=int(exp.get("local_count", 2500)),
        grid_resolution=int(exp.get("grid_resolution", 21)),
        pair_count=int(exp.get("pair_count", 4096)),
        seed=seed,
        connect_factor=ctx.connect_factor,
    )
    verdict = verify_theorem(ctx.shape, np.asarray(exp["point"], float), exp["radii"], cfg)
    checks = [_check("consistent", verdict.consistent, True, verdict.consistent)]
    expect = exp.get("expect", {})
    if "lne_verdict" in expect:
        checks.append(_check("lne_verdict", verdict.lne_verdict, expect["lne_verdict"],
                             verdict.lne_verdict == expect["lne_verdict"]))
    if "medial_approach" in expect:
        checks.append(_check("medial_approach", verdict.medial_approach,
                             expect["medial_approach"],
                             verdict.medial_approach == expect["medial_approach"]))
    return verdict.to_dict(), checks, verdict


def _run_conjecture(ctx: _RunContext, exp: dict, seed: int):
    cfg = ConjectureConfig(
        anchors=exp.get("anchors"),
        start_offset=float(exp.get("start_offset", 0.04)),
        decay=float(exp.get("decay", 0.25)),
        seed=seed,
        base_count=int(exp.get("base_count", 4000)),
        max_count=int(exp.get("max_count", 32000)),
        connect_factor=ctx.connect_factor,
    )
    trace = conjecture_probe(ctx.shape, np.asarray(exp["point"], float),
                             int(exp.get("count", 3)), cfg)
    checks = []
    expect = exp.get("expect", {})
    if "diverges" in expect:
        checks.append(_check("diverges", trace.diverges, expect["diverges"],
                             trace.diverges == expect["diverges"]))
    if "ratio_range" in expect and not trace.vacuous:
        lo, hi = expect["ratio_range"]
        ok = all(lo <= r <= hi for r in trace.ratios)
        checks.append(_check("ratio_range", trace.ratios, [lo, hi], ok))
    if "vacuous" in expect:
        checks.append(_check("vacuous", trace.vacuous, expect["vacuous"],
                             trace.vacuous == expect["vacuous"]))
    return trace.to_dict(), checks, trace


_DRIVERS = {
    "scan-medial": _run_scan_medial,
    "lipschitz": _run_lipschitz,
    "lne-field": _run_lne_field,
    "verify-theorem": _run_verify_theorem,
    "conjecture": _run_conjecture,
}


# ---------------------------------------------------------------------------
# CSV / SVG emission


def _write_experiment_csv(path: Path, etype: str, result: dict, raw) -> None:
    if etype == "scan-medial":
        raw.write_csv(path)
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if etype == "lipschitz":
            w.writerow(["key", "value"])
            flat = result.copy()
            region = flat.pop("region")
            for k, v in sorted(region.items()):
                w.writerow([f"region.{k}", v])
            for k, v in sorted(flat.items()):
                w.writerow([k, v])
        elif etype == "lne-field":
            w.writerow(["radius", "constant"])
            for r, c in zip(result["radii"], result["constants"]):
                w.writerow([repr(float(r)), repr(float(c))])
        elif etype == "verify-theorem":
            w.writerow(["radius", "constant", "medial_min_distance"])
            for r, c, m in zip(
                result["radii"], result["constants"], result["medial_min_distances"]
            ):
                w.writerow([repr(float(r)), repr(float(c)),
                            "" if m is None else repr(float(m))])
        elif etype == "conjecture":
            w.writerow(["anchor", "ratio"])
            for a, r in zip(result["medial_points"], result["ratios"]):
                w.writerow([json.dumps(a), repr(float(r))])


def _write_experiment_svg(path: Path, ctx: _RunContext, etype: str, raw, exp: dict) -> None:
    slice_spec = exp.get("slice")
    if ctx.shape.dim == 3 and slice_spec is None:
        slice_spec = {"axis": "y", "value": 0.0, "thickness": 0.1 * ctx.shape.scale}
    medial = []
    paths = []
    if etype == "scan-medial":
        medial = raw.samples
    elif etype == "verify-theorem":
        pass
    elif etype == "conjecture" and not raw.vacuous:
        from .medial import MedialSample

        medial = [
            MedialSample(np.asarray(p), r, (np.asarray(a), np.asarray(b)), "grid_spread")
            for p, (a, b), r in zip(raw.medial_points, raw.witness_pairs, raw.ratios)
        ]
    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        emit_svg(
            path,
            shape_points=ctx.cloud.points,
            medial_samples=medial,
            paths=paths,
            slice_spec=slice_spec,
        )


# ---------------------------------------------------------------------------
# run orchestration


def run_experiments(cfg: dict, out_dir: Path, seed_override: int | None) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = _RunContext(cfg, seed_override)
    all_passed = True
    outputs = []
    summary_rows = []
    for i, exp in enumerate(cfg["experiments"]):
        etype = exp["type"]
        name = exp.get("name", f"{etype}-{i}")
        seed = ctx.seed_for(i)
        log.info("running %s (%s), seed %d", name, etype, seed)
        result, checks, raw = _DRIVERS[etype](ctx, exp, seed)
        passed = all(c["passed"] for c in checks)
        all_passed &= passed
        report = {
            "name": name,
            "type": etype,
            "parameters": {
                k: _jsonable(v) for k, v in exp.items() if k not in ("name", "type")
            },
            "seed": seed,
            "sample_seed": ctx.base_seed,
            "fill_distance": ctx.cloud.fill_distance,
            "backend": _kernels.backend_name(),
            "result": result,
            "checks": checks,
            "passed": passed,
        }
        report_path = out_dir / f"{name}.report.json"
        _write_json(report_path, report)
        outputs.append(report_path.name)
        csv_path = out_dir / f"{name}.csv"
        _write_experiment_csv(csv_path, etype, result, raw)
        outputs.append(csv_path.name)
        svg_path = out_dir / f"{name}.svg"
        _write_experiment_svg(svg_path, ctx, etype, raw, exp)
        outputs.append(svg_path.name)
        for c in checks:
            summary_rows.append([name, etype, c["name"], json.dumps(c["value"]),
                                 json.dumps(c["threshold"]), int(c["passed"])])
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["experiment", "type", "check", "value", "threshold", "passed"])
        w.writerows(summary_rows)
    manifest = {
        "config": cfg,
        "version": __version__,
        "backend": _kernels.backend_name(),
        "seed_override": seed_override,
        "outputs": sorted(outputs + ["summary.csv"]),
        "passed": all_passed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    _write_json(out_dir / "manifest.json", manifest)
    return 0 if all_passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="medax",
        description="distance fields, medial axes and inner metrics on sampled shapes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiments in a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.add_argument("--verbose", action="store_true")
    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("--config", required=True)
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        print(f"config not found: {args.config}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    try:
        validate_config(cfg)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print("config ok")
        return 0
    override = os.environ.get(SEED_ENV)
    seed_override = int(override) if override else None
    out_dir = Path(args.out or cfg.get("output_dir", "medax_out"))
    try:
        return run_experiments(cfg, out_dir, seed_override)
    except MedaxError as exc:
        print(f"experiment failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
