"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one PASS/FAIL line (visible with ``pytest -s``).  Expected
values are frozen from the independent oracles established in the unit
suites: closed-form arclengths, the analytic nearest-point map, brute-grid
minimization, and the unrolled-cone geodesic formula.
"""

import contextlib
import filecmp
import json
import math
import sys

import numpy as np
import pytest

from medax.cli import main as cli_main
from medax.errors import MedialPointError, UndefinedGradientError
from medax.innermetric import build_geodesic_graph, inner_distance, project_segment
from medax.medial import refine_jump, scan_medial
from medax.nearfield import build_index, grad_distance, jacobian_along_line, near_set
from medax.probes import (
    ConjectureConfig,
    TheoremConfig,
    certify_region,
    conjecture_probe,
    lipschitz_quotient,
    verify_theorem,
)


@contextlib.contextmanager
def criterion(number, description):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number} FAIL: {description}", file=sys.stderr)
        raise
    print(f"ACCEPTANCE {number} PASS: {description}")


@pytest.fixture(scope="module")
def helix_cloud_fine(half_helix_shape):
    return half_helix_shape.sample(96000, seed=13)


@pytest.fixture(scope="module")
def helix_index_fine(helix_cloud_fine):
    return build_index(helix_cloud_fine)


@pytest.fixture(scope="module")
def circle_cloud_3k(circle_shape):
    return circle_shape.sample(3000, seed=5)


@pytest.fixture(scope="module")
def circle_index_3k(circle_cloud_3k):
    return build_index(circle_cloud_3k)


@pytest.fixture(scope="module")
def full_helix_index(full_helix_shape):
    return build_index(full_helix_shape.sample(20000, seed=11))


def test_criterion_1_gradient_suite(
    circle_index, two_points_index, cusp_index, helix_index, full_helix_index, cone_index
):
    """Gradient norm 1 +- 1e-6 and finite-difference agreement at 1e-4."""
    cases = [
        (circle_index, ([-2.5, -2.5], [2.5, 2.5])),
        (two_points_index, ([-2.5, -2.5], [2.5, 2.5])),
        (cusp_index, ([-0.5, -1.0], [1.5, 1.0])),
        (helix_index, ([-1.5, -1.5, -0.5], [1.5, 1.5, 5.0])),
        (full_helix_index, ([-1.5, -1.5, -0.5], [1.5, 1.5, 5.0])),
        (cone_index, ([-2.2, -2.2, -0.8], [2.2, 2.2, 2.4])),
    ]
    with criterion(1, "grad norm 1±1e-6, FD match 1e-4 at 500 probes"):
        accepted = 0
        worst_norm = 0.0
        worst_fd = 0.0
        for index, (lo, hi) in cases:
            rng = np.random.default_rng(101)
            lo = np.asarray(lo, float)
            hi = np.asarray(hi, float)
            scale = float(np.sqrt(np.sum((hi - lo) ** 2)))
            h = 1e-5 * scale
            per_shape = 0
            for _ in range(4000):
                if per_shape >= 85:
                    break
                a = lo + rng.uniform(size=len(lo)) * (hi - lo)
                d0, i0 = index.tree.query_one(a)
                if d0 < max(8 * index.fill, 0.02 * scale):
                    continue
                try:
                    g = grad_distance(index, a)
                except (MedialPointError, UndefinedGradientError):
                    continue
                fd = np.zeros(len(a))
                stable = True
                for i in range(len(a)):
                    e = np.zeros(len(a))
                    e[i] = h
                    dp, ip = index.tree.query_one(a + e)
                    dm, im = index.tree.query_one(a - e)
                    stable &= (ip == i0) and (im == i0)
                    fd[i] = (dp - dm) / (2 * h)
                if not stable:
                    continue
                norm_err = abs(np.linalg.norm(g) - 1.0)
                fd_err = np.linalg.norm(g - fd) / np.linalg.norm(fd)
                worst_norm = max(worst_norm, norm_err)
                worst_fd = max(worst_fd, fd_err)
                assert norm_err <= 1e-6
                assert fd_err <= 1e-4
                per_shape += 1
                accepted += 1
        assert accepted >= 500, f"only {accepted} probes accepted"
        print(f"  probes={accepted} worst norm err={worst_norm:.2e} "
              f"worst FD err={worst_fd:.2e}")


def test_criterion_2_blowup_sequence(half_helix_shape):
    """Jacobian norms track sqrt(1 + 1/(4t)) within 2% and increase."""
    with criterion(2, "half-helix axis jacobian blow-up sequence"):
        expected = {1.0: 1.118, 0.25: 1.414, 0.04: 2.693, 0.01: 5.099}
        norms = []
        for t in (1.0, 0.25, 0.04, 0.01):
            J = jacobian_along_line(
                half_helix_shape, ((0, 0, 0), (0, 0, 1)), t, min(1e-4, t * 1e-2)
            )
            n = float(np.linalg.norm(J))
            want = math.sqrt(1.0 + 1.0 / (4.0 * t))
            assert abs(n - want) / want <= 0.02
            assert abs(n - expected[t]) / expected[t] <= 0.02
            norms.append(n)
        assert all(b > a for a, b in zip(norms, norms[1:]))
        print(f"  norms={['%.3f' % n for n in norms]}")


def test_criterion_3_proposition_suite(
    circle_index_3k, two_points_index, cusp_index, helix_index_fine
):
    """Ten certified regions: every quotient below the bound 2(d+sup)/d."""
    circle_scan = scan_medial(circle_index_3k, ([-0.5, -0.5], [0.5, 0.5]), 101)
    tp_scan = scan_medial(two_points_index, ([-1.5, -1.5], [1.5, 1.5]), 61)
    cusp_scan = scan_medial(cusp_index, ([-0.2, -0.6], [1.2, 0.6]), (71, 61))
    helix_scan_axis = scan_medial(
        helix_index_fine, ([-0.006, -0.004, 0.009], [0.006, 0.012, 0.021]), (13, 17, 13)
    )
    regions = [
        ("circle-annulus", circle_index_3k, (2.5, 0.0), 0.4, circle_scan, None),
        ("circle-north", circle_index_3k, (0.0, 1.7), 0.25, circle_scan, None),
        ("twopoints-east", two_points_index, (2.0, 0.0), 0.4, tp_scan, None),
        ("twopoints-upper", two_points_index, (0.9, 0.8), 0.3, tp_scan, None),
        ("cusp-above", cusp_index, (0.3, 0.25), 0.1, cusp_scan, None),
        ("cusp-below", cusp_index, (0.5, -0.45), 0.12, cusp_scan, None),
        ("cusp-tipward", cusp_index, (0.15, 0.35), 0.1, cusp_scan, None),
        ("helix-near-axis", helix_index_fine, (0.0, 0.008, 0.015), 0.0015,
         helix_scan_axis, None),
        ("helix-on-axis-high", helix_index_fine, (0.0, 0.0, 1.5), 0.1, None, 0.2),
        ("helix-endcap", helix_index_fine, (1.3, 0.0, -0.15), 0.1, None, 0.2),
    ]
    with criterion(3, "10 certified medial-free regions obey the bound"):
        annulus = None
        near_axis = None
        for name, index, center, radius, scan, pad in regions:
            region = certify_region(index, center, radius, scan=scan, pad=pad)
            rep = lipschitz_quotient(index, region, 10000, seed=31)
            assert rep.empirical_quotient <= rep.paper_bound, name
            if name == "circle-annulus":
                annulus = rep
            if name == "helix-near-axis":
                near_axis = rep
            print(f"  {name}: quotient={rep.empirical_quotient:.3f} "
                  f"bound={rep.paper_bound:.1f} delta={region.delta:.3g}")
        assert abs(annulus.empirical_quotient - 0.5) <= 0.05
        assert abs(annulus.paper_bound - 6.0) <= 0.7
        assert near_axis.empirical_quotient >= 3.5


def test_criterion_4_on_set_two_lipschitz(
    circle_index_3k, two_points_index, cusp_index, cone_index
):
    """max over exact minimizers of |p - xi| <= 2 |p - q| (1 + 1e-2)."""
    with criterion(4, "on-set two-Lipschitz bound at 1e4 pairs"):
        total = 0
        worst = 0.0
        for index, lo, hi in [
            (circle_index_3k, (-2.0, -2.0), (2.0, 2.0)),
            (two_points_index, (-2.5, -2.5), (2.5, 2.5)),
            (cusp_index, (-0.5, -1.0), (1.5, 1.0)),
            (cone_index, (-2.5, -2.5, -0.5), (2.5, 2.5, 2.5)),
        ]:
            rng = np.random.default_rng(77)
            lo = np.asarray(lo, float)
            hi = np.asarray(hi, float)
            floor = 4 * index.fill
            n_pairs = 0
            while n_pairs < 2500:
                q = lo + rng.uniform(size=len(lo)) * (hi - lo)
                p = index.points[rng.integers(0, len(index.points))]
                sep = float(np.sqrt(np.sum((p - q) ** 2)))
                if sep < max(floor, 1e-9):
                    continue
                ns = near_set(index, q, epsilon=0.0)
                far = float(np.sqrt(np.sum((ns.members - p) ** 2, axis=1)).max())
                ratio = far / sep
                worst = max(worst, ratio)
                assert ratio <= 2.0 * (1.0 + 1e-2)
                n_pairs += 1
            total += n_pairs
        assert total >= 10000
        print(f"  pairs={total} worst ratio={worst:.4f}")


def test_criterion_5_medial_detection(circle_index, two_points_index, cusp_index):
    """Scan locality plus bisection convergence to 1e-6 in <= 40 steps."""
    with criterion(5, "medial scans local; bisection hits 1e-6 in <= 40 steps"):
        rep_c = scan_medial(circle_index, ([-0.5, -0.5], [0.5, 0.5]), 101)
        locs = rep_c.flagged_locations()
        step = rep_c.grid_spec["step"]
        assert len(locs) >= 1
        assert np.sqrt((locs**2).sum(axis=1)).max() <= 2 * step + 1e-12
        rep_t = scan_medial(two_points_index, ([-1.0, -1.0], [1.0, 1.0]), 101)
        locs_t = rep_t.flagged_locations()
        step_t = rep_t.grid_spec["step"]
        assert len(locs_t) >= 1
        assert np.abs(locs_t[:, 0]).max() <= step_t + 1e-12
        jumps = [
            (two_points_index, (-0.7, 0.3), (0.8, 0.3), (0.0, 0.3)),
            (circle_index, (-0.5, -0.2), (0.5, 0.2), (0.0, 0.0)),
            (cusp_index, (0.3, 0.25), (0.3, -0.25), (0.3, 0.0)),
        ]
        for index, u, v, expect in jumps:
            ms = refine_jump(index, u, v, tol=1e-7)
            err = float(np.sqrt(np.sum((ms.location - np.asarray(expect)) ** 2)))
            assert err <= 1e-6
            assert ms.iterations <= 40
        print(f"  circle flags<= {2*step:.3g} of origin; bisection errs < 1e-6")


def test_criterion_6_inner_metric(circle_shape):
    """Circle inner metric pi +- 0.01; projection quarter arc pi/2 +- 0.01."""
    with criterion(6, "inner metric oracles on the circle at 1e4 samples"):
        cloud = circle_shape.sample(10000, seed=7)
        fill = cloud.fill_distance
        graph = build_geodesic_graph(cloud, 5 * fill)
        index = build_index(cloud)
        pe = inner_distance(graph, (1.0, 0.0), (-1.0, 0.0))
        assert abs(pe.length - math.pi) <= 0.01
        ps = project_segment(index, (2.0, 0.0), (0.0, 2.0), steps=200)
        assert abs(ps.length - math.pi / 2) <= 0.01
        rng = np.random.default_rng(9)
        for t1, t2 in rng.uniform(0, 2 * math.pi, size=(50, 2)):
            x = (math.cos(t1), math.sin(t1))
            y = (math.cos(t2), math.sin(t2))
            le = inner_distance(graph, x, y).length
            assert le >= np.sqrt(np.sum((np.subtract(x, y)) ** 2)) - 2 * fill
        assert ps.length >= np.sqrt(np.sum((ps.endpoints[1] - ps.endpoints[0]) ** 2)) - 2 * fill
        print(f"  antipodal={pe.length:.5f} (pi={math.pi:.5f}); "
              f"projection={ps.length:.5f} (pi/2={math.pi/2:.5f})")


def test_criterion_7_theorem_suite(catalog):
    """Named dichotomy verdicts plus a 120-point consistency sweep."""
    with criterion(7, "theorem dichotomy: named cases + 120-point sweep"):
        cusp = catalog["cusp"]
        radii_cusp = [0.2 * 2**-k for k in range(5)]
        v = verify_theorem(cusp, (0.0, 0.0), radii_cusp, TheoremConfig(seed=5))
        assert v.lne_verdict == "diverging"
        assert v.medial_approach
        assert v.consistent
        for r, d in zip(radii_cusp, v.medial_min_distances):
            assert d is not None and d <= r
        circle = catalog["circle"]
        v2 = verify_theorem(circle, (1.0, 0.0), [0.5, 0.25, 0.125], TheoremConfig(seed=5))
        assert v2.lne_verdict == "bounded"
        assert not v2.medial_approach  # no medial sample within 0.5
        assert v2.consistent
        cone = catalog["cone"]
        v3 = verify_theorem(cone, (0.0, 0.0, 0.0), [0.5, 0.25, 0.125], TheoremConfig(seed=5))
        assert v3.lne_verdict == "bounded"
        assert v3.medial_approach  # the converse of the dichotomy fails here
        assert v3.consistent
        light = TheoremConfig(local_count=1400, grid_resolution=11, pair_count=1024, seed=0)
        inconsistent = 0
        for kind, shape in catalog.items():
            for p in shape.random_points(20, seed=21):
                verdict = verify_theorem(shape, p, [0.3, 0.15, 0.075], light)
                inconsistent += not verdict.consistent
        assert inconsistent == 0
        print(f"  named verdicts OK; sweep inconsistencies={inconsistent}/120")


def test_criterion_8_conjecture_probe(cusp_shape, cone_shape):
    """Witness-pair ratios: cusp tracks a^-1/2, cone stays in [1.1, 1.5]."""
    with criterion(8, "witness-pair ratios: cusp ~ a^-1/2, cone flat"):
        trace = conjecture_probe(
            cusp_shape, (0.0, 0.0), 3,
            ConjectureConfig(start_offset=0.04, decay=0.25, seed=3),
        )
        assert not trace.vacuous and len(trace.ratios) == 3
        for ratio, pattern in zip(trace.ratios, (5.0, 10.0, 20.0)):
            assert abs(ratio / pattern - 1.0) <= 0.10
        assert trace.diverges
        trace_cone = conjecture_probe(
            cone_shape, (0.0, 0.0, 0.0), 4,
            ConjectureConfig(start_offset=0.4, decay=0.5, seed=3, base_count=8000),
        )
        assert not trace_cone.vacuous
        assert all(1.1 <= r <= 1.5 for r in trace_cone.ratios)
        assert not trace_cone.diverges
        print(f"  cusp ratios={['%.2f' % r for r in trace.ratios]}; "
              f"cone ratios={['%.3f' % r for r in trace_cone.ratios]}")


def test_criterion_9_determinism(tmp_path):
    """Two CLI runs are byte-identical modulo the manifest timestamp."""
    cfg = {
        "shape": {"kind": "cusp", "params": {}},
        "sample_count": 4000,
        "seed": 7,
        "experiments": [
            {"name": "scan", "type": "scan-medial",
             "box": [[0.0, -0.1], [0.5, 0.1]], "resolution": [81, 41],
             "probes": {"origin": [0.0, 0.0]}},
            {"name": "lips", "type": "lipschitz",
             "region": {"center": [0.3, 0.25], "radius": 0.1}, "pair_count": 2000,
             "scan": {"box": [[-0.2, -0.6], [1.2, 0.6]], "resolution": [71, 61]}},
            {"name": "lne", "type": "lne-field", "point": [0.0, 0.0],
             "radii": [0.2, 0.1, 0.05, 0.025, 0.0125], "local_count": 2000,
             "expect": {"verdict": "diverging"}},
            {"name": "thm", "type": "verify-theorem", "point": [0.0, 0.0],
             "radii": [0.2, 0.1, 0.05, 0.025, 0.0125], "local_count": 1400,
             "grid_resolution": 11, "pair_count": 1024,
             "expect": {"lne_verdict": "diverging", "medial_approach": True}},
            {"name": "conj", "type": "conjecture", "point": [0.0, 0.0], "count": 2,
             "start_offset": 0.04, "decay": 0.25,
             "expect": {"diverges": False, "ratio_range": [4.5, 11.0]}},
        ],
    }
    with criterion(9, "byte-identical reruns modulo manifest timestamp"):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert cli_main(["run", "--config", str(cfg_path), "--out", str(out1)]) == 0
        assert cli_main(["run", "--config", str(cfg_path), "--out", str(out2)]) == 0
        names = sorted(p.name for p in out1.iterdir())
        assert names == sorted(p.name for p in out2.iterdir())
        for name in names:
            if name == "manifest.json":
                m1 = json.loads((out1 / name).read_text())
                m2 = json.loads((out2 / name).read_text())
                m1.pop("timestamp"), m2.pop("timestamp")
                assert m1 == m2
            else:
                assert filecmp.cmp(out1 / name, out2 / name, shallow=False), name
        print(f"  {len(names)} output files byte-identical")
