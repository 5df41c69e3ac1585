"""medax: distance functions, closest-point maps, medial axes and inner
metrics for closed subsets of R^n, with experiment harnesses probing how
normal embedding fails exactly where the medial axis closes in."""

__version__ = "0.1.0"

from ._kernels import backend_name
from .innermetric import (
    GeodesicGraph,
    PathEstimate,
    build_geodesic_graph,
    inner_distance,
    project_segment,
)
from .medial import MedialSample, MedialScanReport, is_medial, refine_jump, scan_medial
from .nearfield import (
    NearSet,
    SpatialIndex,
    build_index,
    distance,
    grad_distance,
    jacobian_along_line,
    near_set,
)
from .probes import (
    ConjectureConfig,
    ConjectureTrace,
    LipschitzReport,
    LNEReport,
    ProbeRegion,
    TheoremConfig,
    TheoremVerdict,
    certify_region,
    conjecture_probe,
    estimate_lne_verdict,
    lipschitz_quotient,
    local_lne_constant,
    verify_theorem,
)
from .shapes import (
    SampleCloud,
    Shape,
    ShapeSpec,
    exact_nearest,
    load_point_cloud_csv,
    make_shape,
    sample_shape,
)

__all__ = [
    "__version__",
    "backend_name",
    "GeodesicGraph",
    "PathEstimate",
    "build_geodesic_graph",
    "inner_distance",
    "project_segment",
    "MedialSample",
    "MedialScanReport",
    "is_medial",
    "refine_jump",
    "scan_medial",
    "NearSet",
    "SpatialIndex",
    "build_index",
    "distance",
    "grad_distance",
    "jacobian_along_line",
    "near_set",
    "ConjectureConfig",
    "ConjectureTrace",
    "LipschitzReport",
    "LNEReport",
    "ProbeRegion",
    "TheoremConfig",
    "TheoremVerdict",
    "certify_region",
    "conjecture_probe",
    "estimate_lne_verdict",
    "lipschitz_quotient",
    "local_lne_constant",
    "verify_theorem",
    "SampleCloud",
    "Shape",
    "ShapeSpec",
    "exact_nearest",
    "load_point_cloud_csv",
    "make_shape",
    "sample_shape",
]
