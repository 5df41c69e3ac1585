import numpy as np
import pytest

from medax.innermetric import build_geodesic_graph
from medax.nearfield import build_index
from medax.shapes import ShapeSpec, make_shape


@pytest.fixture(scope="session")
def circle_shape():
    return make_shape(ShapeSpec("circle", {"radius": 1.0}))


@pytest.fixture(scope="session")
def circle_cloud(circle_shape):
    return circle_shape.sample(2000, seed=7)


@pytest.fixture(scope="session")
def circle_index(circle_cloud):
    return build_index(circle_cloud)


@pytest.fixture(scope="session")
def circle_cloud_10k(circle_shape):
    return circle_shape.sample(10000, seed=7)


@pytest.fixture(scope="session")
def circle_index_10k(circle_cloud_10k):
    return build_index(circle_cloud_10k)


@pytest.fixture(scope="session")
def circle_graph_10k(circle_cloud_10k):
    return build_geodesic_graph(circle_cloud_10k, 5 * circle_cloud_10k.fill_distance)


@pytest.fixture(scope="session")
def two_points_shape():
    return make_shape(ShapeSpec("two_points"))


@pytest.fixture(scope="session")
def two_points_index(two_points_shape):
    return build_index(two_points_shape.sample(2, seed=0))


@pytest.fixture(scope="session")
def cusp_shape():
    return make_shape(ShapeSpec("cusp"))


@pytest.fixture(scope="session")
def cusp_cloud(cusp_shape):
    return cusp_shape.sample(4000, seed=1)


@pytest.fixture(scope="session")
def cusp_index(cusp_cloud):
    return build_index(cusp_cloud)


@pytest.fixture(scope="session")
def cusp_graph(cusp_cloud):
    return build_geodesic_graph(cusp_cloud, 5 * cusp_cloud.fill_distance)


@pytest.fixture(scope="session")
def half_helix_shape():
    return make_shape(ShapeSpec("half_helix"))


@pytest.fixture(scope="session")
def helix_cloud(half_helix_shape):
    return half_helix_shape.sample(20000, seed=11)


@pytest.fixture(scope="session")
def helix_index(helix_cloud):
    return build_index(helix_cloud)


@pytest.fixture(scope="session")
def full_helix_shape():
    return make_shape(ShapeSpec("full_helix"))


@pytest.fixture(scope="session")
def cone_shape():
    return make_shape(ShapeSpec("cone"))


@pytest.fixture(scope="session")
def cone_cloud(cone_shape):
    return cone_shape.sample(20000, seed=3)


@pytest.fixture(scope="session")
def cone_index(cone_cloud):
    return build_index(cone_cloud)


@pytest.fixture(scope="session")
def catalog(circle_shape, two_points_shape, cusp_shape, cone_shape,
            half_helix_shape, full_helix_shape):
    return {
        "circle": circle_shape,
        "two_points": two_points_shape,
        "cusp": cusp_shape,
        "cone": cone_shape,
        "half_helix": half_helix_shape,
        "full_helix": full_helix_shape,
    }


def rand_box_points(rng, lo, hi, count):
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    return lo + rng.uniform(size=(count, len(lo))) * (hi - lo)
