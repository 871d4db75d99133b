import numpy as np
import pytest

from curvefield.core import Grid3, Polyline, Spacing
from curvefield.groundtruth import attraction_field, closeness_map, distance_map
from curvefield.synth import standard_fixture

FIXTURE_KINDS = ("line", "arc", "helix", "cane", "sinusoid")


def _random_polyline(rng, n_points=None, scale=5.0):
    """Random walk with distinct consecutive points."""
    n = int(n_points if n_points is not None else rng.integers(2, 30))
    steps = rng.normal(0.0, scale, (n - 1, 3))
    lengths = np.linalg.norm(steps, axis=1)
    steps[lengths < 1e-3] += 0.1
    pts = np.vstack([rng.normal(0, scale, 3), steps]).cumsum(axis=0)
    return Polyline(pts)


@pytest.fixture
def random_polyline():
    """Factory: random_polyline(rng, n_points=None, scale=5.0) -> Polyline."""
    return _random_polyline


@pytest.fixture(scope="session")
def fixture_kinds():
    return FIXTURE_KINDS


@pytest.fixture(scope="session")
def grid64():
    return Grid3(shape=(64, 64, 64), spacing=Spacing.isotropic(2.0))


@pytest.fixture(scope="session")
def oracle_data(grid64):
    """Per-fixture oracle bundle, computed once per session."""
    cache = {}

    def build(kind):
        if kind not in cache:
            curve = standard_fixture(kind, grid64)
            field = attraction_field(grid64, curve)
            cache[kind] = {
                "grid": grid64,
                "curve": curve,
                "field": field,
                "closeness": closeness_map(field, 10.0),
                "distance": distance_map(field),
            }
        return cache[kind]

    return build
