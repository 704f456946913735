import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ballhull.core_model import ModelParams
from ballhull.hull_geometry import convex_hull
from ballhull.samplers import RngStream, sample_ball_process

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SEED = 20261014


def random_hull(seed: int, d: int = 2, lam: float = 200.0):
    """Hull of a ball-process sample that contains the origin."""
    k = 0
    while True:
        X = sample_ball_process(ModelParams(d, lam), RngStream(seed, k))
        k += 1
        if X.shape[0] > d + 1:
            H = convex_hull(X)
            if H.contains_origin:
                return H, X


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)
