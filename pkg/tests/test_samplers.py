import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from ballhull.core_model import ModelParams
from ballhull.errors import ResourceGuard
from ballhull.samplers import (
    RngStream,
    Window,
    ball_mean_count,
    dual_mean_count,
    halfspace_mean_count,
    polar_box_mean_count,
    sample_ball_polar_box,
    sample_ball_process,
    sample_dual_radial_process,
    sample_halfspace_box,
    sample_halfspace_process,
    stream_id,
)


def test_ball_mean_count_examples():
    assert ball_mean_count(ModelParams(2, 100.0)) == pytest.approx(100 * math.pi)
    assert halfspace_mean_count(2, 0.0, Window(5.0, 4.0)) == pytest.approx(40.0)
    assert dual_mean_count(1.0, 10.0, 2.0) == pytest.approx(20 * math.pi)


def test_ball_counts_match_mean():
    p = ModelParams(2, 100.0)
    n = np.array([sample_ball_process(p, RngStream(1, i)).shape[0] for i in range(10_000)])
    assert abs(n.mean() - 100 * math.pi) <= 4 * math.sqrt(100 * math.pi / n.size)


@pytest.mark.parametrize("d,delta", [(2, 0.0), (3, 0.0), (2, 1.5)])
def test_ball_radial_law(d, delta):
    p = ModelParams(d, 2000.0, delta)
    R = np.concatenate([np.linalg.norm(sample_ball_process(p, RngStream(2, i)), axis=1) for i in range(50)])
    assert R.size > 50_000
    res = stats.kstest(1 - R, stats.beta(delta + 1, d).cdf)
    assert res.statistic <= 0.02
    assert np.all(R <= 1.0)


def test_ball_small_lambda_mostly_empty():
    p = ModelParams(2, 1e-6)
    assert sum(sample_ball_process(p, RngStream(3, i)).shape[0] for i in range(200)) <= 1


def test_halfspace_sampler():
    w = Window(5.0, 4.0)
    counts = [sample_halfspace_process(2, 0.0, w, RngStream(4, i)).shape[0] for i in range(10_000)]
    assert abs(np.mean(counts) - 40.0) <= 4 * math.sqrt(40.0 / 10_000)
    P = np.concatenate([sample_halfspace_process(2, 0.0, w, RngStream(4, i)) for i in range(100)])
    assert np.all(np.abs(P[:, 0]) <= 5.0) and np.all((P[:, 1] >= 0) & (P[:, 1] <= 4.0))
    assert stats.kstest(P[:, 1] / 4.0, "uniform").statistic <= 0.03


def test_halfspace_delta_one():
    P = np.concatenate([sample_halfspace_process(2, 1.0, Window(5.0, 1.0), RngStream(5, i)) for i in range(4000)])
    assert stats.kstest(P[:, 1] ** 2, "uniform").statistic <= 0.02


def test_dual_radial_sampler():
    counts, R = [], []
    for i in range(10_000):
        U, r = sample_dual_radial_process(1.0, 10.0, 2.0, RngStream(6, i))
        counts.append(r.size)
        R.append(r)
        assert np.allclose(np.linalg.norm(U, axis=1), 1.0)
    assert abs(np.mean(counts) - 20 * math.pi) <= 4 * math.sqrt(20 * math.pi / 10_000)
    R = np.concatenate(R)
    assert R.min() > 1.0 and R.max() <= 2.0
    # alpha = 1, d = 2: radius uniform on (1, 2]
    assert stats.kstest(R - 1.0, "uniform").statistic <= 0.01


def test_dual_alpha_d_volume_uniform():
    R = np.concatenate([sample_dual_radial_process(2.0, 50.0, 2.0, RngStream(7, i))[1] for i in range(200)])
    assert stats.kstest((R**2 - 1) / 3, "uniform").statistic <= 0.02


def test_dual_rmax_near_one_empty():
    assert sum(sample_dual_radial_process(1.0, 10.0, 1 + 1e-12, RngStream(8, i))[1].size for i in range(100)) == 0


def test_determinism():
    p = ModelParams(3, 500.0, 0.5)
    a = sample_ball_process(p, RngStream(11, stream_id("exp", 3)))
    b = sample_ball_process(p, RngStream.for_replicate(11, "exp", 3))
    assert np.array_equal(a, b)
    c = sample_ball_process(p, RngStream.for_replicate(11, "exp", 4))
    assert not np.array_equal(a, c)


def test_resource_guard():
    with pytest.raises(ResourceGuard):
        sample_ball_process(ModelParams(2, 1e12), RngStream(1))


@pytest.mark.parametrize("d", [2, 3])
def test_polar_box_mean(d):
    p = ModelParams(d, 5000.0)
    m = polar_box_mean_count(p, 0.9, 1.0, 0.0, 0.4)
    n = [sample_ball_polar_box(p, RngStream(9, i), 0.9, 1.0, 0.0, 0.4).shape[0] for i in range(2000)]
    assert abs(np.mean(n) - m) <= 4 * math.sqrt(m / 2000)
    X = sample_ball_polar_box(p, RngStream(10), 0.9, 1.0, 0.1, 0.4)
    r = np.linalg.norm(X, axis=1)
    ang = np.arccos(np.clip(X[:, 0] / r, -1, 1))
    assert np.all((r >= 0.9) & (r <= 1.0)) and np.all((ang >= 0.1 - 1e-12) & (ang <= 0.4 + 1e-12))


def test_full_polar_box_equals_ball_mean():
    p = ModelParams(3, 1000.0)
    assert polar_box_mean_count(p, 0.0, 1.0, 0.0, math.pi) == pytest.approx(ball_mean_count(p), rel=1e-12)


@given(st.floats(0.0, 3.0), st.floats(0.1, 2.0))
def test_halfspace_box_bounds(a, w):
    P = sample_halfspace_box(2, 0.0, [a], [a + w], 0.5, 1.5, RngStream(12))
    assert np.all((P[:, 0] >= a) & (P[:, 0] <= a + w))
    assert np.all((P[:, 1] >= 0.5) & (P[:, 1] <= 1.5))
