import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from ballhull.core_model import ModelParams
from ballhull.errors import AntipodeUndefined, OriginOutside
from ballhull.exact_laws_2d import s_tail_finite
from ballhull.hull_geometry import angle_directions, convex_hull, defect_radius, defect_support
from ballhull.rescale import (
    ExpChart,
    forward,
    in_rescaled_region,
    inverse,
    rescaled_curvature_atoms,
    rescaled_density,
    rescaled_face_measure,
    rescaled_functions,
    rescaled_intensity_check,
)
from ballhull.samplers import RngStream, sample_ball_process

from conftest import random_hull


def test_exp_trivial():
    c = ExpChart(2)
    assert np.allclose(c.exp(0.0), [1, 0])
    assert np.allclose(c.exp(math.pi / 2), [0, 1], atol=1e-16)
    c3 = ExpChart(3)
    assert np.allclose(c3.exp(np.zeros(2)), [1, 0, 0])


@pytest.mark.parametrize("d", [2, 3])
def test_exp_log_round_trip(d, rng):
    c = ExpChart(d)
    if d == 2:
        v = rng.uniform(-math.pi + 0.01, math.pi - 0.01, 10_000)
    else:
        v = rng.standard_normal((10_000, 2))
        v *= (rng.uniform(0, math.pi - 0.01, 10_000) / np.linalg.norm(v, axis=1))[:, None]
    assert np.max(np.abs(c.log(c.exp(v)) - v)) < 1e-12
    assert np.allclose(np.linalg.norm(c.exp(v), axis=-1), 1.0)


def test_exp_is_geodesic_3d():
    c = ExpChart(3)
    v = np.array([0.3, -0.4])
    u = c.exp(v)
    assert math.acos(float(u @ c.base)) == pytest.approx(0.5)


@pytest.mark.parametrize("d", [2, 3])
def test_antipode_raises(d):
    c = ExpChart(d)
    with pytest.raises(AntipodeUndefined):
        c.log(-c.base)


def test_forward_on_axis():
    p = ModelParams(2, 1e4)
    g = p.exponents.gamma
    x = (1 - p.lam ** (-g) * 0.7) * np.array([1.0, 0.0])
    assert np.allclose(forward(p, ExpChart(2), x), [[0.0, 0.7]], atol=1e-12)
    near = forward(p, ExpChart(2), np.array([1 - 1e-15, 0.0]))
    assert near[0, 1] < 1e-8


def test_forward_origin_raises():
    with pytest.raises(AntipodeUndefined):
        forward(ModelParams(2, 10.0), ExpChart(2), np.zeros(2))


@given(st.integers(0, 10_000), st.sampled_from([2, 3]), st.sampled_from([0.0, 1.0]))
def test_forward_inverse_round_trip(seed, d, delta):
    p = ModelParams(d, 300.0, delta)
    X = sample_ball_process(p, RngStream(seed))
    if X.shape[0] == 0:
        return
    c = ExpChart(d)
    P = forward(p, c, X)
    assert np.all(in_rescaled_region(p, P))
    assert np.max(np.abs(inverse(p, c, P) - X)) < 1e-12


def test_density_values():
    p = ModelParams(2, 1e6)
    assert rescaled_density(p, 0.0, 1.0) == pytest.approx(1 - 1e-4)
    p3 = ModelParams(3, 1e3)
    assert rescaled_density(p3, np.zeros(2), 0.5) <= 1.0


def test_intensity_unit_box():
    p = ModelParams(2, 1e4)
    rep = rescaled_intensity_check(p, [(0.0, 1.0, 0.0, 1.0), (0.0, 1.0, 0.5, 0.5)], 600, RngStream(4))
    assert rep.expected[0] == pytest.approx(1 - 0.5 * p.lam ** (-p.exponents.gamma))
    assert abs(rep.z_scores()[0]) < 4
    assert rep.empirical[1] == 0.0 and rep.expected[1] == 0.0


def test_intensity_converges_to_limit():
    dev = []
    for lam in (1e3, 1e5):
        p = ModelParams(2, lam)
        rep = rescaled_intensity_check(p, [(0.0, 1.0, 0.0, 2.0)], 2, RngStream(1))
        dev.append(abs(rep.expected[0] - rep.limit[0]))
    assert dev[1] < dev[0]


def test_rescaled_functions_identity():
    H, _ = random_hull(2, 2, 500.0)
    p = ModelParams(2, 500.0)
    f = rescaled_functions(p, ExpChart(2), H)
    v = np.linspace(-3, 3, 101)
    s, r = f.s_hat(v), f.r_hat(v)
    assert np.all(s <= r + 1e-12)
    th = v * p.lam ** (-p.exponents.beta)
    scale = p.lam ** p.exponents.gamma
    assert np.allclose(s, scale * defect_support(H, angle_directions(th)), atol=1e-12)
    assert np.allclose(r, scale * defect_radius(H, angle_directions(th)), atol=1e-12)


def test_vertex_on_axis_bounds_support():
    p = ModelParams(2, 1e4)
    h = 0.8
    X = np.array([[1 - p.lam ** (-p.exponents.gamma) * h, 0.0], [-0.5, 0.5], [-0.5, -0.5]])
    f = rescaled_functions(p, ExpChart(2), convex_hull(X))
    assert f.s_hat(0.0) <= h + 1e-9


def test_rescaled_functions_origin_outside():
    H = convex_hull(np.array([[0.5, 0.5], [0.9, 0.5], [0.5, 0.9]]))
    with pytest.raises(OriginOutside):
        rescaled_functions(ModelParams(2, 10.0), ExpChart(2), H)


def test_s_hat_law_at_zero():
    lam = 500.0
    p = ModelParams(2, lam)
    g = p.exponents.gamma
    vals = []
    for i in range(300):
        H, _ = random_hull(1000 + i, 2, lam)
        vals.append(float(rescaled_functions(p, ExpChart(2), H).s_hat(0.0)))
    cdf = lambda x: 1 - s_tail_finite(lam, np.minimum(np.asarray(x) * lam ** (-g), 1.0))
    assert stats.kstest(vals, cdf).pvalue > 1e-3


@pytest.mark.parametrize("d", [2, 3])
def test_face_measure(d):
    H, _ = random_hull(5, d, 300.0)
    p = ModelParams(d, 300.0)
    for k in range(d - 1):
        P = rescaled_face_measure(p, ExpChart(d), H, k)
        assert P.shape == (H.f_vector[k], d)
        assert np.all(in_rescaled_region(p, P))
    atoms = rescaled_curvature_atoms(p, ExpChart(d), H, 0)
    assert len(atoms) == H.f_vector[0]
    assert sum(a for a, _, _ in atoms) == pytest.approx(1.0)
