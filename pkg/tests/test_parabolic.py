import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from ballhull.errors import EmptyGerms
from ballhull.parabolic import (
    GrowthProcess,
    duality_checks,
    edge_margin,
    extreme_points,
    extreme_points_grid,
    extreme_points_oracle,
    face_empirical_measure,
    hull_process,
    interior_grid,
    local_boundary_at_zero,
    parabola_cap_area,
    psi_boundary,
    sigma_from_covariance,
    stabilization_radius,
    typical_pairs,
)
from ballhull.samplers import RngStream, Window, sample_halfspace_process

W1 = Window(6.0, 4.0)
W2 = Window(3.0, 3.0)


def germs(seed, d=2, window=None):
    window = window or (W1 if d == 2 else W2)
    return GrowthProcess(sample_halfspace_process(d, 0.0, window, RngStream(seed)), window)


# growth process -------------------------------------------------------------------


def test_psi_single_and_pair():
    g = GrowthProcess([[0.0, 0.0]])
    v = np.linspace(-2, 2, 9)
    assert np.allclose(psi_boundary(g, v), v**2 / 2)
    assert psi_boundary(GrowthProcess([[-1.0, 0.0], [1.0, 0.0]]), 0.0) == pytest.approx(0.5)


def test_psi_empty():
    with pytest.raises(EmptyGerms):
        psi_boundary(GrowthProcess(np.zeros((0, 2))), 0.0)


@given(st.integers(0, 10_000))
def test_adding_germ_lowers_boundaries(seed):
    p = germs(seed)
    extra = np.vstack([p.germs, [[0.1, 0.2]]])
    q = GrowthProcess(extra, p.window)
    v = np.linspace(-3, 3, 301)
    assert np.all(psi_boundary(q, v) <= psi_boundary(p, v))
    assert np.all(hull_process(q).phi_boundary(v) <= hull_process(p).phi_boundary(v) + 1e-12)


# extreme points ----------------------------------------------------------------------


def test_single_germ_extreme():
    assert extreme_points(GrowthProcess([[0.3, 1.0]])).tolist() == [0]


def test_high_germ_reaches_boundary_far_away():
    # the high germ's parabola undercuts the low one for v > 50.05
    g = GrowthProcess([[0.0, 0.0], [0.1, 5.0]])
    assert sorted(extreme_points(g).tolist()) == [0, 1]
    assert 5.0 + (60 - 0.1) ** 2 / 2 < 60**2 / 2
    assert sorted(extreme_points_grid(g, np.linspace(-100, 100, 20001)).tolist()) == [0, 1]


@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_extremes_match_oracle(seed, d):
    p = germs(seed, d)
    ext = np.sort(extreme_points(p))
    assert np.array_equal(ext, extreme_points_oracle(p))
    if d == 2:
        grid = np.linspace(-400, 400, 400_001)
        assert set(extreme_points_grid(p, grid).tolist()) <= set(ext.tolist())


# hull process ------------------------------------------------------------------------


def test_two_germ_hull():
    g = GrowthProcess([[-1.0, 0.0], [1.0, 0.0]])
    hp = hull_process(g)
    assert hp.faces.shape[0] == 1
    assert hp.phi_boundary(0.0) == pytest.approx(0.5)


@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_phi_above_psi(seed, d):
    p = germs(seed, d)
    hp = hull_process(p)
    g = interior_grid(p, hp, 900, margin=0.0 if d == 2 else None)
    assert np.all(hp.phi_boundary(g) >= psi_boundary(p, g) - 1e-12)


@given(st.integers(0, 10_000))
def test_consecutive_pair_span(seed):
    p = germs(seed)
    hp = hull_process(p)
    order = hp.sorted_vertices()
    G = p.germs
    for a, b in zip(order[:-1], order[1:]):
        (x1, h1), (x2, h2) = G[a], G[b]
        v = np.linspace(x1, x2, 7)
        # downward unit parabola through both germs
        c = (h2 - h1) / (x2 - x1) + 0.5 * (x2 + x1)
        par = h1 + (v - x1) * (c - 0.5 * (v + x1))
        assert np.allclose(hp.phi_boundary(v), par, atol=1e-9)


def test_duality_single_germ():
    assert duality_checks(GrowthProcess([[0.0, 1.0]]), grid=np.linspace(-1, 1, 5)).passed()


@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_duality_random(seed, d):
    p = germs(seed, d)
    rep = duality_checks(p, n_grid=1000 if d == 2 else 900)
    assert rep.extremes_equal and rep.phi_above_psi
    assert rep.psi_reconstruction_error <= 1e-12
    assert rep.phi_reconstruction_error <= 1e-9


# faces and pairs ---------------------------------------------------------------------


def test_face_tops_tie_break():
    hp = hull_process(GrowthProcess([[-1.0, 0.0], [1.0, 0.0]]))
    assert np.allclose(face_empirical_measure(hp, 1), [[-1.0, 0.0]])


@pytest.mark.parametrize("d", [2, 3])
def test_vertex_tops(d):
    p = germs(3, d)
    hp = hull_process(p)
    assert np.array_equal(face_empirical_measure(hp, 0), p.germs[hp.vertices])
    tops = face_empirical_measure(hp, d - 1)
    assert tops.shape == (hp.faces.shape[0], d)


def test_vertex_intensity_stationary():
    left, right = [], []
    for i in range(300):
        p = germs(500 + i, window=Window(12.0, 5.0))
        V = p.germs[hull_process(p).vertices, 0]
        left.append(np.count_nonzero((V > -8) & (V < -2)))
        right.append(np.count_nonzero((V > 2) & (V < 8)))
    diff = np.array(left) - np.array(right)
    assert abs(diff.mean()) < 4 * diff.std(ddof=1) / math.sqrt(diff.size)


def test_pairs():
    g = GrowthProcess([[-1.0, 0.0], [1.0, 0.3]])
    ps = typical_pairs(g)
    assert ps.theta.tolist() == [2.0]
    p = germs(8)
    hp = hull_process(p)
    ps = typical_pairs(p, 0.0, hp)
    V = np.sort(p.germs[hp.vertices, 0])
    assert ps.theta.sum() == pytest.approx(V[-1] - V[0])


def test_edge_margin_positive():
    assert edge_margin(germs(2)) > 0


# cap area ----------------------------------------------------------------------------


def test_cap_area_limits():
    h = 0.7
    assert parabola_cap_area([0.0, h], [1e-7, h]) == pytest.approx(4 * math.sqrt(2) / 3 * h**1.5, rel=1e-9)
    for th in (0.5, 2.0):
        assert parabola_cap_area([0.0, 0.0], [th, 0.0]) == pytest.approx(th**3 / 12, rel=1e-12)


def test_cap_area_quadrature(rng):
    for _ in range(100):
        x = np.array([rng.uniform(-2, 2), rng.uniform(0, 2)])
        y = np.array([x[0] + rng.uniform(0.05, 3), rng.uniform(0, 2)])
        # solve h = A - (v - c)^2 / 2 through both points
        c = (y[1] - x[1]) / (y[0] - x[0]) + 0.5 * (x[0] + y[0])
        A = x[1] + 0.5 * (x[0] - c) ** 2
        half = math.sqrt(2 * A)
        area = integrate.quad(lambda v: A - (v - c) ** 2 / 2, c - half, c + half, epsabs=1e-12)[0]
        assert parabola_cap_area(x, y) == pytest.approx(area, abs=1e-6)


# stabilization -----------------------------------------------------------------------


def test_isolated_germ_small_radius():
    G = np.array([[0.0, 0.01], [-30.0, 0.0], [30.0, 0.0], [-31.0, 0.5], [31.0, 0.5]])
    assert stabilization_radius(GrowthProcess(G), 0) <= 30.0
    far = np.vstack([G, [[200.0, 0.0]]])
    assert stabilization_radius(GrowthProcess(far), 0) == stabilization_radius(GrowthProcess(G), 0)


def test_stabilization_tail_monotone():
    R = []
    for i in range(60):
        p = germs(900 + i, window=Window(15.0, 5.0))
        hp = hull_process(p)
        V = hp.vertices[np.abs(p.germs[hp.vertices, 0]) < 3]
        R += [stabilization_radius(p, int(j)) for j in V]
    R = np.array(R)
    L = np.array([0.5, 1.0, 1.5, 2.0, 3.0])
    tail = np.array([(R > x).mean() for x in L])
    assert np.all(np.diff(tail) <= 0)
    pos = tail > 0
    slope = np.polyfit(L[pos] ** 2, np.log(tail[pos]), 1)[0]
    assert slope < 0


# covariance --------------------------------------------------------------------------


def test_sigma_covariance_positive():
    est = sigma_from_covariance(2, 0.0, "s", Window(30.0, 5.0), 0.1, 40, RngStream(7))
    assert est.covariance[0] > 0
    assert np.all(est.covariance >= -3 * est.covariance_stderr)
    assert est.value > 0


@pytest.mark.parametrize("d", [2, 3])
def test_local_boundary(d):
    for i in range(20):
        psi0, phi0, _ = local_boundary_at_zero(d, 0.0, RngStream(40 + i))
        assert 0 <= psi0 <= phi0 + 1e-12
