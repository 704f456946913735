import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from scipy.spatial import ConvexHull

from ballhull.errors import DegenerateInput, OriginOutside
from ballhull.hull_geometry import (
    V_process,
    W_process,
    W_total_3d,
    angle_directions,
    convex_hull,
    defect_radius,
    defect_support,
    external_angles,
    face_tops,
    flower_support_identity_check,
    intrinsic_volume,
    kubota_defect_mc,
    kubota_V1,
    projection_avoidance,
    steiner_check,
    steiner_polynomial,
    sup_defect_support,
    vertex_scores,
    width_volume_processes,
)
from ballhull.samplers import RngStream

from conftest import random_hull

SQUARE = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])


def square(a):
    return np.array([[a, a], [-a, a], [-a, -a], [a, -a]])


def ngon(n, r=1.0, phase=0.0):
    t = phase + 2 * math.pi * np.arange(n) / n
    return r * angle_directions(t)


def cube():
    return np.array(list(itertools.product([-0.5, 0.5], repeat=3)))


# construction ------------------------------------------------------------------


def test_square_with_centre():
    H = convex_hull(np.vstack([square(0.5), [[0.0, 0.0]]]))
    assert H.f_vector == (4, 4)
    assert set(H.source_index.tolist()) == {0, 1, 2, 3}


def test_tetrahedron_with_centroid():
    T = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    H = convex_hull(np.vstack([T, T.mean(axis=0)]))
    assert H.f_vector == (4, 6, 4)


def _brute_extreme_2d(P):
    out = []
    n = len(P)
    for i in range(n):
        others = np.delete(np.arange(n), i)
        tri = np.array(list(itertools.combinations(others, 3)))
        A, B, C = P[tri[:, 0]], P[tri[:, 1]], P[tri[:, 2]]
        x = P[i]

        def cr(o, a, b):
            return (a[:, 0] - o[:, 0]) * (b[:, 1] - o[:, 1]) - (a[:, 1] - o[:, 1]) * (b[:, 0] - o[:, 0])

        X = np.broadcast_to(x, A.shape)
        d1, d2, d3 = cr(A, B, X), cr(B, C, X), cr(C, A, X)
        inside = ((d1 >= 0) & (d2 >= 0) & (d3 >= 0)) | ((d1 <= 0) & (d2 <= 0) & (d3 <= 0))
        if not inside.any():
            out.append(i)
    return set(out)


def test_brute_force_oracle_2d(rng):
    r = np.sqrt(rng.random(100))
    P = r[:, None] * angle_directions(rng.uniform(0, 2 * math.pi, 100))
    H = convex_hull(P)
    assert set(H.source_index.tolist()) == _brute_extreme_2d(P)


@given(st.integers(0, 10_000))
def test_hull_matches_qhull_2d(seed):
    H, X = random_hull(seed, 2, 100.0)
    assert set(H.source_index.tolist()) == set(ConvexHull(X).vertices.tolist())
    assert H.f_vector[0] == H.f_vector[1]


@given(st.integers(0, 10_000))
def test_euler_3d(seed):
    H, _ = random_hull(seed, 3, 300.0)
    f0, f1, f2 = H.f_vector
    assert f0 - f1 + f2 == 2


def test_degenerate_and_dimension_errors():
    with pytest.raises(DegenerateInput):
        convex_hull(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        convex_hull(np.zeros((6, 4)))


# support and radius ------------------------------------------------------------


@pytest.mark.parametrize("a", [0.2, 0.5, 0.9])
def test_square_support_and_radius(a):
    H = convex_hull(square(a))
    u = np.array([1.0, 0.0])
    assert defect_support(H, u) == pytest.approx(1 - a)
    assert defect_radius(H, u) == pytest.approx(1 - a)
    assert sup_defect_support(H) == pytest.approx(1 - a)


def test_support_at_vertex_and_boundary():
    H = convex_hull(SQUARE)
    assert defect_support(H, np.array([1.0, 0.0])) == pytest.approx(0.0)
    H2 = convex_hull(0.7 * SQUARE)
    assert defect_radius(H2, np.array([0.0, 1.0])) == pytest.approx(0.3)


def test_single_point_support():
    # a degenerate hull reduced to the origin is represented by the raw point
    assert flower_support_identity_check(np.zeros((1, 2)), np.array([1.0, 0.0]))
    assert 1.0 - max(0.0, float(np.zeros(2) @ np.array([1.0, 0.0]))) == 1.0


@pytest.mark.parametrize("n", [3, 5, 8, 17])
def test_ngon_sup(n):
    H = convex_hull(ngon(n, phase=0.3))
    assert sup_defect_support(H) == pytest.approx(1 - math.cos(math.pi / n), abs=1e-13)


@given(st.integers(0, 10_000))
def test_sup_matches_grid(seed):
    H, _ = random_hull(seed)
    t = np.linspace(0, 2 * math.pi, 10_000, endpoint=False)
    grid = np.max(defect_support(H, angle_directions(t)))
    S = sup_defect_support(H)
    assert grid <= S + 1e-15
    # the support function is Lipschitz with constant at most 1
    assert S - grid <= math.pi / 10_000


@given(st.integers(0, 10_000))
def test_radius_dominates_support(seed):
    H, _ = random_hull(seed)
    U = angle_directions(np.linspace(0, 2 * math.pi, 500))
    assert np.all(defect_radius(H, U) >= defect_support(H, U) - 1e-15)


def test_radius_origin_outside():
    H = convex_hull(np.array([[0.5, 0.5], [0.9, 0.5], [0.5, 0.9]]))
    with pytest.raises(OriginOutside):
        defect_radius(H, np.array([1.0, 0.0]))


def test_flower_identity_examples():
    x = np.array([[0.6, 0.3]])
    u = x[0] / np.linalg.norm(x[0])
    assert flower_support_identity_check(x, u)
    perp = np.array([-u[1], u[0]])
    assert flower_support_identity_check(x, perp)


@given(st.integers(0, 10_000))
def test_flower_identity_random(seed):
    gen = np.random.default_rng(seed)
    r = np.sqrt(gen.random(50))
    P = r[:, None] * angle_directions(gen.uniform(0, 2 * math.pi, 50))
    U = angle_directions(gen.uniform(0, 2 * math.pi, 100))
    assert flower_support_identity_check(P, U)


# faces, angles, intrinsic volumes -----------------------------------------------


def test_face_tops():
    H, _ = random_hull(3)
    tops0 = face_tops(H, 0)
    assert len(tops0) == H.f_vector[0]
    for f, t in tops0:
        assert np.array_equal(H.vertices[f[0]], t)
    for f, t in face_tops(H, 1):
        norms = np.linalg.norm(H.vertices[list(f)], axis=1)
        assert np.linalg.norm(t) == norms.max()


@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_vertex_angles_sum_to_one(seed, d):
    H, _ = random_hull(seed, d, 150.0 if d == 2 else 300.0)
    s = sum(dd.external_angle for dd in external_angles(H)[0])
    assert s == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("n", [3, 4, 7, 12])
def test_regular_ngon_angles(n):
    H = convex_hull(ngon(n, 0.8, 0.1))
    for dd in external_angles(H)[0]:
        assert dd.external_angle == pytest.approx(1 / n, abs=1e-12)


def test_cube_corner_and_volumes():
    H = convex_hull(cube())
    for dd in external_angles(H)[0]:
        assert dd.external_angle == pytest.approx(1 / 8, abs=1e-12)
    assert intrinsic_volume(H, 0) == pytest.approx(1.0)
    assert intrinsic_volume(H, 1) == pytest.approx(3.0)
    assert intrinsic_volume(H, 2) == pytest.approx(3.0)


@pytest.mark.parametrize("s", [0.3, 1.0])
def test_square_intrinsic(s):
    H = convex_hull(square(s / 2))
    assert intrinsic_volume(H, 0) == pytest.approx(1.0)
    assert intrinsic_volume(H, 1) == pytest.approx(2 * s)


def test_kubota_examples():
    V, _ = kubota_V1(np.array([[-0.5, 0.0], [0.5, 0.0]]), 4096, RngStream(1))
    assert V == pytest.approx(1.0, rel=1e-6)
    V, _ = kubota_V1(ngon(4000, 0.7), 4096, RngStream(1))
    assert V == pytest.approx(math.pi * 0.7, rel=1e-5)
    assert kubota_V1(np.array([[0.2, 0.1]]), 128, RngStream(1))[0] == 0.0


@given(st.integers(0, 10_000))
def test_kubota_matches_V1(seed):
    H, _ = random_hull(seed)
    V, se = kubota_V1(H, 40, RngStream(seed))
    assert abs(V - intrinsic_volume(H, 1)) <= 4 * se + 1e-12
    Vg, _ = kubota_V1(H, 20_000, RngStream(seed))
    assert Vg == pytest.approx(intrinsic_volume(H, 1), rel=1e-6)


def test_projection_avoidance():
    H = convex_hull(0.5 * SQUARE)
    assert projection_avoidance(H, np.array([0.1, 0.1])) == 0.0
    assert projection_avoidance(H, np.array([0.9, 0.0])) == 1.0


def test_kubota_defect_representation():
    H, _ = random_hull(11, 2, 100.0)
    mc, se = kubota_defect_mc(H, 400_000, RngStream(2))
    assert abs(mc - (math.pi - intrinsic_volume(H, 1))) <= 4 * se


# integrated processes ----------------------------------------------------------


def test_processes_at_zero():
    H, _ = random_hull(1)
    assert width_volume_processes(H, 0.0) == (0.0, 0.0)


def test_inscribed_square_totals():
    H = convex_hull(SQUARE)
    W, V = width_volume_processes(H, 2 * math.pi)
    assert W == pytest.approx(2 * math.pi - 4 * math.sqrt(2), abs=1e-12)
    Vq = 4 * integrate.quad(lambda t: 1 - 1 / (math.sqrt(2) * math.cos(t)), -math.pi / 4, math.pi / 4, epsabs=1e-13)[0]
    assert V == pytest.approx(Vq, abs=1e-9)
    Wq = integrate.quad(lambda t: defect_support(H, t), 0, 2 * math.pi, points=[math.pi / 4 * k for k in range(1, 8)])[0]
    assert W == pytest.approx(Wq, abs=1e-9)


@given(st.integers(0, 10_000), st.floats(-6.28, 6.28))
def test_W_matches_quadrature(seed, v):
    H, _ = random_hull(seed)
    a, b = min(0.0, v), max(0.0, v)
    q = integrate.quad(lambda t: defect_support(H, t), a, b, limit=500, epsabs=1e-12)[0]
    assert W_process(H, v) == pytest.approx(q, abs=1e-7)
    assert W_process(H, v) <= V_process(H, v) + 1e-12


def test_W_total_3d_sphere_polytope():
    H = convex_hull(np.vstack([np.eye(3), -np.eye(3)]))
    # octahedron with unit vertices: compare with a coarse independent rule
    W = W_total_3d(H)
    gen = np.random.default_rng(0)
    U = gen.standard_normal((400_000, 3))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    s = defect_support(H, U)
    assert W == pytest.approx(4 * math.pi * s.mean(), abs=4 * 4 * math.pi * s.std() / math.sqrt(len(s)))


# scores -------------------------------------------------------------------------


@given(st.integers(0, 10_000), st.floats(0.0, 6.28))
def test_scores_rotation_equivariant(seed, phi):
    _, X = random_hull(seed)
    c, s_ = math.cos(phi), math.sin(phi)
    R = np.array([[c, -s_], [s_, c]])
    H1, H2 = convex_hull(X), convex_hull(X @ R.T)
    a, b = vertex_scores(H1), vertex_scores(H2)
    o1, o2 = np.argsort(H1.source_index), np.argsort(H2.source_index)
    assert np.allclose(a.xi_s[o1], b.xi_s[o2], atol=1e-12)
    assert np.allclose(a.xi_r[o1], b.xi_r[o2], atol=1e-12)


@given(st.integers(0, 10_000))
def test_score_totals(seed):
    H, _ = random_hull(seed)
    tot = vertex_scores(H).totals()
    W, V = width_volume_processes(H, 2 * math.pi)
    assert abs(tot["W"] - W) <= 1e-9 * W
    assert abs(tot["V"] - V) <= 1e-9 * V
    assert tot["f0"] == H.f_vector[0] and tot["f1"] == H.f_vector[1]


# Steiner ------------------------------------------------------------------------


@pytest.mark.parametrize("s,eps", [(1.0, 0.1), (0.4, 0.03)])
def test_square_steiner(s, eps):
    H = convex_hull(square(s / 2))
    assert steiner_polynomial(H, eps) == pytest.approx(4 * s * eps + math.pi * eps**2, rel=1e-12)


def test_steiner_zero():
    H, _ = random_hull(5)
    mc, se, poly = steiner_check(H, 0.0, 1000, RngStream(1))
    assert mc == 0.0 and poly == 0.0


@pytest.mark.parametrize("d", [2, 3])
def test_steiner_random(d):
    H, _ = random_hull(21, d, 200.0)
    mc, se, poly = steiner_check(H, 0.05, 400_000, RngStream(3))
    assert abs(mc - poly) <= 3 * se
