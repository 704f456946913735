import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ballhull.dual_cells import (
    conditioned_cell,
    conditioned_parameters,
    coupled_sample,
    crofton_mean_lines,
    dual_gumbel_check,
    dual_gumbel_constants,
    dual_gumbel_statistic,
    duality_check,
    face_count_bijection,
    invert,
    sample_zero_cell,
    zero_cell_from_lines,
)
from ballhull.errors import InversionUndefined
from ballhull.experiments import extremal_constants
from ballhull.hull_geometry import angle_directions, convex_hull, defect_support
from ballhull.samplers import RngStream, sample_dual_radial_process

from conftest import SEED


def test_invert():
    assert np.allclose(invert([2.0, 0.0]), [0.5, 0.0])
    X = np.random.default_rng(0).standard_normal((1000, 2))
    assert np.max(np.abs(invert(invert(X)) - X)) < 1e-14
    U = angle_directions(np.linspace(0, 6, 50))
    assert np.allclose(invert(U), U, atol=1e-15)
    with pytest.raises(InversionUndefined):
        invert(np.zeros(2))


def test_identity_algebra():
    s = 0.1
    rt = 1 / (1 - s) - 1
    assert rt == pytest.approx(1 / 9)
    assert 1 - 1 / (1 + 0.0) == 0.0


def test_triangle_cell_and_dual_hull():
    U = angle_directions(np.array([0.0, 2.1, 4.2]))
    R = np.array([1.2, 1.5, 1.1])
    cell = zero_cell_from_lines(2.0, 1.0, U, R, 50.0)
    H = convex_hull(invert(U * R[:, None]))
    assert cell.f_vector == (3, 3) and H.f_vector == (3, 3)
    dirs = angle_directions(np.linspace(0, 2 * math.pi, 97))
    s = defect_support(H, dirs)
    assert np.max(np.abs(s - (1 - 1 / (1 + cell.defect_radius(dirs))))) < 1e-12


def test_cell_radial_square():
    U = angle_directions(np.arange(4) * math.pi / 2)
    cell = zero_cell_from_lines(1.0, 1.0, U, np.full(4, 2.0), 10.0, scale=3.0)
    assert cell.inradius == pytest.approx(6.0)
    assert cell.circumradius == pytest.approx(6 * math.sqrt(2))
    assert cell.radial(np.array([1.0, 0.0])) == pytest.approx(6.0)
    js = cell.to_json()
    assert len(js["halfplanes"]) == 4 and js["scale"] == 3.0


@given(st.integers(0, 10_000), st.sampled_from([1.0, 2.0]), st.sampled_from([5.0, 50.0, 500.0]))
def test_zero_cell_contains_ball_and_is_final(seed, alpha, lam):
    cell = sample_zero_cell(alpha, lam, RngStream(seed))
    assert cell.offsets.min() >= 1.0
    assert cell.circumradius < cell.r_max
    # lines beyond the current shell never cut the cell
    U2, R2 = sample_dual_radial_process(alpha, lam, 4 * cell.r_max, RngStream(seed, 1), r_min=cell.r_max)
    ext = zero_cell_from_lines(alpha, lam, np.vstack([cell.normals, U2]), np.concatenate([cell.offsets, R2]), 4 * cell.r_max)
    assert ext.polygon.shape == cell.polygon.shape
    assert np.allclose(np.sort(ext.polygon, axis=0), np.sort(cell.polygon, axis=0))


def test_dense_lines_round_cell():
    cell = sample_zero_cell(2.0, 1e6, RngStream(3))
    assert cell.inradius < 1.001
    assert cell.circumradius / cell.inradius < 1.01


def test_coupled_identity_and_bijection():
    rep = duality_check(2.0, 200.0, 60, SEED)
    assert rep.checks["identity"], rep.statistics
    assert rep.statistics["max_identity_error"] <= 1e-10
    bij = face_count_bijection(2.0, 200.0, 60, SEED)
    assert bij.passed, bij.statistics
    for f in bij.series["f"]:
        assert f[0] == f[2] and f[1] == f[3]


def test_coupled_sample_truncation():
    cs = coupled_sample(2.0, 300.0, RngStream(1))
    assert np.all(np.linalg.norm(cs.dual_points, axis=1) >= 0.2 - 1e-15)
    assert np.all(np.linalg.norm(cs.dual_points, axis=1) < 1.0)


def test_conditioned_parameters():
    assert conditioned_parameters("PV", 3.0) == (2.0, 36.0, 3.0)
    assert conditioned_parameters("crofton", 3.0) == (1.0, 3.0, 3.0)
    with pytest.raises(ValueError):
        conditioned_parameters("other", 3.0)
    with pytest.raises(ValueError):
        conditioned_parameters("pv", 0.0)


@pytest.mark.parametrize("kind", ["pv", "crofton"])
def test_conditioned_inradius(kind):
    for i in range(30):
        assert conditioned_cell(kind, 5.0, RngStream(SEED, i)).inradius >= 5.0


def test_crofton_line_count():
    t, r_max = 4.0, 2.5
    assert crofton_mean_lines(t, r_max) == pytest.approx(2 * math.pi * t * (r_max - 1))
    n = [sample_dual_radial_process(1.0, t, r_max, RngStream(7, i))[1].size for i in range(2000)]
    m = crofton_mean_lines(t, r_max)
    assert abs(np.mean(n) - m) < 4 * math.sqrt(m / 2000)


def test_shape_trend():
    ratios = []
    for t in (3.0, 10.0, 30.0):
        cells = [conditioned_cell("pv", t, RngStream(SEED, i)) for i in range(100)]
        ratios.append(np.mean([c.circumradius / c.inradius for c in cells]))
    assert ratios[0] > ratios[1] > ratios[2] > 1.0


def test_dual_constants():
    c = extremal_constants(2, 0.0)
    cp = dual_gumbel_constants(2)
    assert cp.C1 == pytest.approx(2 / 3) and cp.C2 == pytest.approx(2 / 3)
    assert cp.C3 == pytest.approx(c.C3 + 2 * math.log(2) / 3 + 2 * math.log(2) / 3)


def test_pv_verbatim_matches_derived_asymptotically():
    R = np.array([30.5, 31.0, 32.0])
    diffs = []
    for t in (30.0, 1e4, 1e8):
        Rt = t + (R - 30.0) * math.sqrt(30.0 / t)
        d = dual_gumbel_statistic("pv", t, Rt, "verbatim") - dual_gumbel_statistic("pv", t, Rt, "derived")
        # R - t loses digits at large t
        assert np.ptp(d) < 1e-3
        diffs.append(abs(d[0]))
        # the gap is C2 log(log 2t / log t)
        assert d[0] == pytest.approx((2 / 3) * math.log(math.log(2 * t) / math.log(t)), abs=1e-3)
    assert diffs[0] > diffs[1] > diffs[2]


def test_dual_gumbel_calibration(rng):
    t = 30.0
    _, lam, scale = conditioned_parameters("pv", t)
    c = extremal_constants(2, 0.0)
    G = rng.gumbel(size=2000)
    S = ((G + c.C1 * math.log(lam) + c.C2 * math.log(math.log(lam)) + c.C3) / (c.M * lam)) ** (2 / 3)
    R = scale * (1 + S)
    assert np.allclose(dual_gumbel_statistic("pv", t, R), G, atol=1e-9)
    assert dual_gumbel_check("pv", t, 2000, None, R=R).statistic < 1.63 / math.sqrt(2000)
    with pytest.raises(ValueError):
        dual_gumbel_check("pv", 2.0, 10, None, R=R)
