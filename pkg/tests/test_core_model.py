import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ballhull.core_model import ModelParams, ball_volume, scaling_exponents, sphere_area


@pytest.mark.parametrize(
    "d,delta,expected",
    [
        (2, 0.0, (1 / 3, 2 / 3, 5 / 3, 1 / 3)),
        (3, 0.0, (1 / 4, 1 / 2, 3 / 2, 1 / 2)),
        (2, 1.0, (1 / 5, 2 / 5, 1.0, 1 / 5)),
    ],
)
def test_exponent_table(d, delta, expected):
    e = scaling_exponents(ModelParams(d, 1.0, delta))
    assert (e.beta, e.gamma, e.zeta, e.tau) == pytest.approx(expected, abs=1e-15)


@given(st.integers(2, 12), st.floats(0, 20))
def test_exponent_relations(d, delta):
    e = ModelParams(d, 1.0, delta).exponents
    assert e.gamma == pytest.approx(2 * e.beta)
    assert e.tau == pytest.approx(e.beta * (d - 1))
    assert e.zeta == pytest.approx(e.tau + 2 * e.gamma)
    assert e.beta * (d - 1) + e.gamma * (1 + delta) == pytest.approx(1.0)


@pytest.mark.parametrize("j,v", [(0, 1.0), (1, 2.0), (2, math.pi), (3, 4 * math.pi / 3)])
def test_ball_volume(j, v):
    assert ball_volume(j) == pytest.approx(v, rel=1e-15)


@given(st.integers(1, 15))
def test_sphere_area_recursion(d):
    # |S^{d-1}| = 2 pi kappa_{d-2} relation via kappa_d = 2 pi / d kappa_{d-2}
    if d >= 2:
        assert sphere_area(d) == pytest.approx(2 * math.pi * ball_volume(d - 2))


@pytest.mark.parametrize("kw", [dict(d=1, lam=1.0), dict(d=2, lam=0.0), dict(d=2, lam=1.0, delta=-0.5), dict(d=2.5, lam=1.0)])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        ModelParams(**kw)


def test_hull_dimension_guard():
    ModelParams(3, 1.0).require_hull_dimension()
    with pytest.raises(ValueError):
        ModelParams(4, 1.0).require_hull_dimension()
