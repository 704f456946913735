"""Seeded Poisson samplers for the ball, half-space and dual radial models.

Point sets are returned as numpy arrays: ball samples have shape ``(n, d)``;
half-space samples have shape ``(n, d)`` with the spatial coordinates first
and the height in the last column.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from .core_model import ModelParams, beta_function, sphere_area
from .errors import ResourceGuard

MAX_EXPECTED_POINTS = 1e9

_MASK64 = (1 << 64) - 1


def stream_id(experiment: str, index: int) -> int:
    """Stable 64-bit stream id for replicate ``index`` of ``experiment``."""
    digest = hashlib.blake2b(f"{experiment}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class RngStream:
    """Counter-based random stream keyed by ``(seed, stream_id)``.

    The stream wraps a Philox generator whose 128-bit key is the pair, so the
    sequence depends only on the key and never on worker scheduling.
    """

    seed: int
    stream_id: int = 0
    _gen: Optional[np.random.Generator] = field(default=None, init=False, repr=False)

    @classmethod
    def for_replicate(cls, seed: int, experiment: str, index: int) -> "RngStream":
        return cls(seed, stream_id(experiment, index))

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
            self._gen = np.random.Generator(np.random.Philox(key=key))
        return self._gen

    def spawn(self, tag: int) -> "RngStream":
        """Child stream, deterministic in ``(seed, stream_id, tag)``."""
        child = stream_id(f"{self.stream_id}", tag)
        return RngStream(self.seed, child)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class Window:
    """Box ``[-L, L]^(d-1) x [0, H]`` for the half-space process."""

    L: float
    H: float

    def __post_init__(self):
        if not (self.L > 0 and self.H > 0):
            raise ValueError("window needs L > 0 and H > 0")


def _guard(mean: float) -> None:
    if not math.isfinite(mean) or mean > MAX_EXPECTED_POINTS:
        raise ResourceGuard(f"expected point count {mean:.3g} exceeds guard {MAX_EXPECTED_POINTS:.0e}")


def uniform_directions(gen: np.random.Generator, n: int, d: int) -> np.ndarray:
    if d == 2:
        t = gen.uniform(0.0, 2.0 * math.pi, n)
        return np.column_stack((np.cos(t), np.sin(t)))
    z = gen.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _cone_directions(gen, n: int, d: int, axis: np.ndarray, half_angle: float) -> np.ndarray:
    """Uniform directions within ``half_angle`` of ``axis`` (d = 2 or 3)."""
    if d == 2:
        base = math.atan2(axis[1], axis[0])
        t = base + gen.uniform(-half_angle, half_angle, n)
        return np.column_stack((np.cos(t), np.sin(t)))
    if d == 3:
        c = gen.uniform(math.cos(half_angle), 1.0, n)
        phi = gen.uniform(0.0, 2.0 * math.pi, n)
        s = np.sqrt(np.maximum(0.0, 1.0 - c * c))
        e1, e2 = tangent_basis(axis)
        return c[:, None] * axis + s[:, None] * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
    raise ValueError("cone restriction supports d in {2, 3}")


def tangent_basis(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal pair spanning the plane orthogonal to the unit vector ``u`` in R^3."""
    u = np.asarray(u, dtype=float)
    helper = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - np.dot(helper, u) * u
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    return e1, e2


def cone_fraction(d: int, half_angle: float) -> float:
    """Fraction of the sphere within ``half_angle`` of a fixed direction (d = 2 or 3)."""
    if half_angle >= math.pi:
        return 1.0
    if d == 2:
        return half_angle / math.pi
    if d == 3:
        return (1.0 - math.cos(half_angle)) / 2.0
    raise ValueError("cone restriction supports d in {2, 3}")


def ball_mean_count(params: ModelParams, r_min: float = 0.0, half_angle: float = math.pi) -> float:
    d, a = params.d, params.delta + 1.0
    radial = beta_function(d, a)
    if r_min > 0.0:
        radial *= special.betainc(a, d, 1.0 - r_min)
    return params.lam * sphere_area(d) * radial * cone_fraction(d, half_angle)


def sample_ball_process(
    params: ModelParams,
    rng,
    r_min: float = 0.0,
    axis: Optional[np.ndarray] = None,
    half_angle: float = math.pi,
) -> np.ndarray:
    """Poisson process of intensity ``lam * (1 - |x|)**delta`` on the unit ball.

    The optional ``r_min``, ``axis`` and ``half_angle`` restrict the process to
    the region ``{|x| >= r_min, angle(x, axis) <= half_angle}``; a restriction
    of a Poisson process is again Poisson, so the output is exact there.
    """
    gen = as_generator(rng)
    d = params.d
    mean = ball_mean_count(params, r_min, half_angle)
    _guard(mean)
    n = gen.poisson(mean)
    a = params.delta + 1.0
    if r_min > 0.0:
        top = special.betainc(a, d, 1.0 - r_min)
        gap = special.betaincinv(a, d, gen.uniform(0.0, top, n))
    else:
        # 1 - r ~ Beta(delta + 1, d), drawn from two gamma variates
        gap = gen.beta(a, d, n)
    r = 1.0 - gap
    if half_angle < math.pi:
        if axis is None:
            axis = np.eye(d)[0]
        u = _cone_directions(gen, n, d, np.asarray(axis, dtype=float), half_angle)
    else:
        u = uniform_directions(gen, n, d)
    return u * r[:, None]


def halfspace_mean_count(d: int, delta: float, window: Window) -> float:
    return (2.0 * window.L) ** (d - 1) * window.H ** (delta + 1.0) / (delta + 1.0)


def sample_halfspace_process(d: int, delta: float, window: Window, rng) -> np.ndarray:
    """Poisson process of intensity ``h**delta dh dv`` on ``[-L, L]^(d-1) x [0, H]``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    gen = as_generator(rng)
    mean = halfspace_mean_count(d, delta, window)
    _guard(mean)
    n = gen.poisson(mean)
    v = gen.uniform(-window.L, window.L, (n, d - 1))
    h = window.H * gen.random(n) ** (1.0 / (delta + 1.0))
    return np.column_stack((v, h))


def dual_mean_count(alpha: float, lam: float, r_max: float, d: int = 2, r_min: float = 1.0) -> float:
    return lam * sphere_area(d) * (r_max**alpha - r_min**alpha) / alpha


def sample_dual_radial_process(
    alpha: float, lam: float, r_max: float, rng, d: int = 2, r_min: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Poisson process of intensity ``lam * |x|**(alpha - d)`` on ``r_min < |x| <= r_max``.

    Returns ``(directions, distances)``.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if not r_max > 1.0:
        raise ValueError("r_max must exceed 1")
    if r_min < 1.0:
        raise ValueError("r_min must be >= 1")
    gen = as_generator(rng)
    mean = dual_mean_count(alpha, lam, r_max, d, r_min)
    _guard(mean)
    n = gen.poisson(mean)
    lo, hi = r_min**alpha, r_max**alpha
    r = (lo + gen.random(n) * (hi - lo)) ** (1.0 / alpha)
    return uniform_directions(gen, n, d), r


def _radial_mass(d: int, delta: float, r_lo: float, r_hi: float) -> tuple:
    """Beta-CDF bounds of ``1 - r`` for the shell ``r_lo <= r < r_hi`` and its mass."""
    a = delta + 1.0
    g_lo = special.betainc(a, d, 1.0 - min(r_hi, 1.0))
    g_hi = special.betainc(a, d, 1.0 - max(r_lo, 0.0))
    return g_lo, g_hi, beta_function(d, a) * (g_hi - g_lo)


def polar_box_mean_count(params: ModelParams, r_lo: float, r_hi: float, t_lo: float, t_hi: float) -> float:
    """Mean count in ``{r_lo <= |x| < r_hi, t_lo <= angle(x, axis) < t_hi}`` (d = 2 or 3)."""
    _, _, radial = _radial_mass(params.d, params.delta, r_lo, r_hi)
    if params.d == 2:
        ang = 2.0 * (t_hi - t_lo)
    elif params.d == 3:
        ang = 2.0 * math.pi * (math.cos(t_lo) - math.cos(t_hi))
    else:
        raise ValueError("polar boxes support d in {2, 3}")
    return params.lam * radial * ang


def sample_ball_polar_box(
    params: ModelParams, rng, r_lo: float, r_hi: float, t_lo: float, t_hi: float, axis: Optional[np.ndarray] = None
) -> np.ndarray:
    """Ball process restricted to a polar box around ``axis`` (angles measured from it).

    Disjoint boxes give independent restrictions, so a region may be grown
    piece by piece without resampling what is already drawn.
    """
    gen = as_generator(rng)
    d = params.d
    t_hi = min(t_hi, math.pi)
    if r_hi <= r_lo or t_hi <= t_lo:
        return np.zeros((0, d))
    mean = polar_box_mean_count(params, r_lo, r_hi, t_lo, t_hi)
    _guard(mean)
    n = gen.poisson(mean)
    g_lo, g_hi, _ = _radial_mass(d, params.delta, r_lo, r_hi)
    r = 1.0 - special.betaincinv(params.delta + 1.0, d, gen.uniform(g_lo, g_hi, n))
    axis = np.eye(d)[0] if axis is None else np.asarray(axis, dtype=float)
    if d == 2:
        t = gen.uniform(t_lo, t_hi, n) * np.where(gen.random(n) < 0.5, -1.0, 1.0)
        base = math.atan2(axis[1], axis[0])
        u = np.column_stack((np.cos(base + t), np.sin(base + t)))
    else:
        c = gen.uniform(math.cos(t_hi), math.cos(t_lo), n)
        phi = gen.uniform(0.0, 2.0 * math.pi, n)
        s = np.sqrt(np.maximum(0.0, 1.0 - c * c))
        e1, e2 = tangent_basis(axis)
        u = c[:, None] * axis + s[:, None] * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
    return u * r[:, None]


def sample_halfspace_box(d: int, delta: float, lo, hi, h_lo: float, h_hi: float, rng) -> np.ndarray:
    """Half-space process restricted to ``prod [lo_i, hi_i] x [h_lo, h_hi)``."""
    gen = as_generator(rng)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (d - 1,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (d - 1,))
    if np.any(hi <= lo) or h_hi <= h_lo:
        return np.zeros((0, d))
    a = delta + 1.0
    mean = float(np.prod(hi - lo)) * (h_hi**a - h_lo**a) / a
    _guard(mean)
    n = gen.poisson(mean)
    v = lo + (hi - lo) * gen.random((n, d - 1))
    h = (h_lo**a + gen.random(n) * (h_hi**a - h_lo**a)) ** (1.0 / a)
    return np.column_stack((v, h))
