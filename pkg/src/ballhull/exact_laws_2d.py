"""Closed-form laws for the planar homogeneous model (d = 2, delta = 0).

Finite-intensity laws of the defect functions at a fixed direction, their
paraboloid limits, the law of the farthest-peak offset D, the joint laws at
several locations and the neighbouring-pair densities. Every evaluator works
on scalars; the array-valued helpers are vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._caps import CAP_CONST, cap_area_from_height, downward_apex, sup_caps_area
from .quadrature import QuadratureSpec, adaptive_simpson, geometric_breakpoints, integrate_pieces
from .samplers import as_generator

DEFAULT_QUADRATURE = QuadratureSpec()


def _x_minus_sin(x):
    """``x - sin(x)`` without cancellation for small ``x``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.2
    x2 = x * x
    series = x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))))
    return np.where(small, series, x - np.sin(x))


def _check_unit(h, name="h"):
    h = np.asarray(h, dtype=float)
    if np.any(h < 0) or np.any(h > 1) or np.any(~np.isfinite(h)):
        raise ValueError(f"{name} must lie in [0, 1]")
    return h


def cap_area(h):
    """Area of the disk cap of height ``h`` (``arccos(1-h) - (1-h) sqrt(2h - h^2)``)."""
    h = _check_unit(h)
    theta = 2.0 * np.arcsin(np.sqrt(h / 2.0))
    out = 0.5 * _x_minus_sin(2.0 * theta)
    return out if out.ndim else float(out)


def _cap_area_unchecked(h):
    h = np.clip(h, 0.0, 1.0)
    theta = 2.0 * np.arcsin(np.sqrt(h / 2.0))
    return 0.5 * _x_minus_sin(2.0 * theta)


def s_tail_finite(lam: float, h):
    """P[s(v0) >= h] at intensity ``lam``."""
    out = np.exp(-lam * np.asarray(cap_area(h)))
    return out if np.ndim(out) else float(out)


def s_tail_limit(h):
    """Limit survival ``exp(-(4 sqrt 2 / 3) h^{3/2})`` of the rescaled defect support."""
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("h must be >= 0")
    out = np.exp(-CAP_CONST * h**1.5)
    return out if out.ndim else float(out)


def s_fidis_limit(v: Sequence[float], h: Sequence[float]) -> float:
    """Joint limit survival ``P[dPsi(v_i) >= h_i for all i]``.

    Equals ``exp(-area)`` of the union of the downward caps with apices
    ``(v_i, h_i)``; the union is integrated piecewise exactly.
    """
    v = np.asarray(v, dtype=float)
    h = np.asarray(h, dtype=float)
    if v.shape != h.shape or v.ndim != 1:
        raise ValueError("v and h must be 1-d of equal length")
    if np.any(h < 0):
        raise ValueError("heights must be >= 0")
    return float(np.exp(-sup_caps_area(v[None, :], h[None, :])[0]))


def S_region_area(alpha, h):
    """Area of the sector region whose emptiness gives ``P[A >= alpha]``."""
    alpha = np.asarray(alpha, dtype=float)
    h = _check_unit(h)
    if np.any(alpha < 0) or np.any(alpha > math.pi / 2 + 1e-15):
        raise ValueError("alpha must lie in [0, pi/2]")
    c = 1.0 - h
    s = np.sin(alpha)
    out = (
        alpha
        + 0.5 * c * c * np.sin(2.0 * alpha)
        - c * s * np.sqrt(np.maximum(0.0, 1.0 - c * c * s * s))
        - np.arcsin(np.clip(c * s, -1.0, 1.0))
    )
    return out if out.ndim else float(out)


def angle_tail(lam: float, alpha, h):
    out = np.exp(-lam * np.asarray(S_region_area(alpha, h)))
    return out if np.ndim(out) else float(out)


def S_region_derivative(alpha, h):
    """``d/dalpha`` of :func:`S_region_area`, in the cancellation-free form.

    ``1 + c^2 cos 2a - 2 c cos a sqrt(1 - c^2 sin^2 a)`` equals
    ``((1 - c^2) / (q + c cos a))^2`` with ``q = sqrt(1 - c^2 sin^2 a)``.
    """
    alpha = np.asarray(alpha, dtype=float)
    h = np.asarray(h, dtype=float)
    c = 1.0 - h
    one_m_c2 = h * (2.0 - h)
    q = np.sqrt(np.cos(alpha) ** 2 + one_m_c2 * np.sin(alpha) ** 2)
    den = q + c * np.cos(alpha)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, (one_m_c2 / np.where(den > 0, den, 1.0)) ** 2, 0.0)
    return out


def r_tail_finite(lam: float, h: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """P[r(v0) >= h] at intensity ``lam``.

    The angular integral is taken in ``w = pi/2 - alpha``, where the integrand
    concentrates on the scale ``lam^{-1/3}``.
    """
    h = float(_check_unit(h))
    if h == 0.0:
        return 1.0
    c = 1.0 - h
    one_m_c2 = h * (2.0 - h)

    def integrand(w):
        sw, cw = np.sin(w), np.cos(w)
        q = np.sqrt(sw * sw + one_m_c2 * cw * cw)
        dl = (one_m_c2 / (q + c * sw)) ** 2
        # cap height 1 - c cos(w), written without cancellation
        height = 2.0 * np.sin(0.5 * w) ** 2 + h * cw
        return lam * dl * np.exp(-lam * _cap_area_unchecked(height))

    scale = min(lam ** (-1.0 / 3.0), math.pi / 2) / 4.0
    bp = geometric_breakpoints(0.0, math.pi / 2, scale)
    integral, _ = integrate_pieces(integrand, bp, quad.abs_tol, quad.max_depth)
    return float(min(1.0, s_tail_finite(lam, h) + integral))


def _tail_cut(h: float, exponent: float = 30.0) -> float:
    """Smallest ``u`` with ``CAP_CONST (h + u^2/2)^{3/2} >= exponent``."""
    level = (exponent / CAP_CONST) ** (2.0 / 3.0)
    return math.sqrt(2.0 * max(level - h, 0.0))


def r_tail_limit(h: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Limit survival of the rescaled defect radius.

    Computed as ``2 int_0^inf (h + u^2) exp(-CAP_CONST (h + u^2/2)^{3/2}) du``,
    the limit of the finite-intensity angular integral after integrating its
    ``u sqrt(2h + u^2)`` part by parts. Equals 1 at ``h = 0``.
    """
    h = float(h)
    if h < 0:
        raise ValueError("h must be >= 0")

    def integrand(u):
        return 2.0 * (h + u * u) * np.exp(-CAP_CONST * (h + 0.5 * u * u) ** 1.5)

    u_star = _tail_cut(h, -math.log(quad.tail_threshold) + 2.0)
    if u_star == 0.0:
        return float(np.exp(-CAP_CONST * h**1.5) * 0.0)
    bp = np.linspace(0.0, u_star, 9)
    value, _ = integrate_pieces(integrand, bp, quad.abs_tol * 0.1, quad.max_depth)
    return float(min(1.0, max(0.0, value)))


def r_tail_limit_displayed(h: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """The alternative closed form ``e^{-c h^{3/2}} + 2 int u^2 e^{-c(h+u^2/2)^{3/2}} du - 1``.

    Kept for comparison only: it agrees with :func:`r_tail_limit` at ``h = 0``
    but becomes negative for moderate ``h``.
    """
    h = float(h)

    def integrand(u):
        return 2.0 * u * u * np.exp(-CAP_CONST * (h + 0.5 * u * u) ** 1.5)

    u_star = max(_tail_cut(h, 32.0), 1e-3)
    value, _ = integrate_pieces(integrand, np.linspace(0.0, u_star, 9), quad.abs_tol, quad.max_depth)
    return float(np.exp(-CAP_CONST * h**1.5) + value - 1.0)


def _d_exponent(t, h):
    """``-log D_cdf``, i.e. ``(2/3)(2h+t^2)^{3/2} - t(2h + 2t^2/3)`` without cancellation."""
    a = 2.0 * np.asarray(h, dtype=float)
    t = np.asarray(t, dtype=float)
    s = np.sqrt(a + t * t)
    den = (s + t) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, a * a * (2.0 * s + t) / (3.0 * np.where(den > 0, den, 1.0)), 0.0)
    return out


def D_cdf(t, h):
    """``P[|D| <= t]`` for the farthest-peak offset at height ``h``."""
    t = np.asarray(t, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(t < 0) or np.any(h < 0):
        raise ValueError("t and h must be >= 0")
    out = np.exp(-_d_exponent(t, h))
    return out if out.ndim else float(out)


def D_density(t, h):
    """Density of ``|D|`` on ``t > 0`` (``D`` also has an atom at 0)."""
    t = np.asarray(t, dtype=float)
    a = 2.0 * np.asarray(h, dtype=float)
    s = np.sqrt(a + t * t)
    return np.exp(-_d_exponent(t, h)) * (a / (s + t)) ** 2


# ----------------------------------------------------------------------------
# joint law of the defect radius at several locations


def _even_cap(v, center, t, h):
    """``(h + t^2/2 - (|v - center| + t)^2 / 2)^+``."""
    return np.maximum(h + 0.5 * t * t - 0.5 * (np.abs(v - center) + t) ** 2, 0.0)


def _shifted_cap(v, center, t, h):
    """``(h + t^2/2 - (v - center - t)^2 / 2)^+``."""
    return np.maximum(h + 0.5 * t * t - 0.5 * (v - center - t) ** 2, 0.0)


def _v_grid(v, h, t_max, n):
    reach = math.sqrt(2.0 * float(np.max(h)) + t_max * t_max) + 2.0 * t_max + 1e-9
    return np.linspace(float(np.min(v)) - reach, float(np.max(v)) + reach, n)


def _simpson_weights(x):
    n = x.size
    if n % 2 == 0:
        raise ValueError("Simpson grid needs an odd number of nodes")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (x[1] - x[0]) / 3.0


def D_joint_cdf(t: np.ndarray, v: Sequence[float], h: Sequence[float], n_grid: int = 4001) -> np.ndarray:
    """Joint CDF ``P[|D_i| <= t_i for all i]``; ``t`` has shape ``(m, n)``."""
    v = np.asarray(v, dtype=float)
    h = np.asarray(h, dtype=float)
    t = np.atleast_2d(np.asarray(t, dtype=float))
    grid = _v_grid(v, h, float(t.max()), n_grid)
    w = _simpson_weights(grid)
    out = np.empty(t.shape[0])
    chunk = max(1, 2_000_000 // n_grid)
    for s in range(0, t.shape[0], chunk):
        tt = t[s : s + chunk]
        env = np.zeros((tt.shape[0], grid.size))
        for i in range(v.size):
            env = np.maximum(env, _even_cap(grid[None, :], v[i], tt[:, i : i + 1], h[i]))
        out[s : s + chunk] = np.exp(-(env @ w))
    return out


def D_farthest_area(D: np.ndarray, v: Sequence[float], h: Sequence[float], n_grid: int = 4001) -> np.ndarray:
    """Area ``F`` between the shifted caps and the known-empty even caps."""
    v = np.asarray(v, dtype=float)
    h = np.asarray(h, dtype=float)
    D = np.atleast_2d(np.asarray(D, dtype=float))
    grid = _v_grid(v, h, float(np.abs(D).max()), n_grid)
    w = _simpson_weights(grid)
    out = np.empty(D.shape[0])
    chunk = max(1, 2_000_000 // n_grid)
    for s in range(0, D.shape[0], chunk):
        dd = D[s : s + chunk]
        up = np.zeros((dd.shape[0], grid.size))
        known = np.zeros_like(up)
        for i in range(v.size):
            t = np.abs(dd[:, i : i + 1])
            up = np.maximum(up, _shifted_cap(grid[None, :], v[i], dd[:, i : i + 1], h[i]))
            known = np.maximum(known, _even_cap(grid[None, :], v[i], t, h[i]))
        out[s : s + chunk] = np.maximum((up - known) @ w, 0.0)
    return out


@dataclass
class MCValue:
    value: float
    stderr: float
    n: int
    flags: list = field(default_factory=list)


def _t_nodes(resolution: int, t_max: float) -> np.ndarray:
    k = np.arange(resolution) / (resolution - 1)
    return t_max * k**2


def sample_D_joint(v, h, n_samples: int, rng, resolution: Optional[int] = None, t_max: float = 4.0):
    """Draw ``(D_1, ..., D_n)`` from the joint law of the farthest-peak offsets.

    ``|D|`` is drawn by inverse CDF on a tensor grid of the joint CDF (cells
    from inclusion-exclusion, uniform within cells, atom at 0 kept exact);
    signs are independent fair coins. The law has a ``1/t`` tail, so the mass
    outside ``[0, t_max]^n`` is kept as its own category: those draws are
    returned as NaN rows. Returns ``(D, flags)``.
    """
    gen = as_generator(rng)
    v = np.asarray(v, dtype=float)
    h = np.asarray(h, dtype=float)
    n = v.size
    if n > 3:
        raise ValueError("joint D sampling supports at most 3 locations")
    if resolution is None:
        resolution = {1: 2048, 2: 512, 3: 48}[n]
    nodes = _t_nodes(resolution, t_max)
    mesh = np.stack(np.meshgrid(*([nodes] * n), indexing="ij"), axis=-1).reshape(-1, n)
    F = D_joint_cdf(mesh, v, h).reshape((resolution,) * n)
    # pad with zeros below the first node, then difference along every axis
    P = np.pad(F, [(1, 0)] * n)
    for ax in range(n):
        P = np.diff(P, axis=ax)
    P = np.maximum(P, 0.0)
    tail = max(0.0, 1.0 - P.sum())
    flat = np.append(P.ravel(), tail)
    cells = gen.choice(flat.size, size=n_samples, p=flat / flat.sum())
    outside = cells == P.size
    idx = np.stack(np.unravel_index(np.where(outside, 0, cells), P.shape), axis=1)
    lower = np.where(idx > 0, nodes[np.maximum(idx - 1, 0)], 0.0)
    upper = nodes[idx]
    u = gen.random(idx.shape)
    T = np.where(idx > 0, lower + u * (upper - lower), 0.0)
    signs = np.where(gen.random(idx.shape) < 0.5, -1.0, 1.0)
    D = T * signs
    D[outside] = np.nan
    flags = []
    if tail > 0:
        flags.append(f"mass {tail:.2e} beyond t_max={t_max}")
    if resolution < 256:
        flags.append(f"grid resolution {resolution} per axis limits accuracy")
    return D, flags


def r_fidis_limit(v: Sequence[float], h: Sequence[float], n_mc: int, rng, resolution: Optional[int] = None) -> MCValue:
    """Joint limit survival ``P[dPhi(v_i) >= h_i for all i]`` by Monte Carlo over D.

    Draws with some ``|D_i| > t_max`` contribute at most ``exp(-F)`` at the
    grid edge, which is checked to be negligible and counted as zero.
    """
    v = np.asarray(v, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(np.diff(v) <= 0):
        raise ValueError("locations must be strictly increasing")
    if np.all(h == 0):
        return MCValue(1.0, 0.0, n_mc, [])
    D, flags = sample_D_joint(v, h, n_mc, rng, resolution)
    outside = np.isnan(D).any(axis=1)
    vals = np.zeros(n_mc)
    if (~outside).any():
        vals[~outside] = np.exp(-D_farthest_area(D[~outside], v, h))
    edge = max(float(np.exp(-D_farthest_area(np.array([[4.0]]), [0.0], [hi])[0])) for hi in h)
    if outside.any() and edge > 1e-12:
        flags.append(f"draws beyond t_max may carry weight up to {edge:.2e}")
    flags.append("D signs drawn independently")
    return MCValue(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_mc)), n_mc, flags)


# ----------------------------------------------------------------------------
# neighbouring pairs


def chord_distance(theta, h1, h2):
    """Distance from the origin to the chord through two points at radii ``1-h1``, ``1-h2``."""
    c1, c2 = 1.0 - np.asarray(h1, dtype=float), 1.0 - np.asarray(h2, dtype=float)
    theta = np.asarray(theta, dtype=float)
    num = c1 * c2 * np.sin(theta)
    den = np.sqrt(c1 * c1 + c2 * c2 - 2.0 * c1 * c2 * np.cos(theta))
    return num / den


def pair_density_finite(theta, h1, h2, lam: float):
    """Unnormalized density of a neighbouring vertex pair at intensity ``lam``."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta >= math.pi):
        raise ValueError("theta must lie in (0, pi)")
    _check_unit(h1, "h1")
    _check_unit(h2, "h2")
    T = chord_distance(theta, h1, h2)
    out = np.exp(-lam * _cap_area_unchecked(1.0 - T)) * (1.0 - np.asarray(h1)) * (1.0 - np.asarray(h2))
    return out if out.ndim else float(out)


def pair_density_limit(theta, h1, h2):
    """Unnormalized density ``exp(-area of the downward parabola through both points)``."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise ValueError("theta must be > 0")
    _, H = downward_apex(0.0, h1, theta, h2)
    out = np.exp(-cap_area_from_height(H))
    return out if np.ndim(out) else float(out)


@dataclass
class PairCorrelation:
    value: float
    stderr: float
    terms: list
    truncated: bool = True


def _chain_area(points_v: np.ndarray, points_h: np.ndarray) -> np.ndarray:
    """Union area of the caps through consecutive points of each chain (rows)."""
    a, H = downward_apex(points_v[:, :-1], points_h[:, :-1], points_v[:, 1:], points_h[:, 1:])
    return sup_caps_area(a, H)


def pair_correlation(x, y, n_max: int = 2, n_mc: int = 20000, rng=None, height_scale: float = 1.0) -> PairCorrelation:
    """Second-order correlation of the extreme points of the growth process.

    The ``n = 0`` term is ``exp(-area(x, y))``, the probability that the two
    points are neighbours; the ``n``-th term integrates over ``n`` ordered
    intermediate extreme points linking them, by Monte Carlo with uniform
    positions and exponential heights. The series is truncated at ``n_max``.
    """
    if n_max > 2 or n_max < 0:
        raise ValueError("n_max must be 0, 1 or 2")
    (vx, hx), (vy, hy) = map(tuple, (x, y))
    if vx == vy:
        raise ValueError("points must have distinct spatial coordinates")
    if vx > vy:
        (vx, hx), (vy, hy) = (vy, hy), (vx, hx)
    gen = as_generator(0 if rng is None else rng)
    _, H0 = downward_apex(vx, hx, vy, hy)
    terms = [(float(np.exp(-cap_area_from_height(H0))), 0.0)]
    span = vy - vx
    for n in range(1, n_max + 1):
        inner_v = np.sort(gen.uniform(vx, vy, (n_mc, n)), axis=1)
        inner_h = gen.exponential(height_scale, (n_mc, n))
        pv = np.column_stack([np.full(n_mc, vx), inner_v, np.full(n_mc, vy)])
        ph = np.column_stack([np.full(n_mc, hx), inner_h, np.full(n_mc, hy)])
        # uniform ordered positions carry density n!/span^n; exponential heights
        log_q = -np.log(height_scale) * n - (inner_h / height_scale).sum(axis=1)
        weight = span**n / math.factorial(n) * np.exp(-_chain_area(pv, ph) - log_q)
        terms.append((float(weight.mean()), float(weight.std(ddof=1) / math.sqrt(n_mc))))
    value = sum(t[0] for t in terms)
    stderr = math.sqrt(sum(t[1] ** 2 for t in terms))
    return PairCorrelation(value, stderr, terms, True)
