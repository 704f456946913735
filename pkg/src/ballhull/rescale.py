"""Exponential chart on the sphere and the scaling transform to space-time."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core_model import ModelParams
from .errors import AntipodeUndefined
from .hull_geometry import Polytope, _require_origin, defect_radius, defect_support, external_angles, face_tops
from .samplers import as_generator, sample_ball_process, tangent_basis

ANTIPODE_TOL = 1e-14


@dataclass
class ExpChart:
    """Exponential map of the unit sphere ``S^{d-1}`` at ``base`` (d = 2 or 3)."""

    d: int = 2
    base: Optional[np.ndarray] = None
    _frame: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError("ExpChart supports d in {2, 3}")
        b = np.eye(self.d)[0] if self.base is None else np.asarray(self.base, dtype=float)
        self.base = b / np.linalg.norm(b)
        if self.d == 2:
            self._frame = (np.array([-self.base[1], self.base[0]]),)
        else:
            self._frame = tangent_basis(self.base)

    def exp(self, v) -> np.ndarray:
        """Tangent vector(s) to unit direction(s); ``v`` has shape ``(..., d-1)`` or scalar for d = 2."""
        v = np.asarray(v, dtype=float)
        if self.d == 2:
            t = v[..., 0] if (v.ndim and v.shape[-1] == 1) else v
            e = self._frame[0]
            return np.cos(t)[..., None] * self.base + np.sin(t)[..., None] * e
        e1, e2 = self._frame
        norm = np.linalg.norm(v, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            sinc = np.where(norm > 0, np.sin(norm) / np.where(norm > 0, norm, 1.0), 1.0)
        return (
            np.cos(norm)[..., None] * self.base
            + (sinc * v[..., 0])[..., None] * e1
            + (sinc * v[..., 1])[..., None] * e2
        )

    def log(self, u) -> np.ndarray:
        """Inverse of :meth:`exp` on the sphere minus the antipode of ``base``."""
        u = np.asarray(u, dtype=float)
        u = u / np.linalg.norm(u, axis=-1, keepdims=True)
        if np.any(np.linalg.norm(u + self.base, axis=-1) < ANTIPODE_TOL):
            raise AntipodeUndefined("the antipode of the chart base has no preimage")
        c = u @ self.base
        if self.d == 2:
            return np.arctan2(u @ self._frame[0], c)
        e1, e2 = self._frame
        a, b = u @ e1, u @ e2
        s = np.hypot(a, b)
        ang = np.arctan2(s, c)
        with np.errstate(invalid="ignore", divide="ignore"):
            k = np.where(s > 0, ang / np.where(s > 0, s, 1.0), 1.0)
        return np.stack((k * a, k * b), axis=-1)


def forward(params: ModelParams, chart: ExpChart, x) -> np.ndarray:
    """``T(x) = (lam^beta exp^{-1}(x/|x|), lam^gamma (1 - |x|))`` row-wise.

    Returns shape ``(n, d)``: spatial coordinates then height.
    """
    X = np.atleast_2d(np.asarray(x, dtype=float))
    e = params.exponents
    r = np.linalg.norm(X, axis=1)
    if np.any(r == 0):
        raise AntipodeUndefined("the origin has no direction")
    v = chart.log(X / r[:, None])
    v = np.reshape(v, (X.shape[0], params.d - 1))
    h = params.lam ** e.gamma * (1.0 - r)
    return np.column_stack((params.lam ** e.beta * v, h))


def inverse(params: ModelParams, chart: ExpChart, p) -> np.ndarray:
    """Inverse of :func:`forward`."""
    P = np.atleast_2d(np.asarray(p, dtype=float))
    e = params.exponents
    v = P[:, :-1] * params.lam ** (-e.beta)
    r = 1.0 - P[:, -1] * params.lam ** (-e.gamma)
    u = chart.exp(v if params.d == 3 else v[:, 0])
    return u * r[:, None]


def in_rescaled_region(params: ModelParams, p) -> np.ndarray:
    """Membership in ``lam^beta B_{d-1}(pi) x [0, lam^gamma)``."""
    P = np.atleast_2d(np.asarray(p, dtype=float))
    e = params.exponents
    vn = np.linalg.norm(P[:, :-1], axis=1)
    return (vn <= params.lam ** e.beta * math.pi) & (P[:, -1] >= 0) & (P[:, -1] < params.lam ** e.gamma)


def rescaled_density(params: ModelParams, v, h) -> np.ndarray:
    """Density of the image intensity at ``(v, h)``.

    For d = 2 it is exactly ``(1 - lam^{-gamma} h) h^delta``; for d = 3 the
    chart Jacobian ``sin(|w|)/|w|`` at ``w = lam^{-beta} v`` also appears.
    """
    e = params.exponents
    h = np.asarray(h, dtype=float)
    base = (1.0 - params.lam ** (-e.gamma) * h) ** (params.d - 1) * h ** params.delta
    if params.d == 2:
        return base
    w = np.linalg.norm(np.atleast_1d(v), axis=-1) * params.lam ** (-e.beta)
    return base * np.where(w > 0, np.sin(w) / np.where(w > 0, w, 1.0), 1.0)


@dataclass
class IntensityReport:
    boxes: list
    empirical: np.ndarray
    stderr: np.ndarray
    expected: np.ndarray
    limit: np.ndarray

    def z_scores(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.stderr > 0, (self.empirical - self.expected) / self.stderr, 0.0)


def _box_integral_2d(params: ModelParams, v0, v1, h0, h1, limit: bool) -> float:
    a = params.delta + 1.0
    g = params.lam ** (-params.exponents.gamma)
    hpart = (h1 ** a - h0 ** a) / a
    if not limit:
        hpart -= g * (h1 ** (a + 1) - h0 ** (a + 1)) / (a + 1)
    return (v1 - v0) * hpart


def rescaled_intensity_check(params: ModelParams, boxes, n_rep: int, rng) -> IntensityReport:
    """Mean counts of the rescaled sample in boxes ``(v0, v1, h0, h1)`` (d = 2).

    Only the preimage region of each box is sampled, which is exact for a
    Poisson process.
    """
    if params.d != 2:
        raise ValueError("rescaled_intensity_check supports d = 2")
    gen = as_generator(rng)
    chart = ExpChart(2)
    e = params.exponents
    emp, se, exp_, lim = [], [], [], []
    for v0, v1, h0, h1 in boxes:
        if h1 <= h0 or v1 <= v0:
            emp.append(0.0), se.append(0.0), exp_.append(0.0), lim.append(0.0)
            continue
        t0, t1 = v0 * params.lam ** (-e.beta), v1 * params.lam ** (-e.beta)
        mid = 0.5 * (t0 + t1)
        axis = np.array([math.cos(mid), math.sin(mid)])
        r_min = 1.0 - h1 * params.lam ** (-e.gamma)
        counts = np.empty(n_rep)
        for i in range(n_rep):
            X = sample_ball_process(params, gen, r_min=r_min, axis=axis, half_angle=0.5 * (t1 - t0))
            if X.shape[0] == 0:
                counts[i] = 0
                continue
            P = forward(params, chart, X)
            inside = (P[:, 0] >= v0) & (P[:, 0] <= v1) & (P[:, 1] >= h0) & (P[:, 1] <= h1)
            counts[i] = np.count_nonzero(inside)
        emp.append(counts.mean())
        se.append(counts.std(ddof=1) / math.sqrt(n_rep) if n_rep > 1 else 0.0)
        exp_.append(_box_integral_2d(params, v0, v1, h0, h1, False))
        lim.append(_box_integral_2d(params, v0, v1, h0, h1, True))
    return IntensityReport(list(boxes), np.array(emp), np.array(se), np.array(exp_), np.array(lim))


@dataclass
class RescaledFunctions:
    """Evaluators ``s_hat(v) = lam^gamma s(exp(lam^{-beta} v))`` and likewise ``r_hat``."""

    params: ModelParams
    chart: ExpChart
    hull: Polytope

    def _dirs(self, v):
        e = self.params.exponents
        w = np.asarray(v, dtype=float) * self.params.lam ** (-e.beta)
        return self.chart.exp(w)

    def s_hat(self, v):
        return self.params.lam ** self.params.exponents.gamma * np.asarray(defect_support(self.hull, self._dirs(v)))

    def r_hat(self, v):
        return self.params.lam ** self.params.exponents.gamma * np.asarray(defect_radius(self.hull, self._dirs(v)))


def rescaled_functions(params: ModelParams, chart: ExpChart, hull: Polytope) -> RescaledFunctions:
    _require_origin(hull)
    return RescaledFunctions(params, chart, hull)


def rescaled_face_measure(params: ModelParams, chart: ExpChart, hull: Polytope, k: int) -> np.ndarray:
    """Images of face tops under the scaling transform, shape ``(f_k, d)``."""
    tops = np.array([t for _, t in face_tops(hull, k)])
    return forward(params, chart, tops)


def rescaled_curvature_atoms(params: ModelParams, chart: ExpChart, hull: Polytope, k: int) -> list:
    """Per-face triples ``(external angle, T(top), lam^{beta k} vol_k)``."""
    e = params.exponents
    out = []
    for deco in external_angles(hull)[k]:
        img = forward(params, chart, deco.top)[0]
        out.append((deco.external_angle, img, params.lam ** (e.beta * k) * deco.volume))
    return out
