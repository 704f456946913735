"""Zero cells of isotropic Poisson line tessellations and their inversion duals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import numpy as np

from ._polygon import box_polygon, clip_halfplanes
from .core_model import ball_volume
from .errors import DegenerateInput, InversionUndefined
from .experiments import ExperimentReport, extremal_constants, gumbel_statistic, run_replicates
from .hull_geometry import angle_directions, convex_hull, defect_support
from .samplers import RngStream, as_generator, dual_mean_count, sample_dual_radial_process
from .stats import KSResult, gumbel_cdf, ks_test

RHO0 = 0.2
IDENTITY_TOL = 1e-10


@dataclass
class ZeroCell:
    """Cell containing the origin, stored unscaled; ``scale`` maps it to its realization.

    ``edge_lines[i]`` is the index of the line carrying the edge from vertex
    ``i`` to vertex ``i + 1``.
    """

    alpha: float
    lam: float
    normals: np.ndarray
    offsets: np.ndarray
    polygon: np.ndarray
    edge_lines: np.ndarray
    r_max: float
    scale: float = 1.0
    doublings: int = 0
    _unscaled: dict = field(default_factory=dict, repr=False)

    @property
    def inradius(self) -> float:
        return self.scale * float(self.offsets.min()) if self.offsets.size else math.inf

    @property
    def circumradius(self) -> float:
        return self.scale * float(np.linalg.norm(self.polygon, axis=1).max())

    @property
    def realization(self) -> np.ndarray:
        return self.scale * self.polygon

    @property
    def f_vector(self) -> tuple:
        k = self.polygon.shape[0]
        return (k, k)

    def radial(self, u) -> np.ndarray:
        """Radius-vector function of the realization in direction(s) ``u``."""
        U = np.atleast_2d(np.asarray(u, dtype=float))
        N = self.normals[self.edge_lines]
        b = self.offsets[self.edge_lines]
        dots = U @ N.T
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dots > 0, b / np.where(dots > 0, dots, 1.0), np.inf)
        out = self.scale * ratio.min(axis=1)
        return out if np.ndim(u) > 1 else out[0]

    def defect_radius(self, u) -> np.ndarray:
        """``r_tilde(u) = radial(u) - 1`` of the unscaled cell."""
        return self.radial(u) / self.scale - 1.0

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "lambda": self.lam,
            "scale": self.scale,
            "r_max": self.r_max,
            "halfplanes": [{"normal": n.tolist(), "offset": float(b)} for n, b in zip(self.normals, self.offsets)],
            "polygon": self.realization.tolist(),
            "edge_lines": self.edge_lines.tolist(),
            "inradius": self.inradius,
            "circumradius": self.circumradius,
        }


def invert(x) -> np.ndarray:
    """``I(x) = x / |x|^2`` row-wise."""
    X = np.asarray(x, dtype=float)
    n2 = np.sum(X * X, axis=-1, keepdims=True)
    if np.any(n2 == 0):
        raise InversionUndefined("inversion is undefined at the origin")
    return X / n2


def _edge_lines(poly: np.ndarray, normals: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    mid = 0.5 * (poly + np.roll(poly, -1, axis=0))
    gap = np.abs(mid @ normals.T - offsets)
    return np.argmin(gap, axis=1)


def _cell_polygon(normals: np.ndarray, offsets: np.ndarray, bound: float) -> np.ndarray:
    return clip_halfplanes(box_polygon(bound), normals, offsets)


def zero_cell_from_lines(alpha: float, lam: float, normals, offsets, r_max: float, scale: float = 1.0, doublings: int = 0) -> ZeroCell:
    normals = np.asarray(normals, dtype=float).reshape(-1, 2)
    offsets = np.asarray(offsets, dtype=float)
    poly = _cell_polygon(normals, offsets, 2.0 * r_max)
    lines = _edge_lines(poly, normals, offsets) if normals.shape[0] else np.zeros(0, dtype=int)
    return ZeroCell(alpha, lam, normals, offsets, poly, lines, r_max, scale, doublings)


def _initial_width(lam: float) -> float:
    return min(1.0, 2.0 * (math.log(lam + math.e) / lam) ** (2.0 / 3.0))


def sample_zero_cell(alpha: float, lam: float, rng, r_max: Optional[float] = None, max_doublings: int = 40) -> ZeroCell:
    """Zero cell of the line process of ``lam 1{|x| > 1} |x|^{alpha - 2} dx`` (d = 2).

    The shell ``1 < |x| <= r_max`` is extended by doubling ``r_max - 1``
    until the cell's circumradius is below ``r_max``: a line at distance
    ``r`` meets the cell only if ``r`` is below its circumradius.
    """
    if alpha < 1 or lam <= 0:
        raise ValueError("need alpha >= 1 and lam > 0")
    gen = as_generator(rng)
    r_hi = 1.0 + _initial_width(lam) if r_max is None else float(r_max)
    U, R = sample_dual_radial_process(alpha, lam, r_hi, gen)
    for k in range(max_doublings + 1):
        cell = zero_cell_from_lines(alpha, lam, U, R, r_hi, doublings=k)
        if cell.polygon.shape[0] >= 3 and cell.circumradius < r_hi:
            return cell
        r_new = 1.0 + 2.0 * (r_hi - 1.0)
        U2, R2 = sample_dual_radial_process(alpha, lam, r_new, gen, r_min=r_hi)
        U, R = np.concatenate([U, U2]), np.concatenate([R, R2])
        r_hi = r_new
    raise DegenerateInput("zero cell still unbounded after the maximal number of extensions")


# ----------------------------------------------------------------------------
# coupled duality


@dataclass
class CoupledSample:
    cell: ZeroCell
    dual_points: np.ndarray
    hull: Optional[object]
    bounded: bool


def coupled_sample(alpha: float, lam: float, rng, rho0: float = RHO0) -> CoupledSample:
    """One line process on ``1 < |x| <= 1/rho0`` and its inversion, a ball process on ``rho0 <= |y| < 1``."""
    gen = as_generator(rng)
    r_max = 1.0 / rho0
    U, R = sample_dual_radial_process(alpha, lam, r_max, gen)
    cell = zero_cell_from_lines(alpha, lam, U, R, r_max)
    Y = invert(U * R[:, None])
    hull = None
    try:
        hull = convex_hull(Y) if Y.shape[0] >= 3 else None
    except DegenerateInput:
        hull = None
    bounded = cell.polygon.shape[0] >= 3 and cell.circumradius < r_max
    return CoupledSample(cell, Y, hull, bounded)


def _duality_replicate(alpha: float, lam: float, rho0: float, n_dirs: int, stream: RngStream) -> dict:
    cs = coupled_sample(alpha, lam, stream, rho0)
    out = {"bounded": cs.bounded, "hull_ok": cs.hull is not None and cs.hull.contains_origin}
    if not (out["bounded"] and out["hull_ok"]):
        out.update(err=math.nan, inradius_ok=False, f=(0, 0, 0, 0), lines_match=False)
        return out
    U = angle_directions(np.linspace(0.0, 2 * math.pi, n_dirs, endpoint=False))
    s = np.asarray(defect_support(cs.hull, U))
    rt = cs.cell.defect_radius(U)
    out["err"] = float(np.max(np.abs(s - (1.0 - 1.0 / (1.0 + rt)))))
    out["inradius_ok"] = bool(cs.hull.offsets.min() > rho0)
    hull = cs.hull
    out["f"] = (cs.cell.f_vector[0], len(hull.faces[1]), cs.cell.f_vector[1], len(hull.faces[0]))
    verts = set(int(hull.source_index[v[0]]) for v in hull.faces[0])
    out["lines_match"] = verts == set(int(i) for i in cs.cell.edge_lines)
    return out


def _coupled_runs(alpha, lam, n_rep, rng, rho0, n_dirs, workers, key):
    return run_replicates(partial(_duality_replicate, alpha, lam, rho0, n_dirs), rng, key, n_rep, workers)


def duality_check(alpha: float, lam: float, n_rep: int, rng, rho0: float = RHO0, n_dirs: int = 256, workers: int = 1) -> ExperimentReport:
    """Per-direction check of ``s = 1 - 1/(1 + r_tilde)`` on coupled replicates."""
    runs = _coupled_runs(alpha, lam, n_rep, rng, rho0, n_dirs, workers, f"duality:{alpha!r}:{lam!r}")
    ok = [r for r in runs if r["bounded"] and r["hull_ok"]]
    rep = ExperimentReport("dual-identity", {"alpha": alpha, "lam": lam, "n_rep": n_rep, "rho0": rho0, "n_dirs": n_dirs})
    errs = [r["err"] for r in ok]
    freq = sum(r["inradius_ok"] for r in ok) / max(len(runs), 1)
    rep.statistics = {
        "max_identity_error": max(errs) if errs else math.nan,
        "valid_replicates": len(ok),
        "inradius_above_rho0_frequency": freq,
        # the omitted intensity lam |y|^{-alpha-2} on |y| < rho0 has infinite mass
        "truncated_mass": math.inf,
    }
    rep.tolerances = {"identity": IDENTITY_TOL, "inradius_frequency": 0.999}
    rep.checks = {
        "identity": bool(errs) and max(errs) <= IDENTITY_TOL,
        "inradius_frequency": freq > 0.999,
    }
    return rep


def face_count_bijection(alpha: float, lam: float, n_rep: int, rng, rho0: float = RHO0, workers: int = 1) -> ExperimentReport:
    """``f0(cell) = f1(hull)``, ``f1(cell) = f0(hull)`` and the edge lines equal the hull vertices."""
    runs = _coupled_runs(alpha, lam, n_rep, rng, rho0, 8, workers, f"bijection:{alpha!r}:{lam!r}")
    ok = [r for r in runs if r["bounded"] and r["hull_ok"]]
    rep = ExperimentReport("face-bijection", {"alpha": alpha, "lam": lam, "n_rep": n_rep, "rho0": rho0})
    mism = sum(1 for r in ok if not (r["f"][0] == r["f"][1] and r["f"][2] == r["f"][3]))
    line_mism = sum(1 for r in ok if not r["lines_match"])
    rep.statistics = {"valid_replicates": len(ok), "count_mismatches": mism, "line_mismatches": line_mism}
    rep.series = {"f": [list(r["f"]) for r in ok]}
    rep.checks = {"counts_equal": len(ok) > 0 and mism == 0, "lines_equal": len(ok) > 0 and line_mism == 0}
    return rep


# ----------------------------------------------------------------------------
# conditioned cells and extremes


def conditioned_parameters(kind: str, t: float, d: int = 2) -> tuple:
    """``(alpha, lam, scale)`` for the typical cell conditioned on inradius above ``t``."""
    if t <= 0:
        raise ValueError("t must be positive")
    k = kind.lower()
    if k == "pv":
        return float(d), (2.0 * t) ** d, t
    if k == "crofton":
        return 1.0, t, t
    raise ValueError(f"unknown cell kind {kind!r}")


def conditioned_cell(kind: str, t: float, rng) -> ZeroCell:
    alpha, lam, scale = conditioned_parameters(kind, t)
    cell = sample_zero_cell(alpha, lam, rng)
    cell.scale = scale
    return cell


@dataclass(frozen=True)
class DualGumbelConstants:
    C1: float
    C2: float
    C3: float

    def to_json(self) -> dict:
        return {"C1": self.C1, "C2": self.C2, "C3": self.C3}


def dual_gumbel_constants(d: int = 2) -> DualGumbelConstants:
    c = extremal_constants(d, 0.0)
    return DualGumbelConstants(d * c.C1, c.C2, c.C3 + d * math.log(2) * c.C1 + c.C2 * math.log(d))


def dual_gumbel_statistic(kind: str, t: float, R, centering: str = "derived", d: int = 2) -> np.ndarray:
    """Centred circumradius statistic of the conditioned cell.

    ``derived`` substitutes ``S = R/t - 1`` and the cell's intensity into the
    ball-model statistic. ``verbatim`` uses the t-power displays; for the
    Voronoi case its constant is ``C3'``, for the Crofton case the
    ``C2 log(t log t)`` term is kept as displayed.
    """
    R = np.asarray(R, dtype=float)
    alpha, lam, scale = conditioned_parameters(kind, t, d)
    if centering == "derived":
        return gumbel_statistic(R / scale - 1.0, lam, d, 0.0)
    if centering != "verbatim":
        raise ValueError("centering must be 'derived' or 'verbatim'")
    c = extremal_constants(d, 0.0)
    p = (d + 1) / 2
    if kind.lower() == "pv":
        cp = dual_gumbel_constants(d)
        coef = 2 ** ((3 * d + 1) / 2) * ball_volume(d - 1) / (d + 1)
        return coef * t ** ((d - 1) / 2) * (R - t) ** p - cp.C1 * math.log(t) - cp.C2 * math.log(math.log(t)) - cp.C3
    coef = 2 ** ((d + 1) / 2) * ball_volume(d - 1) / (d + 1)
    return coef * t ** (-(d - 1) / 2) * (R - t) ** p - c.C1 * math.log(t) - c.C2 * math.log(t * math.log(t)) - c.C3


def _circumradius_replicate(kind: str, t: float, stream: RngStream) -> float:
    return conditioned_cell(kind, t, stream).circumradius


def dual_circumradii(kind: str, t: float, n_rep: int, rng, workers: int = 1) -> np.ndarray:
    key = f"dual-gumbel:{kind.lower()}:{t!r}"
    return np.array(run_replicates(partial(_circumradius_replicate, kind, t), rng, key, n_rep, workers))


def dual_gumbel_check(kind: str, t: float, n_rep: int, rng, centering: str = "derived", workers: int = 1, R=None) -> KSResult:
    if t <= math.e:
        raise ValueError("t must exceed e")
    if R is None:
        R = dual_circumradii(kind, t, n_rep, rng, workers)
    G = dual_gumbel_statistic(kind, t, R, centering)
    return ks_test(G, gumbel_cdf, f"Gumbel ({kind}, {centering} centering)")


def crofton_mean_lines(t: float, r_max: float) -> float:
    """Mean number of lines of the Crofton construction within distance ``r_max`` (unscaled)."""
    return dual_mean_count(1.0, t, r_max)
