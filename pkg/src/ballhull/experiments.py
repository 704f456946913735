"""Monte Carlo harness for variance asymptotics, CLTs, Brownian-sheet and Gumbel limits."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import interpolate
from scipy import stats as sps

from .core_model import ModelParams, ball_volume, sphere_area
from .errors import DegenerateInput, OriginOutside
from .exact_laws_2d import r_tail_limit, s_fidis_limit, s_tail_finite, s_tail_limit, r_tail_finite
from .hull_geometry import (
    Polytope,
    V_process,
    W_process,
    W_total_3d,
    convex_hull,
    defect_radius,
    defect_support,
    intrinsic_volume,
    sup_defect_support,
)
from .parabolic import local_boundary_at_zero, sigma_from_covariance
from .samplers import RngStream, Window, as_generator, sample_ball_polar_box, sample_ball_process, stream_id
from .stats import (
    Estimate,
    KSResult,
    estimate,
    gumbel_cdf,
    ks_normal,
    ks_normal_lattice,
    ks_test,
    ks_two_sample,
    wls_slope,
)

FUNCTIONALS = ("f0", "f1", "f2", "W", "V", "V1", "V2", "S", "s0", "r0")
LATTICE = ("f0", "f1", "f2")


# ----------------------------------------------------------------------------
# reports


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if hasattr(x, "to_json"):
        return _jsonable(x.to_json())
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


@dataclass
class ExperimentReport:
    """Named experiment with estimates, statistics, tolerances and pass flags."""

    name: str
    params: dict = field(default_factory=dict)
    estimates: dict = field(default_factory=dict)
    statistics: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    series: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(bool(v) for v in self.checks.values())

    def to_json(self) -> dict:
        out = _jsonable(asdict(self))
        out["passed"] = self.passed
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


# ----------------------------------------------------------------------------
# replicate streams and the worker pool


def _stream(rng, experiment: str, index: int) -> RngStream:
    """Replicate stream determined by the base stream, experiment key and index."""
    if isinstance(rng, RngStream):
        return RngStream(rng.seed, stream_id(f"{rng.stream_id}/{experiment}", index))
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng), stream_id(experiment, index))
    raise TypeError("replicated experiments take an RngStream or an integer seed")


def run_replicates(fn: Callable, rng, experiment: str, n_rep: int, workers: int = 1, chunk: int = 16) -> list:
    """``[fn(stream_i) for i in range(n_rep)]``; results do not depend on ``workers``."""
    streams = [_stream(rng, experiment, i) for i in range(n_rep)]
    if workers <= 1:
        return [fn(s) for s in streams]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, streams, chunksize=chunk))


# ----------------------------------------------------------------------------
# exact hull sampling from an outer annulus


def _initial_depth(params: ModelParams) -> float:
    e = params.exponents
    lam = params.lam
    return min(1.0, 3.0 * (max(math.log(lam), 1.0) / lam) ** e.gamma)


def sample_hull(params: ModelParams, rng, depth: Optional[float] = None, max_discards: int = 1000) -> tuple:
    """Hull of the ball process from its outer annulus ``|x| >= 1 - a``.

    Points deeper than ``1 - a`` cannot be vertices once the annulus hull has
    every facet at distance ``>= 1 - a`` from the origin; otherwise ``a`` is
    doubled and only the new inner ring is drawn. Replicates whose hull misses
    the origin are discarded and redrawn.

    Returns ``(hull, n_points_drawn, discards)``.
    """
    gen = as_generator(rng)
    d = params.d
    a0 = _initial_depth(params) if depth is None else depth
    discards = 0
    while discards <= max_discards:
        a = a0
        X = sample_ball_polar_box(params, gen, 1.0 - a, 1.0, 0.0, math.pi)
        while True:
            hull = None
            if X.shape[0] >= d + 1:
                try:
                    hull = convex_hull(X)
                except DegenerateInput:
                    hull = None
            if hull is not None and hull.contains_origin and hull.offsets.min() >= 1.0 - a:
                return hull, X.shape[0], discards
            if a >= 1.0:
                break
            a_new = min(1.0, 2.0 * a)
            X = np.concatenate([X, sample_ball_polar_box(params, gen, 1.0 - a_new, 1.0 - a, 0.0, math.pi)])
            a = a_new
        discards += 1
    raise OriginOutside("origin outside the hull on every attempt")


def evaluate_functional(hull: Polytope, name: str) -> float:
    d = hull.d
    if name in ("f0", "f1", "f2"):
        k = int(name[1])
        if k >= d:
            raise ValueError(f"{name} needs d > {k}")
        return float(len(hull.faces[k]))
    if name == "W":
        return W_process(hull, 2 * math.pi) if d == 2 else W_total_3d(hull)
    if name == "V":
        if d != 2:
            raise ValueError("V is implemented for d = 2")
        return V_process(hull, 2 * math.pi)
    if name in ("V1", "V2"):
        return intrinsic_volume(hull, int(name[1]))
    if name == "S":
        return sup_defect_support(hull)
    axis = np.eye(d)[0]
    if name == "s0":
        return float(defect_support(hull, axis))
    if name == "r0":
        return float(defect_radius(hull, axis))
    raise ValueError(f"unknown functional {name!r}")


def _hull_replicate(params: ModelParams, names: tuple, stream: RngStream) -> tuple:
    hull, _, disc = sample_hull(params, stream)
    return tuple(evaluate_functional(hull, n) for n in names), disc


@dataclass
class MomentRun:
    estimates: dict
    values: dict
    discards: int

    def to_json(self) -> dict:
        return {"estimates": self.estimates, "discards": self.discards}


def mc_moments(params: ModelParams, functional, n_rep: int, rng, workers: int = 1) -> MomentRun:
    """Replicate loop: sample, hull, evaluate one or several functionals."""
    names = (functional,) if isinstance(functional, str) else tuple(functional)
    for n in names:
        if n not in FUNCTIONALS:
            raise ValueError(f"unknown functional {n!r}")
    key = f"moments:d={params.d}:lam={params.lam!r}:delta={params.delta!r}"
    out = run_replicates(partial(_hull_replicate, params, names), rng, key, n_rep, workers)
    vals = np.array([o[0] for o in out], dtype=float).reshape(n_rep, len(names))
    discards = int(sum(o[1] for o in out))
    values = {n: vals[:, i] for i, n in enumerate(names)}
    return MomentRun({n: estimate(values[n]) for n in names}, values, discards)


# ----------------------------------------------------------------------------
# variance scaling and CLT


def variance_exponent(params: ModelParams, functional: str) -> float:
    e = params.exponents
    if functional in LATTICE:
        return e.tau
    if functional in ("W", "V", "V1", "V2"):
        return -e.zeta
    raise ValueError(f"no variance exponent for {functional!r}")


@dataclass
class SlopeFit:
    slope: float
    stderr: float
    target: float
    lams: list
    variances: list
    variance_stderrs: list

    def to_json(self) -> dict:
        return asdict(self)


def fit_power_law(lams, variances, variance_stderrs=None, target: float = float("nan")) -> SlopeFit:
    """Weighted least squares of ``log Var`` on ``log lambda``."""
    x = np.log(np.asarray(lams, dtype=float))
    y = np.log(np.asarray(variances, dtype=float))
    w = None
    if variance_stderrs is not None:
        rel = np.asarray(variance_stderrs, dtype=float) / np.asarray(variances, dtype=float)
        w = 1.0 / rel**2
    slope, se = wls_slope(x, y, w)
    return SlopeFit(slope, se, target, list(map(float, lams)), list(map(float, variances)),
                    [] if variance_stderrs is None else list(map(float, variance_stderrs)))


def variance_scaling_fit(
    params: ModelParams, functional, lam_grid: Sequence[float], n_rep: int, rng, workers: int = 1, runs: Optional[dict] = None
) -> dict:
    """Slope of ``log Var`` against ``log lambda`` for each functional.

    ``runs`` (``lam -> MomentRun``) lets callers reuse replicates.
    """
    names = (functional,) if isinstance(functional, str) else tuple(functional)
    lam_grid = list(lam_grid)
    if len(lam_grid) < 4:
        raise ValueError("need at least four intensities")
    runs = {} if runs is None else runs
    for lam in lam_grid:
        if lam not in runs:
            runs[lam] = mc_moments(ModelParams(params.d, lam, params.delta), names, n_rep, rng, workers)
    out = {}
    for n in names:
        var = [runs[lam].estimates[n].variance for lam in lam_grid]
        se = [runs[lam].estimates[n].variance_stderr for lam in lam_grid]
        out[n] = fit_power_law(lam_grid, var, se, variance_exponent(params, n))
    return out


def clt_from_values(values, lattice: bool = False) -> dict:
    """KS distances of standardized values to the normal law (raw and, for counts, lattice corrected)."""
    out = {"raw": ks_normal(values)}
    if lattice:
        out["lattice"] = ks_normal_lattice(values)
    return out


def clt_check(params: ModelParams, functional: str, lam: float, n_rep: int, rng, workers: int = 1) -> KSResult:
    run = mc_moments(ModelParams(params.d, lam, params.delta), functional, n_rep, rng, workers)
    res = clt_from_values(run.values[functional], functional in LATTICE)
    return res.get("lattice", res["raw"])


# ----------------------------------------------------------------------------
# variance constants


def sigma_consistency(
    params: ModelParams,
    n_rep: int,
    rng,
    sigma_reps: int = 200,
    window: Window = Window(40.0, 5.0),
    grid_step: float = 0.05,
    max_lag: float = 8.0,
    run: Optional[MomentRun] = None,
    workers: int = 1,
) -> ExperimentReport:
    """Compare ``lambda^zeta Var W`` and ``lambda^zeta Var V`` with the covariance integrals."""
    if params.d != 2 or params.delta != 0:
        raise ValueError("sigma_consistency supports d = 2, delta = 0")
    gen_key = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    if run is None:
        run = mc_moments(params, ("W", "V"), n_rep, gen_key, workers)
    scale = params.lam ** params.exponents.zeta
    rep = ExperimentReport("sigma-consistency", {"d": params.d, "lam": params.lam, "delta": params.delta, "n_rep": n_rep})
    area = params.d * ball_volume(params.d)
    for kind, fn in (("s", "W"), ("r", "V")):
        sig = sigma_from_covariance(params.d, params.delta, kind, window, grid_step, sigma_reps, gen_key.spawn(ord(kind)), max_lag=max_lag)
        est = run.estimates[fn]
        lhs, lhs_se = scale * est.variance, scale * est.variance_stderr
        rhs, rhs_se = sig.value * area, sig.stderr * area
        ratio = lhs / rhs
        ratio_se = ratio * math.hypot(lhs_se / lhs, rhs_se / rhs)
        rep.estimates[f"scaled_var_{fn}"] = {"value": lhs, "stderr": lhs_se}
        rep.estimates[f"sigma2_{kind}"] = {"value": sig.value, "stderr": sig.stderr, "cut": sig.cut}
        rep.statistics[f"ratio_{fn}"] = {"value": ratio, "stderr": ratio_se}
        rep.checks[f"sigma2_{kind}_positive"] = sig.value > 3 * sig.stderr
        rep.series[f"cov_{kind}"] = {"lag": sig.covariance_lags, "cov": sig.covariance, "stderr": sig.covariance_stderr}
    rep.tolerances = {"ratio_band": [0.85, 1.15]}
    rep.checks["ratio_W_in_band"] = 0.85 <= rep.statistics["ratio_W"]["value"] <= 1.15
    return rep


# ----------------------------------------------------------------------------
# Brownian sheet


# shortest arc ~30 correlation lengths lam^(-1/3) at lam = 1e4; contains v = w/2
SHEET_GRID = (0.45 * math.pi, 0.6 * math.pi, 0.75 * math.pi, 0.9 * math.pi)


def _arc_replicate(params: ModelParams, grid: tuple, stream: RngStream) -> tuple:
    hull, _, disc = sample_hull(params, stream)
    W = [W_process(hull, v) for v in grid]
    V = [V_process(hull, v) for v in grid]
    return W, V, disc


def _held_out_center(X: np.ndarray) -> np.ndarray:
    n = X.shape[0]
    half = n // 2
    A, B = X[:half], X[half:]
    return np.concatenate([A - B.mean(axis=0), B - A.mean(axis=0)])


def _ratio_with_se(a: np.ndarray, b: np.ndarray) -> tuple:
    p, q = a * b, b * b
    R = p.mean() / q.mean()
    se = (p - R * q).std(ddof=1) / math.sqrt(a.size) / q.mean()
    return float(R), float(se)


def brownian_sheet_check(
    params: ModelParams, v_grid: Sequence[float], lam: float, n_rep: int, rng, workers: int = 1, tol: float = 0.10, ks_tol: float = 0.04
) -> ExperimentReport:
    """Covariance structure of the rescaled integrated defect processes (d = 2)."""
    if params.d != 2:
        raise ValueError("brownian_sheet_check supports d = 2")
    grid = tuple(sorted(float(v) for v in v_grid))
    if grid[0] <= 0 or grid[-1] >= math.pi:
        raise ValueError("v_grid must lie in (0, pi)")
    p = ModelParams(2, lam, params.delta)
    key = f"sheet:lam={lam!r}:grid={grid!r}"
    out = run_replicates(partial(_arc_replicate, p, grid), rng, key, n_rep, workers)
    scale = lam ** (p.exponents.zeta / 2)
    rep = ExperimentReport("brownian-sheet", {"lam": lam, "n_rep": n_rep, "v_grid": list(grid), "delta": params.delta})
    rep.tolerances = {"ratio_abs": tol, "increment_z": 3.0, "marginal_ks": ks_tol}
    for label, idx in (("W", 0), ("V", 1)):
        X = scale * np.array([o[idx] for o in out])
        C = _held_out_center(X)
        w = C[:, -1]
        ratios, ses = [], []
        for j, v in enumerate(grid):
            R, se = _ratio_with_se(C[:, j], w)
            ratios.append(R)
            ses.append(se)
        target = [v / grid[-1] for v in grid]
        incr = []
        for j in range(1, len(grid)):
            a = C[:, j - 1]
            b = C[:, j] - C[:, j - 1]
            r = float(np.corrcoef(a, b)[0, 1])
            incr.append({"arcs": [[0.0, grid[j - 1]], [grid[j - 1], grid[j]]], "corr": r, "z": r * math.sqrt(len(a))})
        ks = [ks_normal(X[:, j]).statistic for j in range(len(grid))]
        rep.statistics[f"{label}_cov_ratio"] = {"value": ratios, "stderr": ses, "target": target}
        rep.statistics[f"{label}_increments"] = incr
        rep.statistics[f"{label}_marginal_ks"] = ks
        if label == "W":
            rep.checks["W_ratio"] = all(abs(r - t) <= tol for r, t in zip(ratios, target))
            rep.checks["W_increments"] = all(abs(i["z"]) <= 3.0 for i in incr)
            rep.checks["W_marginal_ks"] = max(ks) <= ks_tol
    rep.notes.append(f"discarded replicates: {sum(o[2] for o in out)}")
    return rep


# ----------------------------------------------------------------------------
# extremes


@dataclass
class ExtremalConstants:
    M: float
    C1: float
    C2: float
    C3: float
    b: float
    alpha_const: float

    def to_json(self) -> dict:
        return asdict(self)


def limit_radius_moment(m: float, delta: float) -> float:
    """``E R^m`` for the density ``2 (delta + 1) (1 - v^2)^delta v`` on ``[0, 1]``."""
    return math.exp(math.lgamma(delta + 2) + math.lgamma(m / 2 + 1) - math.lgamma(m / 2 + delta + 2))


def extremal_constants(d: int, delta: float) -> ExtremalConstants:
    """Centering constants of the sup statistic.

    ``alpha_const`` is the coverage constant for caps whose radii follow the
    limit radius law, written with the moments ``E R^{d-2}`` and ``E R^{d-1}``.
    """
    if d < 2 or delta < 0:
        raise ValueError("need d >= 2 and delta >= 0")
    e = ModelParams(d, 1.0, delta).exponents
    g = e.gamma
    M = (
        2 ** ((d - 1) / 2)
        * math.gamma(delta + 1)
        * math.gamma((d + 1) / 2)
        * ball_volume(d - 1)
        / math.gamma((2 * delta + d + 3) / 2)
    )
    C1 = (d - 1) * g / 2
    C2 = (d - 1) * (2 - g) / 2
    ER1 = limit_radius_moment(d - 1, delta)
    ER2 = limit_radius_moment(d - 2, delta)
    b = ball_volume(d - 1) / (d * ball_volume(d)) * ER1
    ratio = math.sqrt(math.pi) * math.gamma((d + 1) / 2) / math.gamma(d / 2)
    alpha_const = ratio ** (d - 2) * ER2 ** (d - 1) / ER1 ** (d - 2) / math.factorial(d - 1)
    inner = b * 2 ** ((d - 1) / 2) * (C1 / M) ** (g * (d - 1) / 2) / ((d - 1) * g / 2) ** (d - 1)
    C3 = math.log(alpha_const) - math.log(inner)
    return ExtremalConstants(M, C1, C2, C3, b, alpha_const)


def gumbel_statistic(S, lam: float, d: int, delta: float) -> np.ndarray:
    """``G = M lam S^{1/gamma} - C1 log lam - C2 log log lam - C3``."""
    c = extremal_constants(d, delta)
    g = ModelParams(d, lam, delta).exponents.gamma
    S = np.asarray(S, dtype=float)
    return c.M * lam * S ** (1.0 / g) - c.C1 * math.log(lam) - c.C2 * math.log(math.log(lam)) - c.C3


def gumbel_check(params: ModelParams, lam: float, n_rep: int, rng, workers: int = 1, S_values=None) -> KSResult:
    """KS distance of the centred sup statistic to the Gumbel law."""
    if S_values is None:
        S_values = mc_moments(ModelParams(params.d, lam, params.delta), "S", n_rep, rng, workers).values["S"]
    G = gumbel_statistic(S_values, lam, params.d, params.delta)
    return ks_test(G, gumbel_cdf, "Gumbel exp(-exp(-t))")


# ----------------------------------------------------------------------------
# local limits


def _crossing(hull: Polytope, u: np.ndarray, origin_source: int) -> Optional[tuple]:
    dots = hull.normals @ u
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dots > 0, hull.offsets / np.where(dots > 0, dots, 1.0), np.inf)
    f = int(np.argmin(ratio))
    if not np.isfinite(ratio[f]):
        return None
    face = hull.faces[hull.d - 1][f]
    if origin_source in set(hull.source_index[list(face)].tolist()):
        return None
    return float(ratio[f]), hull.normals[f], float(hull.offsets[f])


def local_defects(params: ModelParams, rng, depth: Optional[float] = None, max_growth: int = 30) -> tuple:
    """Exact ``(s(u0), r(u0))`` at ``u0 = e_1`` from a growing polar box around ``u0``.

    The box is ``{|x| >= 1 - a, angle(x, u0) <= Theta(a)}`` with
    ``Theta(a) = 2 arccos(1 - a)``. ``s`` is confirmed once the supporting cap
    has height ``<= a``; ``r`` once the outer cap of the hull facet crossed by
    the ray lies inside the box. Growth adds the new part of the box only.
    """
    gen = as_generator(rng)
    d = params.d
    u0 = np.eye(d)[0]
    a = 2.0 * params.lam ** (-params.exponents.gamma) if depth is None else depth

    def theta(a):
        return min(math.pi, 2.0 * math.acos(max(-1.0, 1.0 - a)))

    X = sample_ball_polar_box(params, gen, 1.0 - a, 1.0, 0.0, theta(a))
    for _ in range(max_growth):
        s = r = None
        if X.shape[0]:
            s_val = 1.0 - float(np.max(X @ u0))
            if s_val <= a:
                s = s_val
        if X.shape[0] >= d:
            P = np.vstack([X, np.zeros((1, d))])
            try:
                hull = convex_hull(P)
            except DegenerateInput:
                hull = None
            if hull is not None:
                c = _crossing(hull, u0, P.shape[0] - 1)
                if c is not None:
                    rho, n, off = c
                    ang = math.acos(min(1.0, float(n @ u0)))
                    if 1.0 - off <= a and ang + math.acos(min(1.0, off)) <= theta(a):
                        r = 1.0 - rho
        if s is not None and r is not None:
            return s, r
        if a >= 1.0 and theta(a) >= math.pi:
            raise OriginOutside("hull does not contain the origin")
        a_new = min(1.0, 2.0 * a)
        X = np.concatenate(
            [
                X,
                sample_ball_polar_box(params, gen, 1.0 - a_new, 1.0 - a, 0.0, theta(a_new)),
                sample_ball_polar_box(params, gen, 1.0 - a, 1.0, theta(a), theta(a_new)),
            ]
        )
        a = a_new
    raise OriginOutside("local defects not confirmed")


def _local_replicate(params: ModelParams, stream: RngStream) -> tuple:
    return local_defects(params, stream)


def _psi_replicate(d: int, delta: float, stream: RngStream) -> tuple:
    psi, phi, _ = local_boundary_at_zero(d, delta, stream)
    return psi, phi


def r_tail_limit_table(h_max: float = 8.0, n: int = 1601) -> Callable:
    """Monotone interpolant of the limiting r-tail on ``[0, h_max]`` (zero beyond)."""
    hs = np.linspace(0.0, h_max, n)
    tab = np.array([r_tail_limit(h) for h in hs])
    f = interpolate.PchipInterpolator(hs, tab, extrapolate=False)

    def tail(h):
        h = np.asarray(h, dtype=float)
        out = f(np.clip(h, 0.0, h_max))
        return np.where(h > h_max, 0.0, np.where(h < 0, 1.0, out))

    return tail


def local_limit_check(params: ModelParams, lam: float, n_rep: int, rng, n_psi: Optional[int] = None, workers: int = 1) -> ExperimentReport:
    """Rescaled local defects at a fixed direction against their limits."""
    d, delta = params.d, params.delta
    p = ModelParams(d, lam, delta)
    g = p.exponents.gamma
    key = f"local:d={d}:lam={lam!r}:delta={delta!r}"
    out = np.array(run_replicates(partial(_local_replicate, p), rng, key, n_rep, workers))
    s_hat, r_hat = lam**g * out[:, 0], lam**g * out[:, 1]
    n_psi = n_rep if n_psi is None else n_psi
    pp = np.array(run_replicates(partial(_psi_replicate, d, delta), rng, f"psi0:d={d}:delta={delta!r}", n_psi, workers))
    psi0, phi0 = pp[:, 0], pp[:, 1]
    rep = ExperimentReport("local-limit", {"d": d, "lam": lam, "delta": delta, "n_rep": n_rep, "n_psi": n_psi})
    rep.series = {"s_hat": s_hat, "r_hat": r_hat, "psi0": psi0, "phi0": phi0}
    if d == 2 and delta == 0:
        rtail = r_tail_limit_table()
        s_cdf = lambda h: 1.0 - s_tail_limit(np.maximum(h, 0.0))  # noqa: E731
        r_cdf = lambda h: 1.0 - rtail(h)  # noqa: E731
        rep.statistics["ks_s_hat_vs_limit"] = ks_test(s_hat, s_cdf, "1 - s_tail_limit")
        rep.statistics["ks_r_hat_vs_limit"] = ks_test(r_hat, r_cdf, "1 - r_tail_limit")
        rep.statistics["ks_psi0_vs_limit"] = ks_test(psi0, s_cdf, "1 - s_tail_limit")
        rep.statistics["ks_phi0_vs_limit"] = ks_test(phi0, r_cdf, "1 - r_tail_limit")
        rep.tolerances = {"ks": 0.02}
        for k in ("ks_s_hat_vs_limit", "ks_r_hat_vs_limit", "ks_psi0_vs_limit"):
            rep.checks[k] = rep.statistics[k].statistic <= 0.02
    else:
        rep.statistics["ks_s_hat_vs_psi0"] = ks_two_sample(s_hat, psi0, "simulated dPsi(0)")
        rep.statistics["ks_r_hat_vs_phi0"] = ks_two_sample(r_hat, phi0, "simulated dPhi(0)")
        rep.tolerances = {"ks": 0.03}
        rep.checks["ks_s_hat_vs_psi0"] = rep.statistics["ks_s_hat_vs_psi0"].statistic <= 0.03
    return rep


def fidis_psi_check(v: Sequence[float], h: Sequence[float], n_rep: int, rng, window: Window = Window(12.0, 5.0)) -> dict:
    """Joint survival of ``dPsi`` at two points from window simulations vs the exact fidis."""
    from .parabolic import GrowthProcess, hull_process
    from .samplers import sample_halfspace_process

    gen = as_generator(rng)
    hits = 0
    grid = np.asarray(v, dtype=float)
    for _ in range(n_rep):
        G = sample_halfspace_process(2, 0.0, window, gen)
        hp = hull_process(GrowthProcess(G, window))
        vals = hp.psi_from_vertices(grid)
        hits += int(np.all(vals >= np.asarray(h)))
    p = hits / n_rep
    exact = s_fidis_limit(v, h)
    return {"empirical": p, "stderr": math.sqrt(max(p * (1 - p), 1e-300) / n_rep), "exact": exact}


# ----------------------------------------------------------------------------
# finite-intensity survival laws


def _axis_replicate(params: ModelParams, stream: RngStream) -> tuple:
    gen = as_generator(stream)
    while True:
        X = sample_ball_process(params, gen)
        if X.shape[0] < params.d + 1:
            continue
        try:
            hull = convex_hull(X)
        except DegenerateInput:
            continue
        if hull.contains_origin:
            u = np.eye(params.d)[0]
            return float(defect_support(hull, u)), float(defect_radius(hull, u))


def survival_check(params: ModelParams, hs: Sequence[float], n_rep: int, rng, workers: int = 1, quad=None) -> ExperimentReport:
    """Empirical survival of ``s(u0)`` and ``r(u0)`` against the finite-intensity laws (d = 2)."""
    if params.d != 2 or params.delta != 0:
        raise ValueError("survival_check supports d = 2, delta = 0")
    key = f"survival:lam={params.lam!r}"
    out = np.array(run_replicates(partial(_axis_replicate, params), rng, key, n_rep, workers))
    rep = ExperimentReport("finite-survival", {"lam": params.lam, "n_rep": n_rep, "h": list(hs)})
    rep.tolerances = {"z": 3.0}
    for j, (label, law) in enumerate(
        (("s", lambda h: float(s_tail_finite(params.lam, h))), ("r", lambda h: r_tail_finite(params.lam, h) if quad is None else r_tail_finite(params.lam, h, quad)))
    ):
        rows = []
        for h in hs:
            p_emp = float(np.mean(out[:, j] >= h))
            p = law(h)
            se = math.sqrt(p * (1 - p) / n_rep)
            rows.append({"h": h, "empirical": p_emp, "exact": p, "stderr": se, "z": (p_emp - p) / se if se > 0 else 0.0})
        rep.statistics[label] = rows
        rep.checks[f"{label}_within_3se"] = all(abs(r["z"]) <= 3.0 for r in rows)
    rep.series = {"s": out[:, 0], "r": out[:, 1]}
    return rep


def gap_law_cdf(lam: float, h: float, radial_weight: Callable = None) -> float:
    """Finite-intensity approximation ``P(S <= h) ~ exp(-mu e^{-m})`` in d = 2.

    ``mu`` is the mean number of points with ``|x| > 1 - h`` and ``m`` the
    mean number of their direction arcs covering a fixed direction; the
    product ``mu e^{-m}`` is the mean number of uncovered gaps. The optional
    ``radial_weight(rho)`` multiplies the intensity ``lam dx``.
    """
    from scipy import integrate

    if h <= 0:
        return 0.0
    if h >= 1:
        return 1.0
    w = (lambda r: 1.0) if radial_weight is None else radial_weight
    lo = 1.0 - h
    mu = lam * integrate.quad(lambda r: 2 * math.pi * r * w(r), lo, 1.0)[0]
    m = lam * integrate.quad(lambda r: 2 * math.acos(min(1.0, lo / r)) * r * w(r), lo, 1.0)[0]
    return math.exp(-mu * math.exp(-m))


def gumbel_report(params: ModelParams, lam_grid: Sequence[float], n_rep: int, rng, workers: int = 1, tol: float = 0.06) -> ExperimentReport:
    """Gumbel KS over an intensity grid, its trend, and (d = 2, delta = 0) the finite-intensity gap law."""
    lam_grid = sorted(float(x) for x in lam_grid)
    rep = ExperimentReport("gumbel", {"d": params.d, "delta": params.delta, "lam_grid": lam_grid, "n_rep": n_rep})
    rep.estimates["constants"] = extremal_constants(params.d, params.delta)
    ks = []
    for lam in lam_grid:
        S = mc_moments(ModelParams(params.d, lam, params.delta), "S", n_rep, rng, workers).values["S"]
        r = gumbel_check(params, lam, n_rep, rng, S_values=S)
        ks.append(r.statistic)
        G = gumbel_statistic(S, lam, params.d, params.delta)
        entry = {"ks": r, "mean_G": float(G.mean()), "sd_G": float(G.std(ddof=1))}
        if params.d == 2 and params.delta == 0:
            entry["ks_gap_law"] = ks_test(S, np.vectorize(lambda h: gap_law_cdf(lam, h)), "finite-intensity gap law")
        rep.statistics[f"lam={lam:g}"] = entry
    rep.statistics["ks_series"] = ks
    rep.tolerances = {"ks_at_largest": tol}
    rep.checks["ks_at_largest"] = ks[-1] <= tol
    rep.checks["ks_non_increasing"] = all(b <= a for a, b in zip(ks, ks[1:]))
    return rep


# ----------------------------------------------------------------------------
# pair law of neighbouring extreme germs


PAIR_THETA_EDGES = (0.0, 0.5, 0.9, 1.3, 1.8, 2.5, 4.5)
PAIR_H_EDGES = (0.0, 0.25, 0.55, 1.0, 3.0)
PAIR_CELLS = ((0.1, 0.3, 0.3), (0.3, 0.3, 0.3), (0.2, 0.5, 0.5))


def _gl_box_integral(f: Callable, lo, hi, n: int = 12) -> float:
    x, w = np.polynomial.legendre.leggauss(n)
    axes, weights = [], []
    for a, b in zip(lo, hi):
        axes.append(0.5 * (b - a) * x + 0.5 * (b + a))
        weights.append(0.5 * (b - a) * w)
    mesh = np.meshgrid(*axes, indexing="ij")
    W = weights[0][:, None, None] * weights[1][None, :, None] * weights[2][None, None, :]
    return float(np.sum(W * f(*mesh)))


def _pair_window(window: Window, theta_edges, h_edges, cells, eps: float, eta: float, stream: RngStream) -> dict:
    from .parabolic import GrowthProcess, edge_margin, hull_process, truncation_ok, typical_pairs
    from .samplers import sample_halfspace_process

    G = sample_halfspace_process(2, 0.0, window, stream)
    proc = GrowthProcess(G, window)
    hp = hull_process(proc)
    m = edge_margin(proc)
    ps = typical_pairs(proc, m, hp)
    hist, _ = np.histogramdd(np.column_stack([ps.theta, ps.h1, ps.h2]), bins=(theta_edges, h_edges, h_edges))
    # ordered pairs of extreme germs whose first member lies in the trimmed window
    E = proc.germs[hp.sorted_vertices()]
    lo, hi = -window.L + m, window.L - m
    counts = []
    for th, h1, h2 in cells:
        c = 0
        for i in np.flatnonzero((E[:, 0] >= lo) & (E[:, 0] <= hi)):
            dv = E[:, 0] - E[i, 0]
            sel = (np.abs(dv - th) <= eps) & (np.abs(E[:, 1] - h2) <= eta) & (abs(E[i, 1] - h1) <= eta)
            c += int(np.count_nonzero(sel))
        counts.append(c)
    grid = np.linspace(lo, hi, 200)
    return {
        "hist": hist,
        "length": hi - lo,
        "cells": counts,
        "truncation_ok": truncation_ok(proc, hp, grid),
    }


def pair_law_check(
    n_windows: int,
    rng,
    window: Window = Window(50.0, 6.0),
    theta_edges=PAIR_THETA_EDGES,
    h_edges=PAIR_H_EDGES,
    cells=PAIR_CELLS,
    eps: float = 0.05,
    eta: float = 0.1,
    workers: int = 1,
    z_max: float = 3.0,
) -> ExperimentReport:
    """Neighbouring extreme germs of the 1-D growth process against the limit pair density.

    Histogram: pairs in the box spanned by the edges, both sides normalized
    within the box, per-bin multinomial stderr. Correlation: ordered pairs of
    extreme germs in small cells against the leading ``exp(-area)`` term.
    """
    from .exact_laws_2d import pair_correlation, pair_density_limit

    key = f"pairs:{window.L!r}:{window.H!r}"
    fn = partial(_pair_window, window, tuple(theta_edges), tuple(h_edges), tuple(cells), eps, eta)
    res = run_replicates(fn, rng, key, n_windows, workers)
    H = sum(r["hist"] for r in res)
    N = float(H.sum())
    length = float(sum(r["length"] for r in res))
    te, he = np.asarray(theta_edges), np.asarray(h_edges)
    phi = np.zeros(H.shape)
    for i in range(len(te) - 1):
        for j in range(len(he) - 1):
            for k in range(len(he) - 1):
                phi[i, j, k] = _gl_box_integral(
                    pair_density_limit, (max(te[i], 1e-12), he[j], he[k]), (te[i + 1], he[j + 1], he[k + 1])
                )
    p = phi / phi.sum()
    emp = H / N
    se = np.sqrt(p * (1 - p) / N)
    z = (emp - p) / se
    # replicate spread of the per-window proportions, grouped into 20 batches
    batches = np.array_split(np.arange(n_windows), min(20, n_windows))
    props = []
    for b in batches:
        hb = sum(res[i]["hist"] for i in b)
        props.append(hb / max(hb.sum(), 1.0))
    props = np.asarray(props)
    se_rep = props.std(axis=0, ddof=1) / math.sqrt(len(batches))
    rep = ExperimentReport("pair-law", {"n_windows": n_windows, "L": window.L, "H": window.H, "bins": list(H.shape)})
    rep.statistics["pairs"] = N
    rep.statistics["max_abs_z_multinomial"] = float(np.max(np.abs(z)))
    chi2 = float(np.sum((H - N * p) ** 2 / (N * p)))
    rep.statistics["chi2"] = {"value": chi2, "dof": int(H.size - 1), "pvalue": float(sps.chi2.sf(chi2, H.size - 1))}
    with np.errstate(divide="ignore", invalid="ignore"):
        z_rep = np.where(se_rep > 0, (emp - p) / se_rep, 0.0)
    rep.statistics["max_abs_z_replicate"] = float(np.max(np.abs(z_rep)))
    rep.statistics["truncation_ok_fraction"] = sum(r["truncation_ok"] for r in res) / n_windows
    rep.series["histogram"] = {"empirical": emp.ravel(), "expected": p.ravel(), "stderr": se.ravel()}
    cell_rows = []
    for c, (th, h1, h2) in enumerate(cells):
        cnt = sum(r["cells"][c] for r in res)
        vol = (2 * eps) * (2 * eta) ** 2
        dens = cnt / (length * vol)
        dens_se = math.sqrt(max(cnt, 1)) / (length * vol)
        lead = _gl_box_integral(
            pair_density_limit, (th - eps, h1 - eta, h2 - eta), (th + eps, h1 + eta, h2 + eta)
        ) / vol
        series = pair_correlation((0.0, h1), (th, h2), n_max=2, rng=as_generator(0))
        cell_rows.append(
            {"theta": th, "h1": h1, "h2": h2, "count": cnt, "density": dens, "stderr": dens_se,
             "leading_term": lead, "z": (dens - lead) / dens_se, "series_at_centre": series.value}
        )
    rep.statistics["correlation_cells"] = cell_rows
    rep.tolerances = {"z": z_max}
    rep.checks["histogram"] = rep.statistics["max_abs_z_multinomial"] <= z_max
    rep.checks["leading_term"] = all(abs(r["z"]) <= z_max for r in cell_rows)
    return rep
