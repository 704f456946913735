"""Command-line entry point: ``ballhull eval | run | sample``."""

from __future__ import annotations

import configparser
import csv
import io
import itertools
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional

import click
import numpy as np

from . import __version__
from .core_model import ModelParams
from .errors import BallHullError, ConfigError
from .samplers import RngStream, Window

DEFAULT_SEED = 20261014


# ----------------------------------------------------------------------------
# formatting


def fmt(x) -> str:
    """Shortest round-trip text for numbers; plain ``str`` otherwise."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(header, rows, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    write_csv(header, rows, buf)
    return buf.getvalue()


def json_text(obj) -> str:
    from .experiments import _jsonable

    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ----------------------------------------------------------------------------
# eval


def parse_grid(spec: str) -> tuple:
    """``name=a:b:step`` (inclusive) or ``name=x1,x2,...``."""
    if "=" not in spec:
        raise ConfigError(f"grid {spec!r} must look like name=values")
    name, vals = spec.split("=", 1)
    name = name.strip()
    try:
        if ":" in vals:
            a, b, step = (float(x) for x in vals.split(":"))
            if step <= 0 or b < a:
                raise ConfigError(f"bad range in grid {spec!r}")
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            values = [round(a + i * step, 12) for i in range(n)]
        else:
            values = [float(x) for x in vals.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad grid {spec!r}: {exc}") from None
    if not values:
        raise ConfigError(f"empty grid {spec!r}")
    return name, values


def _laws() -> dict:
    from . import exact_laws_2d as ex
    from .dual_cells import dual_gumbel_constants
    from .experiments import extremal_constants

    def consts(d, delta):
        c = extremal_constants(int(d), delta)
        return [("M", c.M), ("C1", c.C1), ("C2", c.C2), ("C3", c.C3), ("b", c.b), ("alpha_const", c.alpha_const)]

    def dconsts(d):
        c = dual_gumbel_constants(int(d))
        return [("C1_prime", c.C1), ("C2_prime", c.C2), ("C3_prime", c.C3)]

    return {
        "s-tail-limit": (("h",), lambda h: float(ex.s_tail_limit(h))),
        "s-tail-finite": (("lambda", "h"), lambda lam, h: float(ex.s_tail_finite(lam, h))),
        "r-tail-limit": (("h",), lambda h: float(ex.r_tail_limit(h))),
        "r-tail-finite": (("lambda", "h"), lambda lam, h: float(ex.r_tail_finite(lam, h))),
        "cap-area": (("h",), lambda h: float(ex.cap_area(h))),
        "s-region-area": (("alpha", "h"), lambda a, h: float(ex.S_region_area(a, h))),
        "angle-tail": (("lambda", "alpha", "h"), lambda lam, a, h: float(ex.angle_tail(lam, a, h))),
        "d-cdf": (("t", "h"), lambda t, h: float(ex.D_cdf(t, h))),
        "pair-density-limit": (("theta", "h1", "h2"), lambda t, a, b: float(ex.pair_density_limit(t, a, b))),
        "pair-density-finite": (("theta", "h1", "h2", "lambda"), lambda t, a, b, lam: float(ex.pair_density_finite(t, a, b, lam))),
        "constants": (("d", "delta"), consts),
        "dual-constants": (("d",), dconsts),
    }


def cmd_eval(law: str, grids: dict) -> tuple:
    """Evaluate ``law`` on the Cartesian product of ``grids``; returns ``(header, rows)``."""
    laws = _laws()
    if law not in laws:
        raise ConfigError(f"unknown law {law!r}; choose from {', '.join(sorted(laws))}")
    names, fn = laws[law]
    defaults = {"d": [2.0], "delta": [0.0]}
    missing = [n for n in names if n not in grids and n not in defaults]
    if missing:
        raise ConfigError(f"law {law!r} needs grids for {', '.join(missing)}")
    extra = set(grids) - set(names)
    if extra:
        raise ConfigError(f"law {law!r} takes no parameter(s) {', '.join(sorted(extra))}")
    axes = [grids.get(n, defaults.get(n)) for n in names]
    rows = []
    if law in ("constants", "dual-constants"):
        header = list(names) + ["name", "value"]
        for combo in itertools.product(*axes):
            for key, val in fn(*combo):
                rows.append(list(combo) + [key, val])
        return header, rows
    header = list(names) + ["value"]
    for combo in itertools.product(*axes):
        rows.append(list(combo) + [fn(*combo)])
    return header, rows


# ----------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    experiment: str
    d: int = 2
    lam: Optional[float] = None
    delta: float = 0.0
    alpha: Optional[float] = None
    t: Optional[float] = None
    lam_grid: Optional[list] = None
    reps: Optional[int] = None
    seed: int = DEFAULT_SEED
    workers: int = 1
    out: str = "ballhull-out"
    synthetic: bool = False
    tolerances: dict = field(default_factory=dict)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        run = {}
        for f in fields(self):
            if f.name == "tolerances":
                continue
            v = getattr(self, f.name)
            if v is None:
                continue
            key = {"lam": "lambda", "lam_grid": "lambda_grid"}.get(f.name, f.name)
            run[key] = ",".join(fmt(x) for x in v) if isinstance(v, list) else fmt(v)
        cp["run"] = dict(sorted(run.items()))
        cp["tolerances"] = {k: fmt(v) for k, v in sorted(self.tolerances.items())}
        cp["meta"] = {"version": __version__}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _experiments() -> dict:
    """name -> (defaults, tolerance defaults, runner)."""
    return {
        "survival": ({"lam": 500.0, "reps": 20000}, {"z": 3.0}, _run_survival),
        "local-limit": ({"lam": 1e5, "reps": 5000}, {"ks": 0.02}, _run_local),
        "variance-scaling": (
            {"lam_grid": [250.0, 500.0, 1000.0, 2000.0, 4000.0], "reps": 2000},
            {"slope_f0": 0.07, "slope_V": 0.10, "slope_W": 0.10},
            _run_scaling,
        ),
        "clt": ({"lam": 4000.0, "reps": 2000}, {"ks": 0.03}, _run_clt),
        "sigma": ({"lam": 1e4, "reps": 300}, {"ratio_lo": 0.85, "ratio_hi": 1.15}, _run_sigma),
        "sheet": ({"lam": 1e4, "reps": 4000}, {"ratio": 0.10, "increment_z": 3.0, "ks": 0.04}, _run_sheet),
        "gumbel": ({"lam_grid": [1e3, 1e4, 1e5], "reps": 2000}, {"ks": 0.06}, _run_gumbel),
        "pair-law": ({"reps": 1500}, {"z": 3.0}, _run_pair_law),
        "parabolic-duality": ({"reps": 1000}, {"reconstruction": 1e-12}, _run_parabolic_duality),
        "dual-identity": ({"alpha": 1.0, "lam": 50.0, "reps": 1000}, {"identity": 1e-10}, _run_dual_identity),
        "face-bijection": ({"alpha": 1.0, "lam": 50.0, "reps": 1000}, {}, _run_bijection),
        "dual-gumbel": ({"t": 30.0, "reps": 2000}, {"ks": 0.06}, _run_dual_gumbel),
    }


_RUN_KEYS = {
    "experiment": str,
    "d": int,
    "lambda": float,
    "delta": float,
    "alpha": float,
    "t": float,
    "lambda_grid": "floats",
    "reps": int,
    "seed": int,
    "workers": int,
    "out": str,
    "synthetic": "bool",
}


def _coerce(key: str, text: str):
    kind = _RUN_KEYS[key]
    try:
        if kind == "floats":
            return [float(x) for x in str(text).split(",") if x.strip()]
        if kind == "bool":
            s = str(text).strip().lower()
            if s not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return s in ("true", "1", "yes")
        return kind(text)
    except ValueError:
        raise ConfigError(f"bad value {text!r} for {key}") from None


def read_config(path: Optional[str]) -> tuple:
    """Flat INI: ``[run]`` keys plus an optional ``[tolerances]`` section."""
    run, tol = {}, {}
    if path is None:
        return run, tol
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for sec in cp.sections():
        if sec not in ("run", "tolerances", "meta"):
            raise ConfigError(f"unknown config section [{sec}]")
    if cp.has_section("run"):
        for k, v in cp["run"].items():
            if k not in _RUN_KEYS:
                raise ConfigError(f"unknown config key {k!r}")
            run[k] = _coerce(k, v)
    if cp.has_section("tolerances"):
        for k, v in cp["tolerances"].items():
            try:
                tol[k] = float(v)
            except ValueError:
                raise ConfigError(f"bad tolerance {k} = {v!r}") from None
    return run, tol


def resolve_config(file_values: dict, file_tol: dict, overrides: dict) -> RunConfig:
    """Merge file values and command-line overrides, fill defaults, validate."""
    vals = dict(file_values)
    vals.update({k: v for k, v in overrides.items() if v is not None})
    name = vals.get("experiment")
    exps = _experiments()
    if name not in exps:
        raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(sorted(exps))}")
    defaults, tol_defaults, _ = exps[name]
    unknown_tol = set(file_tol) - set(tol_defaults)
    if unknown_tol:
        raise ConfigError(f"experiment {name!r} has no tolerance(s) {', '.join(sorted(unknown_tol))}")
    cfg = RunConfig(experiment=name, tolerances={**tol_defaults, **file_tol})
    key_map = {"lambda": "lam", "lambda_grid": "lam_grid"}
    for k, v in vals.items():
        if k != "experiment":
            setattr(cfg, key_map.get(k, k), v)
    for k, v in defaults.items():
        if getattr(cfg, k) is None:
            setattr(cfg, k, v)
    if cfg.d not in (2, 3):
        raise ConfigError("d must be 2 or 3")
    if cfg.delta < 0:
        raise ConfigError("delta must be >= 0")
    if cfg.lam is not None and cfg.lam <= 0:
        raise ConfigError("lambda must be positive")
    if cfg.reps is not None and cfg.reps < 2:
        raise ConfigError("reps must be >= 2")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.alpha is not None and cfg.alpha < 1:
        raise ConfigError("alpha must be >= 1")
    if cfg.lam_grid is not None and (len(cfg.lam_grid) < 1 or min(cfg.lam_grid) <= 0):
        raise ConfigError("lambda_grid must hold positive values")
    return cfg


# ----------------------------------------------------------------------------
# runners


def _params(cfg: RunConfig, lam: Optional[float] = None) -> ModelParams:
    return ModelParams(cfg.d, cfg.lam if lam is None else lam, cfg.delta)


def _run_survival(cfg, rng):
    from .experiments import survival_check

    hs = [0.005 * k for k in range(1, 11)]
    rep = survival_check(_params(cfg), hs, cfg.reps, rng, cfg.workers)
    z = cfg.tolerances["z"]
    for label in ("s", "r"):
        rep.checks[f"{label}_within_3se"] = all(abs(r["z"]) <= z for r in rep.statistics[label])
    return rep


def _run_local(cfg, rng):
    from .experiments import local_limit_check

    rep = local_limit_check(_params(cfg), cfg.lam, cfg.reps, rng, workers=cfg.workers)
    tol = cfg.tolerances["ks"]
    for k in list(rep.checks):
        rep.checks[k] = rep.statistics[k].statistic <= tol
    return rep


def _synthetic_scaling(cfg) -> "ExperimentReport":
    from .experiments import ExperimentReport, fit_power_law

    p = ModelParams(2, 1.0, cfg.delta)
    rep = ExperimentReport("variance-scaling-synthetic", {"lam_grid": cfg.lam_grid})
    for name, target in (("f0", p.exponents.tau), ("V", -p.exponents.zeta), ("W", -p.exponents.zeta)):
        lams = np.asarray(cfg.lam_grid)
        fit = fit_power_law(lams, 1.7 * lams**target, None, target)
        rep.statistics[f"slope_{name}"] = fit
        rep.checks[f"slope_{name}"] = abs(fit.slope - target) <= 1e-12
    return rep


def _run_scaling(cfg, rng):
    from .experiments import ExperimentReport, variance_scaling_fit

    if cfg.synthetic:
        return _synthetic_scaling(cfg)
    names = ("f0", "V", "W") if cfg.d == 2 else ("f0", "W")
    fits = variance_scaling_fit(_params(cfg, cfg.lam_grid[0]), names, cfg.lam_grid, cfg.reps, rng, cfg.workers)
    rep = ExperimentReport("variance-scaling", {"d": cfg.d, "delta": cfg.delta, "lam_grid": cfg.lam_grid, "reps": cfg.reps})
    rep.tolerances = dict(cfg.tolerances)
    for n, f in fits.items():
        rep.statistics[f"slope_{n}"] = f
        rep.checks[f"slope_{n}"] = abs(f.slope - f.target) <= cfg.tolerances.get(f"slope_{n}", 0.10)
        rep.series[f"var_{n}"] = {"lambda": f.lams, "variance": f.variances, "stderr": f.variance_stderrs}
    return rep


def _run_clt(cfg, rng):
    from .experiments import ExperimentReport, clt_from_values, mc_moments
    from .stats import ks_normal, ks_test, normal_cdf

    rep = ExperimentReport("clt", {"d": cfg.d, "lam": cfg.lam, "reps": cfg.reps})
    tol = cfg.tolerances["ks"]
    if cfg.synthetic:
        x = rng.generator.standard_normal(cfg.reps)
        rep.statistics["synthetic"] = ks_normal(x)
        rep.checks["synthetic"] = rep.statistics["synthetic"].statistic <= 1.63 / math.sqrt(cfg.reps)
        return rep
    names = ("f0", "V", "W") if cfg.d == 2 else ("f0", "W")
    run = mc_moments(_params(cfg), names, cfg.reps, rng, cfg.workers)
    for n in names:
        res = clt_from_values(run.values[n], lattice=n.startswith("f"))
        rep.statistics[n] = res
        primary = res.get("lattice", res["raw"])
        rep.checks[n] = primary.statistic <= tol
        rep.series[n] = run.values[n]
    rep.tolerances = {"ks": tol}
    return rep


def _run_sigma(cfg, rng):
    from .experiments import sigma_consistency

    rep = sigma_consistency(_params(cfg), cfg.reps, rng, workers=cfg.workers)
    lo, hi = cfg.tolerances["ratio_lo"], cfg.tolerances["ratio_hi"]
    rep.checks["ratio_W_in_band"] = lo <= rep.statistics["ratio_W"]["value"] <= hi
    return rep


def _run_sheet(cfg, rng):
    from .experiments import SHEET_GRID, brownian_sheet_check

    return brownian_sheet_check(
        _params(cfg), SHEET_GRID, cfg.lam, cfg.reps, rng, cfg.workers, tol=cfg.tolerances["ratio"], ks_tol=cfg.tolerances["ks"]
    )


def _run_gumbel(cfg, rng):
    from .experiments import ExperimentReport, gumbel_report
    from .stats import gumbel_cdf, ks_test

    if cfg.synthetic:
        rep = ExperimentReport("gumbel-synthetic", {"reps": cfg.reps})
        x = rng.generator.gumbel(size=cfg.reps)
        rep.statistics["synthetic"] = ks_test(x, gumbel_cdf, "Gumbel")
        rep.checks["synthetic"] = rep.statistics["synthetic"].statistic <= 1.63 / math.sqrt(cfg.reps)
        return rep
    return gumbel_report(_params(cfg, cfg.lam_grid[0]), cfg.lam_grid, cfg.reps, rng, cfg.workers, tol=cfg.tolerances["ks"])


def _run_pair_law(cfg, rng):
    from .experiments import pair_law_check

    return pair_law_check(cfg.reps, rng, workers=cfg.workers, z_max=cfg.tolerances["z"])


def _parabolic_pair(stream) -> tuple:
    from .parabolic import GrowthProcess, duality_checks
    from .samplers import sample_halfspace_process

    out = []
    for d, window in ((2, Window(6.0, 4.0)), (3, Window(3.0, 3.0))):
        G = sample_halfspace_process(d, 0.0, window, stream.spawn(d))
        r = duality_checks(GrowthProcess(G, window), n_grid=1000)
        out.append((r.extremes_equal, r.phi_above_psi, r.psi_reconstruction_error, r.phi_reconstruction_error))
    return tuple(out)


def _run_parabolic_duality(cfg, rng):
    from .experiments import ExperimentReport, run_replicates

    res = run_replicates(_parabolic_pair, rng, "parabolic-duality", cfg.reps, cfg.workers)
    rep = ExperimentReport("parabolic-duality", {"reps": cfg.reps})
    tol = cfg.tolerances["reconstruction"]
    for j, label in enumerate(("spatial_1d", "spatial_2d")):
        rows = [r[j] for r in res]
        rep.statistics[label] = {
            "extremes_equal": sum(r[0] for r in rows),
            "phi_above_psi": sum(r[1] for r in rows),
            "max_psi_reconstruction_error": max(r[2] for r in rows),
            "max_phi_reconstruction_error": max(r[3] for r in rows),
        }
        rep.checks[f"{label}_extremes"] = all(r[0] for r in rows)
        rep.checks[f"{label}_phi_above_psi"] = all(r[1] for r in rows)
        rep.checks[f"{label}_reconstruction"] = max(r[2] for r in rows) <= tol
    rep.tolerances = {"reconstruction": tol}
    return rep


def _run_dual_identity(cfg, rng):
    from .dual_cells import duality_check

    rep = duality_check(cfg.alpha, cfg.lam, cfg.reps, rng, workers=cfg.workers)
    err = rep.statistics["max_identity_error"]
    rep.checks["identity"] = math.isfinite(err) and err <= cfg.tolerances["identity"]
    return rep


def _run_bijection(cfg, rng):
    from .dual_cells import face_count_bijection

    return face_count_bijection(cfg.alpha, cfg.lam, cfg.reps, rng, workers=cfg.workers)


def _run_dual_gumbel(cfg, rng):
    from .dual_cells import dual_circumradii, dual_gumbel_check, dual_gumbel_constants
    from .experiments import ExperimentReport

    rep = ExperimentReport("dual-gumbel", {"t": cfg.t, "reps": cfg.reps})
    rep.estimates["constants_prime"] = dual_gumbel_constants(2)
    tol = cfg.tolerances["ks"]
    for kind in ("pv", "crofton"):
        R = dual_circumradii(kind, cfg.t, cfg.reps, rng, cfg.workers)
        rep.series[f"circumradius_{kind}"] = R
        for centering in ("derived", "verbatim"):
            rep.statistics[f"{kind}_{centering}"] = dual_gumbel_check(kind, cfg.t, cfg.reps, None, centering, R=R)
        rep.checks[f"{kind}_derived"] = rep.statistics[f"{kind}_derived"].statistic <= tol
    rep.tolerances = {"ks": tol}
    rep.notes.append("verbatim centerings are informational")
    return rep


def _series_rows(value):
    if isinstance(value, dict):
        cols = {k: np.asarray(v, dtype=float).ravel() for k, v in value.items() if np.ndim(v) >= 1}
        if not cols:
            return None
        n = min(len(c) for c in cols.values())
        return list(cols), [[cols[k][i] for k in cols] for i in range(n)]
    arr = np.asarray(value)
    if arr.ndim == 1 and arr.dtype.kind in "fiu":
        return ["value"], [[x] for x in arr.tolist()]
    if arr.ndim == 2 and arr.dtype.kind in "fiu":
        return [f"c{j}" for j in range(arr.shape[1])], arr.tolist()
    return None


def cmd_run(cfg: RunConfig) -> tuple:
    """Run, persist and return ``(report, exit_code)``."""
    _, _, runner = _experiments()[cfg.experiment]
    rng = RngStream(cfg.seed)
    report = runner(cfg, rng)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(cfg.to_ini(), encoding="utf-8")
    (out / "VERSION").write_text(__version__ + "\n", encoding="utf-8")
    body = report.to_json()
    body["version"] = __version__
    (out / "report.json").write_text(json_text(body), encoding="utf-8")
    for name, value in sorted(report.series.items()):
        table = _series_rows(value)
        if table is not None:
            (out / f"series_{name}.csv").write_text(csv_text(*table), encoding="utf-8")
    return report, (0 if report.passed else 2)


# ----------------------------------------------------------------------------
# sample


def cmd_sample(model: str, cfg: dict, rng) -> tuple:
    """Returns ``("csv", header, rows)`` or ``("json", obj)``."""
    from .dual_cells import sample_zero_cell
    from .samplers import sample_ball_process, sample_halfspace_process

    d = int(cfg.get("d") or 2)
    if model == "ball":
        lam = cfg.get("lam")
        if lam is None or lam <= 0:
            raise ConfigError("sample ball needs --lambda > 0")
        X = sample_ball_process(ModelParams(d, lam, cfg.get("delta") or 0.0), rng)
        return ("csv", ["x", "y", "z"][:d], X.tolist())
    if model == "halfspace":
        L, H = cfg.get("L"), cfg.get("H")
        if not L or not H or L <= 0 or H <= 0:
            raise ConfigError("sample halfspace needs --L and --H > 0")
        P = sample_halfspace_process(d, cfg.get("delta") or 0.0, Window(L, H), rng)
        header = ["v", "h"] if d == 2 else ["v1", "v2", "h"]
        return ("csv", header, P.tolist())
    if model == "zerocell":
        alpha, lam = cfg.get("alpha"), cfg.get("lam")
        if alpha is None or lam is None:
            raise ConfigError("sample zerocell needs --alpha and --lambda")
        return ("json", sample_zero_cell(alpha, lam, rng).to_json())
    raise ConfigError(f"unknown model {model!r}; choose ball, halfspace or zerocell")


# ----------------------------------------------------------------------------
# click wiring


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group()
@click.version_option(__version__, prog_name="ballhull")
def main():
    """Random polytopes in the ball: exact laws, experiments and samples."""


@main.command("eval")
@click.argument("law")
@click.option("--grid", "grids", multiple=True, help="name=a:b:step or name=x1,x2,...")
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--d", type=int, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--t", type=float, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def eval_cmd(law, grids, lam, d, delta, alpha, t, out):
    """Tabulate an exact law as CSV."""
    try:
        g = dict(parse_grid(s) for s in grids)
        for name, v in (("lambda", lam), ("d", d), ("delta", delta), ("alpha", alpha), ("t", t)):
            if v is not None:
                g.setdefault(name, [float(v)])
        header, rows = cmd_eval(law, g)
    except (BallHullError, ValueError) as exc:
        _fail(exc)
    text = csv_text(header, rows)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command("run")
@click.argument("experiment", required=False)
@click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--reps", type=int, default=None)
@click.option("--d", type=int, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--t", type=float, default=None)
@click.option("--synthetic/--no-synthetic", default=None, help="calibration run on synthetic data")
def run_cmd(experiment, config, seed, workers, out, lam, reps, d, delta, alpha, t, synthetic):
    """Run an experiment; exit 0 on pass, 2 on tolerance failure, 1 on error."""
    try:
        file_vals, file_tol = read_config(config)
        over = {
            "experiment": experiment,
            "seed": seed,
            "workers": workers,
            "out": out,
            "lambda": lam,
            "reps": reps,
            "d": d,
            "delta": delta,
            "alpha": alpha,
            "t": t,
            "synthetic": synthetic,
        }
        cfg = resolve_config(file_vals, file_tol, over)
        report, code = cmd_run(cfg)
    except (BallHullError, ValueError) as exc:
        _fail(exc)
    click.echo(f"{cfg.experiment}: {'PASS' if code == 0 else 'FAIL'} ({cfg.out})")
    for k, v in sorted(report.checks.items()):
        click.echo(f"  {k}: {'pass' if v else 'fail'}")
    sys.exit(code)


@main.command("sample")
@click.argument("model")
@click.option("--seed", type=int, default=DEFAULT_SEED)
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--d", type=int, default=2)
@click.option("--delta", type=float, default=0.0)
@click.option("--alpha", type=float, default=None)
@click.option("--L", "L", type=float, default=None)
@click.option("--H", "H", type=float, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def sample_cmd(model, seed, lam, d, delta, alpha, L, H, out):
    """Write a sample of ball, halfspace or zerocell."""
    try:
        res = cmd_sample(model, {"lam": lam, "d": d, "delta": delta, "alpha": alpha, "L": L, "H": H}, RngStream(seed))
    except (BallHullError, ValueError) as exc:
        _fail(exc)
    text = csv_text(res[1], res[2]) if res[0] == "csv" else json_text(res[1])
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
