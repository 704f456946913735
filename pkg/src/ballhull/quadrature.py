"""Adaptive Simpson quadrature shared by the exact-law evaluators.

The engine refines breadth-first so that every refinement round evaluates the
integrand once on a numpy array; integrands must therefore be vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-9
    max_depth: int = 48
    tail_threshold: float = 1e-12

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")


def adaptive_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    abs_tol: float = 1e-9,
    max_depth: int = 48,
    strict: bool = True,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``abs_tol``.

    Uses the interval-halving error estimate ``|S2 - S1| / 15`` with the
    Richardson-corrected value ``S2 + (S2 - S1) / 15``. Returns
    ``(value, error_estimate)``.
    """
    if a == b:
        return 0.0, 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    x = np.array([a, 0.5 * (a + b), b])
    fx = np.asarray(f(x), dtype=float)
    lo = np.array([a])
    hi = np.array([b])
    flo, fmid, fhi = fx[:1], fx[1:2], fx[2:]
    whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    tol = np.array([abs_tol])
    total = 0.0
    err_total = 0.0
    depth = 0
    while lo.size:
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        vals = np.asarray(f(np.concatenate((lm, rm))), dtype=float)
        flm, frm = vals[: lo.size], vals[lo.size :]
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        refined = left + right
        delta = refined - whole
        ok = np.abs(delta) <= 15.0 * tol
        depth += 1
        if depth >= max_depth:
            ok[:] = True
        done = ok
        total += float(np.sum(refined[done] + delta[done] / 15.0))
        err_total += float(np.sum(np.abs(delta[done]) / 15.0))
        keep = ~done
        if not keep.any():
            break
        lo_k, mid_k, hi_k = lo[keep], mid[keep], hi[keep]
        lo = np.concatenate((lo_k, mid_k))
        hi = np.concatenate((mid_k, hi_k))
        flo = np.concatenate((flo[keep], fmid[keep]))
        fhi = np.concatenate((fmid[keep], fhi[keep]))
        fmid = np.concatenate((flm[keep], frm[keep]))
        whole = np.concatenate((left[keep], right[keep]))
        tol = np.concatenate((tol[keep], tol[keep])) * 0.5
    if strict and not np.isfinite(total):
        raise QuadratureError("non-finite integral", float("inf"))
    if strict and err_total > 10.0 * abs_tol:
        raise QuadratureError(f"tolerance {abs_tol:.3g} not met", err_total)
    return sign * total, err_total


def integrate_pieces(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    abs_tol: float = 1e-9,
    max_depth: int = 48,
    strict: bool = True,
) -> tuple[float, float]:
    """Adaptive Simpson over consecutive pieces, tolerance split by length."""
    pts = np.asarray(breakpoints, dtype=float)
    span = pts[-1] - pts[0]
    if span == 0:
        return 0.0, 0.0
    total = 0.0
    err = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b == a:
            continue
        share = max(abs_tol * (b - a) / span, abs_tol * 1e-6)
        v, e = adaptive_simpson(f, a, b, share, max_depth, strict)
        total += v
        err += e
    return total, err


def geometric_breakpoints(a: float, b: float, scale: float, ratio: float = 2.0) -> np.ndarray:
    """Breakpoints ``a, a+scale, a+scale*ratio, ...`` up to ``b``.

    Resolves integrands concentrated within ``scale`` of ``a``.
    """
    pts = [a]
    step = scale
    while a + step < b:
        pts.append(a + step)
        step *= ratio
    pts.append(b)
    return np.asarray(pts)
