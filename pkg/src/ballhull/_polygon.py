"""Convex polygon clipping by half-planes (Sutherland-Hodgman on one edge at a time)."""

from __future__ import annotations

import numpy as np


def box_polygon(B: float) -> np.ndarray:
    return np.array([[-B, -B], [B, -B], [B, B], [-B, B]], dtype=float)


def clip_halfplane(poly: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Intersection of a convex CCW polygon with ``{x : <a, x> <= b}``."""
    if poly.shape[0] == 0:
        return poly
    val = poly @ a - b
    keep = val <= 0
    if keep.all():
        return poly
    if not keep.any():
        return poly[:0]
    out = []
    n = poly.shape[0]
    for i in range(n):
        j = (i + 1) % n
        p, q = poly[i], poly[j]
        fp, fq = val[i], val[j]
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return np.asarray(out) if out else poly[:0]


def clip_halfplanes(poly: np.ndarray, A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Clip by every row ``<A_i, x> <= b_i``, most violated constraint first.

    Each constraint is applied at most once, so rounding on freshly cut
    vertices cannot trigger a repeat.
    """
    b = np.array(b, dtype=float)
    while poly.shape[0]:
        viol = (poly @ A.T - b).max(axis=0)
        j = int(np.argmax(viol))
        if viol[j] <= 0:
            break
        poly = clip_halfplane(poly, A[j], b[j])
        b[j] = np.inf
    return poly


def polygon_area(poly: np.ndarray) -> float:
    if poly.shape[0] < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
