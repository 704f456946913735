"""Areas of unions of downward parabolic caps ``(H - (v - a)**2 / 2)^+``.

A cap with apex ``(a, H)`` has support ``|v - a| <= sqrt(2H)`` and area
``(4 sqrt(2) / 3) H**1.5``. Unions are integrated exactly by splitting the line
at support endpoints and pairwise crossings, so every piece carries a single
active quadratic.
"""

from __future__ import annotations

import numpy as np

CAP_CONST = 4.0 * np.sqrt(2.0) / 3.0


def cap_area_from_height(H):
    return CAP_CONST * np.maximum(H, 0.0) ** 1.5


def downward_apex(v1, h1, v2, h2):
    """Apex of the downward unit parabola ``H - (v - a)**2 / 2`` through two points."""
    v1, h1, v2, h2 = map(np.asarray, (v1, h1, v2, h2))
    theta = v2 - v1
    a = 0.5 * (v1 + v2) + (h2 - h1) / theta
    H = 0.5 * (h1 + h2) + (h1 - h2) ** 2 / (2.0 * theta**2) + theta**2 / 8.0
    return a, H


def _antiderivative(v, a, H):
    return H * v - (v - a) ** 3 / 6.0


def sup_caps_area(apex_v, apex_h) -> np.ndarray:
    """Exact area under ``max_j (H_j - (v - a_j)**2 / 2)^+``.

    ``apex_v`` and ``apex_h`` have shape ``(..., K)``; returns shape ``(...)``.
    """
    a = np.asarray(apex_v, dtype=float)
    H = np.maximum(np.asarray(apex_h, dtype=float), 0.0)
    batch = a.shape[:-1]
    K = a.shape[-1]
    a = a.reshape(-1, K)
    H = H.reshape(-1, K)
    if K == 1:
        return cap_area_from_height(H[:, 0]).reshape(batch)
    w = np.sqrt(2.0 * H)
    pts = [a - w, a + w]
    iu, ju = np.triu_indices(K, 1)
    if iu.size:
        ai, aj, Hi, Hj = a[:, iu], a[:, ju], H[:, iu], H[:, ju]
        diff = aj - ai
        with np.errstate(divide="ignore", invalid="ignore"):
            # H_i - (v-a_i)^2/2 = H_j - (v-a_j)^2/2 is linear in v
            cross = 0.5 * (ai + aj) + (Hi - Hj) / np.where(diff == 0, np.inf, diff)
        cross = np.where(np.isfinite(cross), cross, ai)
        pts.append(cross)
    lo = (a - w).min(axis=1, keepdims=True)
    hi = (a + w).max(axis=1, keepdims=True)
    bp = np.clip(np.concatenate(pts, axis=1), lo, hi)
    bp.sort(axis=1)
    left, right = bp[:, :-1], bp[:, 1:]
    mid = 0.5 * (left + right)
    vals = H[:, None, :] - (mid[:, :, None] - a[:, None, :]) ** 2 / 2.0
    j = np.argmax(vals, axis=2)
    active = np.take_along_axis(vals, j[:, :, None], axis=2)[:, :, 0] > 0
    aj = np.take_along_axis(a, j, axis=1)
    Hj = np.take_along_axis(H, j, axis=1)
    piece = _antiderivative(right, aj, Hj) - _antiderivative(left, aj, Hj)
    area = np.where(active & (right > left), piece, 0.0).sum(axis=1)
    return area.reshape(batch)
