"""Paraboloid growth process and hull process on R^{d-1} x R_+.

Germs are rows ``(v_1, ..., v_{d-1}, h)``. The lifting ``(v, h) -> (v, h + |v|^2/2)``
turns downward unit paraboloids into affine functions, so the hull process is
read off the lower convex hull of the lifted germs: its vertices are the
extreme germs and ``dPhi(v) = l(v) - |v|^2/2`` with ``l`` the lower hull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize
from scipy.spatial import ConvexHull, QhullError

from ._caps import CAP_CONST, downward_apex
from ._polygon import box_polygon, clip_halfplanes, polygon_area
from .errors import DegenerateInput, EmptyGerms, WindowTooSmall
from .samplers import Window, as_generator, sample_halfspace_box, sample_halfspace_process

ORIENT_EPS = 1e-12
CHUNK = 1 << 22


def _as_grid(v, dim: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if dim == 1:
        return v.reshape(-1, 1)
    return v.reshape(-1, dim)


def _min_paraboloids(V: np.ndarray, h: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """``min_i h_i + |g - V_i|^2 / 2`` over rows of ``grid`` (chunked)."""
    out = np.empty(grid.shape[0])
    step = max(1, CHUNK // max(1, V.shape[0]))
    for s in range(0, grid.shape[0], step):
        g = grid[s : s + step]
        d2 = ((g[:, None, :] - V[None, :, :]) ** 2).sum(-1)
        out[s : s + step] = (h[None, :] + 0.5 * d2).min(axis=1)
    return out


@dataclass
class GrowthProcess:
    """Germ set of the growth process ``Psi``; ``d`` counts space plus height."""

    germs: np.ndarray
    window: Optional[Window] = None

    def __post_init__(self):
        self.germs = np.atleast_2d(np.asarray(self.germs, dtype=float))
        if self.germs.shape[1] not in (2, 3):
            raise ValueError("germs must have 2 or 3 columns (spatial dimension 1 or 2)")

    @property
    def d(self) -> int:
        return self.germs.shape[1]

    @property
    def spatial(self) -> np.ndarray:
        return self.germs[:, :-1]

    @property
    def heights(self) -> np.ndarray:
        return self.germs[:, -1]

    def lifted(self) -> np.ndarray:
        V = self.spatial
        return np.column_stack((V, self.heights + 0.5 * (V * V).sum(axis=1)))


def psi_boundary(process: GrowthProcess, v) -> np.ndarray:
    """``dPsi(v) = min_x h_x + |v - v_x|^2 / 2`` by direct minimization over all germs."""
    if process.germs.shape[0] == 0:
        raise EmptyGerms("growth process has no germs")
    grid = _as_grid(v, process.d - 1)
    out = _min_paraboloids(process.spatial, process.heights, grid)
    return out if np.ndim(v) else float(out[0])


# ----------------------------------------------------------------------------
# hull process


@dataclass
class HullProcess:
    """Vertices and (d-1)-faces of ``Phi`` with the lifted facet planes.

    ``vertices`` and ``faces`` index into ``process.germs``. Facet ``f`` is
    the plane ``c = a_f + <b_f, v>`` in lifted coordinates.
    """

    process: GrowthProcess
    vertices: np.ndarray
    faces: np.ndarray
    plane_a: np.ndarray
    plane_b: np.ndarray
    _order: Optional[np.ndarray] = field(default=None, repr=False)

    def phi_boundary(self, v) -> np.ndarray:
        """``dPhi(v) = max_f (a_f + <b_f, v>) - |v|^2/2`` (finite inside the germ span)."""
        grid = _as_grid(v, self.process.d - 1)
        out = np.empty(grid.shape[0])
        step = max(1, CHUNK // max(1, self.plane_a.size))
        for s in range(0, grid.shape[0], step):
            g = grid[s : s + step]
            lifted = (self.plane_a[None, :] + g @ self.plane_b.T).max(axis=1)
            out[s : s + step] = lifted - 0.5 * (g * g).sum(axis=1)
        return out if np.ndim(v) else float(out[0])

    def psi_from_vertices(self, v) -> np.ndarray:
        """``dPsi`` recomputed from the vertices of ``Phi`` alone."""
        G = self.process.germs[self.vertices]
        grid = _as_grid(v, self.process.d - 1)
        return _min_paraboloids(G[:, :-1], G[:, -1], grid)

    def sorted_vertices(self) -> np.ndarray:
        """Vertex indices ordered by spatial coordinate (spatial dimension 1)."""
        if self._order is None:
            v = self.process.germs[self.vertices, 0]
            self._order = self.vertices[np.argsort(v, kind="stable")]
        return self._order


def _lower_chain(P: np.ndarray) -> list:
    """Strict lower convex chain of 2-d points (monotone chain)."""
    order = np.lexsort((P[:, 1], P[:, 0]))
    chain: list = []
    for i in order:
        x, y = P[i]
        while len(chain) >= 2:
            o, a = P[chain[-2]], P[chain[-1]]
            cr = (a[0] - o[0]) * (y - o[1]) - (a[1] - o[1]) * (x - o[0])
            scale = math.hypot(a[0] - o[0], a[1] - o[1]) * math.hypot(x - o[0], y - o[1])
            if cr > ORIENT_EPS * scale:
                break
            chain.pop()
        if chain and P[chain[-1], 0] == x:
            continue
        chain.append(int(i))
    return chain


def _hull_1d(process: GrowthProcess) -> HullProcess:
    L = process.lifted()
    chain = np.asarray(_lower_chain(L), dtype=int)
    faces = np.column_stack((chain[:-1], chain[1:])) if chain.size > 1 else np.zeros((0, 2), dtype=int)
    if faces.shape[0]:
        va, vb = L[faces[:, 0], 0], L[faces[:, 1], 0]
        ca, cb = L[faces[:, 0], 1], L[faces[:, 1], 1]
        slope = (cb - ca) / (vb - va)
        a = ca - slope * va
        b = slope[:, None]
    else:
        # a single germ: dPhi is the germ's downward parabola taken as a point mass
        a = np.array([-np.inf])
        b = np.zeros((1, 1))
    return HullProcess(process, np.sort(chain), faces, a, b)


def _hull_2d(process: GrowthProcess) -> HullProcess:
    L = process.lifted()
    try:
        qh = ConvexHull(L)
    except QhullError as exc:
        raise DegenerateInput(str(exc)) from exc
    eq = qh.equations
    lower = eq[:, 2] < 0
    faces = np.sort(qh.simplices[lower], axis=1)
    n = eq[lower]
    a = -n[:, 3] / n[:, 2]
    b = -n[:, :2] / n[:, 2:3]
    vertices = np.unique(faces)
    return HullProcess(process, vertices, faces, a, b)


def hull_process(process: GrowthProcess) -> HullProcess:
    """Hull process ``Phi`` via the lower convex hull of lifted germs."""
    n = process.germs.shape[0]
    if n == 0:
        raise EmptyGerms("growth process has no germs")
    if process.d == 2:
        return _hull_1d(process)
    if n < 3:
        raise DegenerateInput("spatial-2 hull process needs at least 3 germs")
    return _hull_2d(process)


def extreme_points(process: GrowthProcess) -> np.ndarray:
    """Indices of extreme germs (those whose paraboloid reaches the boundary of Psi)."""
    if process.germs.shape[0] == 1:
        return np.array([0])
    return hull_process(process).vertices


# ----------------------------------------------------------------------------
# independent oracles


def envelope_1d(process: GrowthProcess) -> tuple:
    """Lower envelope of upward parabolas (Felzenszwalb-Huttenlocher sweep).

    Returns ``(indices, breaks)``: the germs occupying the envelope from left
    to right and the ``len(indices) - 1`` abscissae where consecutive ones cross.
    """
    v = process.germs[:, 0]
    h = process.heights
    order = np.lexsort((h, v))
    f = h + 0.5 * v * v
    idx: list = []
    z: list = []
    for q in order:
        if idx and v[idx[-1]] == v[q]:
            continue
        while idx:
            p = idx[-1]
            s = (f[q] - f[p]) / (v[q] - v[p])
            if z and s <= z[-1]:
                idx.pop()
                z.pop()
                continue
            break
        if idx:
            p = idx[-1]
            z.append((f[q] - f[p]) / (v[q] - v[p]))
        idx.append(int(q))
    return np.asarray(idx), np.asarray(z)


def power_cells_2d(process: GrowthProcess, box: float = 1e4) -> list:
    """Cells ``{w : c_x - <w, v_x> <= c_y - <w, v_y>}`` clipped to a large box."""
    L = process.lifted()
    V, c = L[:, :2], L[:, 2]
    cells = []
    for i in range(V.shape[0]):
        others = np.arange(V.shape[0]) != i
        A = V[others] - V[i]
        b = c[others] - c[i]
        cells.append(clip_halfplanes(box_polygon(box), A, b))
    return cells


def _cell_has_interior(A: np.ndarray, b: np.ndarray) -> bool:
    """Whether ``{w : A w <= b}`` contains a disc, by an LP on the inscribed radius."""
    if A.shape[0] == 0:
        return True
    norms = np.linalg.norm(A, axis=1)
    res = optimize.linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=np.column_stack((A, norms)),
        b_ub=b,
        bounds=[(None, None), (None, None), (None, 1.0)],
        method="highs",
    )
    return bool(res.status == 0 and -res.fun > 1e-12)


def extreme_points_oracle(process: GrowthProcess, cells: Optional[list] = None) -> np.ndarray:
    """Extreme germs by an independent route.

    Spatial dimension 1 uses the envelope sweep. Spatial dimension 2 asks
    whether each power cell has interior. A nonempty clipped cell settles it;
    otherwise an LP decides, since cells of high germs on the spatial hull
    can start arbitrarily far outside any clipping box.
    """
    if process.d == 2:
        return np.sort(envelope_1d(process)[0])
    cells = power_cells_2d(process) if cells is None else cells
    L = process.lifted()
    V, c = L[:, :2], L[:, 2]
    out = []
    for i in range(V.shape[0]):
        if polygon_area(cells[i]) > 0.0:
            out.append(i)
            continue
        others = np.arange(V.shape[0]) != i
        if _cell_has_interior(V[others] - V[i], c[others] - c[i]):
            out.append(i)
    return np.asarray(out, dtype=int)


def extreme_points_grid(process: GrowthProcess, grid) -> np.ndarray:
    """Germs attaining ``dPsi`` somewhere on a grid (a lower bound on the extreme set)."""
    grid = _as_grid(grid, process.d - 1)
    V, h = process.spatial, process.heights
    hits = set()
    step = max(1, CHUNK // max(1, V.shape[0]))
    for s in range(0, grid.shape[0], step):
        g = grid[s : s + step]
        vals = h[None, :] + 0.5 * ((g[:, None, :] - V[None, :, :]) ** 2).sum(-1)
        hits.update(np.argmin(vals, axis=1).tolist())
    return np.asarray(sorted(hits), dtype=int)


def _kinks(process: GrowthProcess, box: float = 1e4, cells: Optional[list] = None) -> np.ndarray:
    """Non-smooth points of ``dPsi`` from the independent envelope / power cells."""
    if process.d == 2:
        _, z = envelope_1d(process)
        return z.reshape(-1, 1)
    pts = []
    for P in power_cells_2d(process, box) if cells is None else cells:
        if P.shape[0]:
            inner = np.all(np.abs(P) < box * (1 - 1e-9), axis=1)
            pts.append(P[inner])
    if not pts:
        return np.zeros((0, 2))
    return np.concatenate(pts)


# ----------------------------------------------------------------------------
# duality


@dataclass
class DualityReport:
    extremes_equal: bool
    phi_above_psi: bool
    psi_reconstruction_error: float
    phi_reconstruction_error: float
    min_phi_minus_psi: float
    grid_size: int

    def passed(self, tol: float = 1e-12) -> bool:
        return (
            self.extremes_equal
            and self.phi_above_psi
            and self.psi_reconstruction_error <= tol
            and self.phi_reconstruction_error <= max(tol, 1e-9)
        )


def interior_grid(process: GrowthProcess, hp: HullProcess, n: int = 1000, margin: Optional[float] = None) -> np.ndarray:
    """Grid inside the span of the extreme germs shrunk by ``margin``."""
    V = process.germs[hp.vertices, :-1]
    if margin is None:
        margin = edge_margin(process)
    lo, hi = V.min(axis=0) + margin, V.max(axis=0) - margin
    if np.any(hi <= lo):
        lo, hi = V.min(axis=0), V.max(axis=0)
        mid, half = 0.5 * (lo + hi), 0.25 * (hi - lo)
        lo, hi = mid - half, mid + half
    if process.d == 2:
        return np.linspace(lo[0], hi[0], n)
    m = int(math.ceil(math.sqrt(n)))
    g1, g2 = np.meshgrid(np.linspace(lo[0], hi[0], m), np.linspace(lo[1], hi[1], m))
    return np.column_stack((g1.ravel(), g2.ravel()))


def duality_checks(process: GrowthProcess, grid=None, n_grid: int = 1000) -> DualityReport:
    """Cross-checks of the growth/hull duality on an interior grid.

    (a) ``dPsi`` from the vertices of ``Phi`` equals ``dPsi`` from all germs.
    (b) ``dPhi(v) = max_k dPsi(w_k) - |v - w_k|^2/2`` over the kinks ``w_k`` of
    ``dPsi`` (found independently of the lifted hull) equals the facet form.
    Local maxima alone do not suffice: a kink where two parabolas cross on a
    monotone stretch of ``dPsi`` can still carry a face.
    """
    hp = hull_process(process)
    cells = power_cells_2d(process) if process.d == 3 else None
    oracle = extreme_points_oracle(process, cells)
    ext_equal = bool(np.array_equal(np.sort(hp.vertices), np.sort(oracle)))
    if grid is None:
        grid = interior_grid(process, hp, n_grid)
    g = _as_grid(grid, process.d - 1)
    psi = psi_boundary(process, g)
    phi = hp.phi_boundary(g)
    psi_v = hp.psi_from_vertices(g)
    K = _kinks(process, cells=cells)
    if K.shape[0]:
        pk = psi_boundary(process, K)
        rec = np.full(g.shape[0], -np.inf)
        step = max(1, CHUNK // K.shape[0])
        for s in range(0, g.shape[0], step):
            gg = g[s : s + step]
            rec[s : s + step] = (pk[None, :] - 0.5 * ((gg[:, None, :] - K[None, :, :]) ** 2).sum(-1)).max(axis=1)
        fin = np.isfinite(phi)
        phi_err = float(np.max(np.abs(rec[fin] - phi[fin]))) if fin.any() else 0.0
    else:
        phi_err = 0.0 if process.germs.shape[0] == 1 else float("inf")
    # dPhi is finite only over the spatial hull of the germs
    gap = (phi - psi)[np.isfinite(phi)]
    return DualityReport(
        ext_equal,
        bool(np.all(gap >= -1e-12)),
        float(np.max(np.abs(psi_v - psi))) if g.shape[0] else 0.0,
        phi_err,
        float(gap.min()) if gap.size else 0.0,
        int(g.shape[0]),
    )


# ----------------------------------------------------------------------------
# faces, pairs and margins


def face_empirical_measure(hp: HullProcess, k: int) -> np.ndarray:
    """Tops (lowest closed-face point) of the k-faces of ``Phi`` as germ rows.

    A concave paraboloid piece attains its least height at a vertex, so the
    top is the lowest vertex of the face; ties go to the lexicographically
    smaller spatial coordinate.
    """
    G = hp.process.germs
    if k == 0:
        return G[hp.vertices]
    if k == hp.process.d - 1:
        faces = hp.faces
    elif hp.process.d == 3 and k == 1:
        e = np.concatenate([hp.faces[:, [0, 1]], hp.faces[:, [1, 2]], hp.faces[:, [0, 2]]])
        faces = np.unique(np.sort(e, axis=1), axis=0)
    else:
        raise ValueError("k out of range")
    tops = []
    for f in faces:
        rows = G[list(f)]
        key = np.lexsort(tuple(rows[:, j] for j in range(rows.shape[1] - 2, -1, -1)) + (rows[:, -1],))
        tops.append(rows[key[0]])
    return np.asarray(tops).reshape(-1, G.shape[1])


def edge_margin(process: GrowthProcess, quantile: float = 0.999, n_grid: int = 2000) -> float:
    """``2 sqrt(2 H_eff)`` with ``H_eff`` a high quantile of ``dPsi`` over the window."""
    V = process.spatial
    if V.shape[0] == 0:
        raise EmptyGerms("growth process has no germs")
    lo, hi = V.min(axis=0), V.max(axis=0)
    if process.d == 2:
        grid = np.linspace(lo[0], hi[0], n_grid)
    else:
        m = int(math.sqrt(n_grid))
        a, b = np.meshgrid(np.linspace(lo[0], hi[0], m), np.linspace(lo[1], hi[1], m))
        grid = np.column_stack((a.ravel(), b.ravel()))
    psi = psi_boundary(process, grid)
    return 2.0 * math.sqrt(2.0 * float(np.quantile(psi, quantile)))


def truncation_ok(process: GrowthProcess, hp: HullProcess, grid) -> bool:
    """Whether germs above the window height could not have touched ``dPsi`` on the grid."""
    if process.window is None:
        return True
    return bool(np.max(hp.psi_from_vertices(grid)) < process.window.H)


@dataclass
class PairSample:
    theta: np.ndarray
    h1: np.ndarray
    h2: np.ndarray


def typical_pairs(process: GrowthProcess, margin: float = 0.0, hp: Optional[HullProcess] = None) -> PairSample:
    """Consecutive extreme germs (spatial dimension 1) inside ``[lo + margin, hi - margin]``."""
    if process.d != 2:
        raise ValueError("typical_pairs needs spatial dimension 1")
    hp = hp or hull_process(process)
    G = process.germs[hp.sorted_vertices()]
    if process.window is not None:
        lo, hi = -process.window.L, process.window.L
    else:
        lo, hi = process.germs[:, 0].min(), process.germs[:, 0].max()
    a, b = G[:-1], G[1:]
    keep = (a[:, 0] >= lo + margin) & (b[:, 0] <= hi - margin)
    a, b = a[keep], b[keep]
    return PairSample(b[:, 0] - a[:, 0], a[:, 1], b[:, 1])


def parabola_cap_area(x, y) -> float:
    """Area between the v-axis and the downward unit parabola through ``x`` and ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x[0] == y[0]:
        raise DegenerateInput("germs share the spatial coordinate")
    _, H = downward_apex(x[0], x[1], y[0], y[1])
    return float(CAP_CONST * H ** 1.5)


def _incident_faces(hp: HullProcess, idx: int) -> set:
    G = hp.process.germs
    out = set()
    for f in hp.faces:
        if idx in f:
            out.add(tuple(sorted(tuple(G[j]) for j in f)))
    return out


def stabilization_radius(process: GrowthProcess, idx: int, radii=None) -> float:
    """Least grid radius ``r`` such that germs within ``|v - v_x| <= r`` reproduce the faces at ``x``.

    Returns ``inf`` when even the largest radius does not suffice.
    """
    hp = hull_process(process)
    if idx not in set(hp.vertices.tolist()):
        raise ValueError("germ is not extreme")
    target = _incident_faces(hp, idx)
    dist = np.linalg.norm(process.spatial - process.spatial[idx], axis=1)
    if radii is None:
        radii = np.unique(dist)
    radii = np.sort(np.asarray(radii, dtype=float))

    def ok(r):
        keep = dist <= r
        if np.count_nonzero(keep) < process.d:
            return False
        sub = GrowthProcess(process.germs[keep])
        try:
            shp = hull_process(sub)
        except DegenerateInput:
            return False
        j = int(np.flatnonzero(np.flatnonzero(keep) == idx)[0])
        if j not in set(shp.vertices.tolist()):
            return False
        return _incident_faces(shp, j) == target

    lo, hi = 0, radii.size - 1
    if not ok(radii[hi]):
        return float("inf")
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(radii[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(radii[lo])


# ----------------------------------------------------------------------------
# covariance-integral variance densities


@dataclass
class SigmaEstimate:
    value: float
    stderr: float
    cut: float
    covariance_lags: np.ndarray
    covariance: np.ndarray
    covariance_stderr: np.ndarray


def _autocov_fft(F: np.ndarray, max_lag: int) -> np.ndarray:
    """Unbiased-overlap autocovariance of a centered field for lags ``0..max_lag`` per axis."""
    shape = F.shape
    pad = [2 * s for s in shape]
    axes = list(range(F.ndim))
    spec = np.fft.rfftn(F, pad, axes)
    acf = np.fft.irfftn(spec * np.conj(spec), pad, axes)
    ones = np.fft.rfftn(np.ones(shape), pad, axes)
    cnt = np.fft.irfftn(ones * np.conj(ones), pad, axes)
    sl = tuple(slice(0, max_lag + 1) for _ in shape)
    if F.ndim == 1:
        return acf[sl] / np.round(cnt[sl])
    # keep both signs of the second lag for the 2-d integral
    idx0 = np.arange(0, max_lag + 1)
    idx1 = np.r_[np.arange(-max_lag, 0) % pad[1], idx0]
    return acf[np.ix_(idx0, idx1)] / np.round(cnt[np.ix_(idx0, idx1)])


def sigma_from_covariance(
    d: int,
    delta: float,
    kind: str,
    window: Window,
    grid_step: float,
    n_rep: int,
    rng,
    max_lag: Optional[float] = None,
    margin: Optional[float] = None,
) -> SigmaEstimate:
    """``int Cov(dX(0), dX(v)) dv`` for ``X = Psi`` (``kind='s'``) or ``Phi`` (``kind='r'``).

    The covariance function is estimated by spatial averaging inside each
    replicate, centred by the pooled mean; replicate-level integrals give the
    standard error. The integral is cut at the first lag where the mean
    covariance falls below twice its standard error.
    """
    if kind not in ("s", "r"):
        raise ValueError("kind must be 's' or 'r'")
    gen = as_generator(rng)
    L = window.L
    if margin is None:
        margin = min(6.0, 0.3 * L)
    if max_lag is None:
        max_lag = 0.25 * L
    if L - margin <= max_lag:
        raise WindowTooSmall("window too small for the requested lag range")
    m = int(round(2 * (L - margin) / grid_step)) + 1
    axis = np.linspace(-(L - margin), L - margin, m)
    if d == 2:
        grid = axis
    elif d == 3:
        a, b = np.meshgrid(axis, axis, indexing="ij")
        grid = np.column_stack((a.ravel(), b.ravel()))
    else:
        raise ValueError("d must be 2 or 3")
    fields = []
    for _ in range(n_rep):
        G = sample_halfspace_process(d, delta, window, gen)
        proc = GrowthProcess(G, window)
        hp = hull_process(proc)
        vals = hp.psi_from_vertices(grid) if kind == "s" else hp.phi_boundary(grid)
        if vals.max() >= window.H:
            raise WindowTooSmall("window height does not cover the boundary")
        fields.append(vals.reshape((m,) * (d - 1)))
    mean = float(np.mean([f.mean() for f in fields]))
    k = int(round(max_lag / grid_step))
    covs = np.array([_autocov_fft(f - mean, k) for f in fields])
    C = covs.mean(axis=0)
    Cse = covs.std(axis=0, ddof=1) / math.sqrt(n_rep)
    if d == 2:
        lags = np.arange(k + 1) * grid_step
        small = np.flatnonzero(np.abs(C) < 2 * Cse)
        if small.size == 0:
            raise WindowTooSmall("covariance has not decayed within the lag range")
        cut = int(small[0])
        w = np.full(cut + 1, 2.0 * grid_step)
        w[0] = grid_step
        w[-1] = grid_step if cut > 0 else w[-1]
        per_rep = covs[:, : cut + 1] @ w
        if cut == 0:
            per_rep = covs[:, 0] * grid_step
        return SigmaEstimate(float(per_rep.mean()), float(per_rep.std(ddof=1) / math.sqrt(n_rep)), cut * grid_step, lags, C, Cse)
    # d = 3: radial shells over the half-plane of lags, doubled by symmetry
    i0 = np.arange(0, k + 1)[:, None]
    i1 = np.r_[np.arange(-k, 0), np.arange(0, k + 1)][None, :]
    rad = np.hypot(i0, i1) * grid_step
    # lags (i0, i1) with i0 > 0, or i0 = 0 and i1 > 0, stand for their negatives too
    weight = np.where(i0 > 0, 2.0, np.where(i1 > 0, 2.0, np.where(i1 == 0, 1.0, 0.0)))
    shells = np.arange(k + 1) * grid_step
    shell_idx = np.minimum(np.round(rad / grid_step).astype(int), k + 1)
    radial = np.array([C[shell_idx == j].mean() if np.any(shell_idx == j) else 0.0 for j in range(k + 1)])
    radial_se = np.array([Cse[shell_idx == j].mean() if np.any(shell_idx == j) else 0.0 for j in range(k + 1)])
    small = np.flatnonzero(np.abs(radial) < 2 * radial_se)
    if small.size == 0:
        raise WindowTooSmall("covariance has not decayed within the lag range")
    cut_r = small[0] * grid_step
    mask = (rad <= cut_r) * weight
    per_rep = (covs * mask[None]).sum(axis=(1, 2)) * grid_step ** 2
    return SigmaEstimate(float(per_rep.mean()), float(per_rep.std(ddof=1) / math.sqrt(n_rep)), float(cut_r), shells, radial, radial_se)


# ----------------------------------------------------------------------------
# exact boundary values at the origin


def _box_growth(d: int, delta: float, gen, L0: float, H0: float, L1: float, H1: float) -> np.ndarray:
    """Germs of the region ``[-L1, L1]^(d-1) x [0, H1]`` minus ``[-L0, L0]^(d-1) x [0, H0]``."""
    parts = [sample_halfspace_box(d, delta, -L1, L1, H0, H1, gen)]
    if L1 > L0:
        if d == 2:
            parts.append(sample_halfspace_box(d, delta, -L1, -L0, 0.0, H0, gen))
            parts.append(sample_halfspace_box(d, delta, L0, L1, 0.0, H0, gen))
        else:
            parts.append(sample_halfspace_box(d, delta, [-L1, -L1], [-L0, L1], 0.0, H0, gen))
            parts.append(sample_halfspace_box(d, delta, [L0, -L1], [L1, L1], 0.0, H0, gen))
            parts.append(sample_halfspace_box(d, delta, [-L0, -L1], [L0, -L0], 0.0, H0, gen))
            parts.append(sample_halfspace_box(d, delta, [-L0, L0], [L0, L1], 0.0, H0, gen))
    return np.concatenate(parts)


def _phi_at_zero_confirmed(hp: HullProcess, L: float, H: float) -> Optional[float]:
    """``dPhi(0)`` if the germ-free cap under the face over 0 lies inside the box, else ``None``."""
    G = hp.process.germs
    if hp.faces.shape[0] == 0:
        return None
    f = int(np.argmax(hp.plane_a))
    if hp.process.d == 2:
        a, b = G[hp.faces[f, 0]], G[hp.faces[f, 1]]
        if not (a[0] <= 0.0 <= b[0]):
            return None
    else:
        T = G[hp.faces[f], :2]
        M = np.column_stack((T[1] - T[0], T[2] - T[0]))
        lam = np.linalg.solve(M, -T[0])
        if lam.min() < 0 or lam.sum() > 1:
            return None
    apex_v = hp.plane_b[f]
    apex_h = hp.plane_a[f] + 0.5 * float(apex_v @ apex_v)
    reach = math.sqrt(2.0 * max(apex_h, 0.0))
    if apex_h > H or np.any(np.abs(apex_v) + reach > L):
        return None
    return float(hp.plane_a[f])


def local_boundary_at_zero(d: int, delta: float, rng, L0: float = 4.0, H0: float = 4.0, max_growth: int = 20) -> tuple:
    """Exact ``(dPsi(0), dPhi(0), n_growth)`` from a box grown until both values are confirmed.

    ``dPsi(0)`` is confirmed once the upward paraboloid below it fits in the
    box; ``dPhi(0)`` once the germ-free downward cap of the face above 0
    does. Growth adds only the new part of the box, so the law is exact.
    """
    gen = as_generator(rng)
    L, H = L0, H0
    G = sample_halfspace_box(d, delta, -L, L, 0.0, H, gen)
    for k in range(max_growth + 1):
        if G.shape[0] >= d:
            proc = GrowthProcess(G)
            try:
                hp = hull_process(proc)
            except DegenerateInput:
                hp = None
            if hp is not None:
                origin = np.zeros((1, d - 1))
                psi0 = float(hp.psi_from_vertices(origin)[0])
                phi0 = _phi_at_zero_confirmed(hp, L, H)
                if psi0 <= H and math.sqrt(2.0 * psi0) <= L and phi0 is not None:
                    return psi0, phi0, k
        G = np.concatenate([G, _box_growth(d, delta, gen, L, H, 2 * L, 2 * H)])
        L, H = 2 * L, 2 * H
    raise WindowTooSmall("boundary at the origin not confirmed after repeated growth")
