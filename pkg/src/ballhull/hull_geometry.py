"""Convex hulls of ball samples and their finite-intensity functionals.

Planar hulls use Andrew's monotone chain behind an Akl-Toussaint interior
filter. Spatial hulls are delegated to Qhull (``scipy.spatial.ConvexHull``);
coplanar output triangles are merged into polygonal facets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .core_model import ball_volume
from .errors import DegenerateInput, OriginOutside
from .quadrature import integrate_pieces
from .samplers import as_generator

ORIENT_EPS = 1e-12
TWO_PI = 2.0 * math.pi


@dataclass
class Polytope:
    """Convex polytope with faces by dimension.

    ``vertices`` holds coordinates (counter-clockwise for d = 2). ``faces[k]``
    lists k-faces as tuples of vertex indices; facets of a 3-polytope are
    counter-clockwise cycles seen from outside. ``normals``/``offsets``
    describe the facet half-spaces ``<n, y> <= offset``.
    """

    d: int
    vertices: np.ndarray
    faces: dict
    normals: np.ndarray
    offsets: np.ndarray
    contains_origin: bool
    source_index: np.ndarray
    triangles: Optional[np.ndarray] = None
    _angles: Optional[dict] = field(default=None, repr=False)

    @property
    def f_vector(self) -> tuple:
        return tuple(len(self.faces[k]) for k in range(self.d))

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "vertices": self.vertices.tolist(),
            "faces": {str(k): [list(f) for f in v] for k, v in self.faces.items()},
            "contains_origin": bool(self.contains_origin),
        }


@dataclass
class FaceDecoration:
    face: tuple
    top: np.ndarray
    external_angle: float
    volume: float


@dataclass
class VertexScores:
    """Per-vertex scores aligned with ``hull.vertices``."""

    xi_s: np.ndarray
    xi_r: np.ndarray
    xi_f: dict

    def totals(self) -> dict:
        out = {"W": float(np.sum(self.xi_s)), "V": float(np.sum(self.xi_r))}
        for k, v in self.xi_f.items():
            out[f"f{k}"] = int(np.sum(v))
        return out


# ----------------------------------------------------------------------------
# construction


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _turns_left(o, a, b) -> bool:
    c = _cross(o, a, b)
    scale = math.hypot(a[0] - o[0], a[1] - o[1]) * math.hypot(b[0] - o[0], b[1] - o[1])
    return c > ORIENT_EPS * scale


def _interior_filter(P: np.ndarray, n_dirs: int = 16) -> np.ndarray:
    """Indices of points not strictly inside the polygon of directional extremes."""
    if P.shape[0] < 64:
        return np.arange(P.shape[0])
    t = np.arange(n_dirs) * (TWO_PI / n_dirs)
    U = np.column_stack((np.cos(t), np.sin(t)))
    ext = np.unique(np.argmax(P @ U.T, axis=0))
    Q = P[ext]
    c = Q.mean(axis=0)
    Q = Q[np.argsort(np.arctan2(Q[:, 1] - c[1], Q[:, 0] - c[0]))]
    if Q.shape[0] < 3:
        return np.arange(P.shape[0])
    inside = np.ones(P.shape[0], dtype=bool)
    for a, b in zip(Q, np.roll(Q, -1, axis=0)):
        e = b - a
        cr = e[0] * (P[:, 1] - a[1]) - e[1] * (P[:, 0] - a[0])
        inside &= cr > 1e-9 * float(np.hypot(*e))
    return np.flatnonzero(~inside)


def _monotone_chain(P: np.ndarray, idx: np.ndarray) -> list:
    order = idx[np.lexsort((P[idx, 1], P[idx, 0]))]
    pts = [(float(P[i, 0]), float(P[i, 1]), int(i)) for i in order]
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and not _turns_left(lower[-2], lower[-1], p):
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and not _turns_left(upper[-2], upper[-1], p):
            upper.pop()
        upper.append(p)
    return [p[2] for p in lower[:-1] + upper[:-1]]


def _polytope_2d(points: np.ndarray) -> Polytope:
    idx = _interior_filter(points)
    hull_idx = _monotone_chain(points, idx)
    if len(hull_idx) < 3:
        raise DegenerateInput("points are collinear")
    V = points[hull_idx]
    n = V.shape[0]
    E = np.roll(V, -1, axis=0) - V
    normals = np.column_stack((E[:, 1], -E[:, 0]))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = np.einsum("ij,ij->i", normals, V)
    faces = {0: [(i,) for i in range(n)], 1: [(i, (i + 1) % n) for i in range(n)]}
    return Polytope(2, V, faces, normals, offsets, bool(np.all(offsets > 0)), np.asarray(hull_idx))


def _merge_coplanar(tri: np.ndarray, eq: np.ndarray) -> list:
    """Group adjacent triangles lying in a common plane."""
    m = tri.shape[0]
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    edge_owner = {}
    for t in range(m):
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = tuple(sorted((tri[t, a], tri[t, b])))
            edge_owner.setdefault(key, []).append(t)
    for owners in edge_owner.values():
        if len(owners) == 2:
            s, t = owners
            if np.dot(eq[s, :3], eq[t, :3]) > 1 - 1e-12 and abs(eq[s, 3] - eq[t, 3]) < 1e-12:
                parent[find(s)] = find(t)
    groups: dict = {}
    for t in range(m):
        groups.setdefault(find(t), []).append(t)
    return list(groups.values())


def _boundary_cycle(tri_group: np.ndarray) -> list:
    """Counter-clockwise boundary cycle of a planar patch of oriented triangles."""
    directed = set()
    for a, b, c in tri_group:
        for e in ((a, b), (b, c), (c, a)):
            directed.add(e)
    boundary = {a: b for (a, b) in directed if (b, a) not in directed}
    start = next(iter(boundary))
    cycle = [start]
    nxt = boundary[start]
    while nxt != start:
        cycle.append(nxt)
        nxt = boundary[nxt]
    return cycle


def _polytope_3d(points: np.ndarray) -> Polytope:
    try:
        qh = ConvexHull(points)
    except QhullError as exc:
        raise DegenerateInput(str(exc)) from exc
    used = np.unique(qh.simplices)
    remap = -np.ones(points.shape[0], dtype=int)
    remap[used] = np.arange(used.size)
    V = points[used]
    tri = remap[qh.simplices]
    eq = qh.equations
    # orient each triangle counter-clockwise seen from outside
    nrm = np.cross(V[tri[:, 1]] - V[tri[:, 0]], V[tri[:, 2]] - V[tri[:, 0]])
    flip = np.einsum("ij,ij->i", nrm, eq[:, :3]) < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]
    groups = _merge_coplanar(tri, eq)
    facets, normals, offsets = [], [], []
    for g in groups:
        facets.append(tuple(_boundary_cycle(tri[g])))
        normals.append(eq[g[0], :3])
        offsets.append(-eq[g[0], 3])
    edges = set()
    for f in facets:
        for a, b in zip(f, f[1:] + f[:1]):
            edges.add((min(a, b), max(a, b)))
    faces = {0: [(i,) for i in range(V.shape[0])], 1: sorted(edges), 2: facets}
    normals = np.asarray(normals)
    offsets = np.asarray(offsets)
    return Polytope(3, V, faces, normals, offsets, bool(np.all(offsets > 0)), used, triangles=tri)


def convex_hull(points, d: Optional[int] = None) -> Polytope:
    """Convex hull of a point array of shape ``(n, d)`` with d in {2, 3}."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 2:
        raise ValueError("points must be a 2-d array")
    d = P.shape[1] if d is None else d
    if d != P.shape[1]:
        raise ValueError("dimension mismatch")
    if d not in (2, 3):
        raise ValueError("hulls support d in {2, 3}")
    if P.shape[0] < d + 1:
        raise DegenerateInput(f"need at least {d + 1} points, got {P.shape[0]}")
    return _polytope_2d(P) if d == 2 else _polytope_3d(P)


# ----------------------------------------------------------------------------
# support and radius functions


def _directions(u, d):
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        if d != 2:
            raise ValueError("angle input only for d = 2")
        u = np.array([math.cos(u), math.sin(u)])
    return u


def angle_directions(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.stack((np.cos(theta), np.sin(theta)), axis=-1)


def defect_support(hull: Polytope, u):
    """``1 - max_x <x, u>`` over hull vertices; ``u`` of shape ``(d,)`` or ``(m, d)``."""
    u = _directions(u, hull.d)
    out = 1.0 - np.max(u @ hull.vertices.T, axis=-1)
    return out if np.ndim(out) else float(out)


def _require_origin(hull: Polytope) -> None:
    if not hull.contains_origin:
        raise OriginOutside("the origin is not inside the hull")


def radial_extent(hull: Polytope, u):
    """``sup{rho : rho u in hull}``, the minimum over facets facing ``u``."""
    _require_origin(hull)
    u = _directions(u, hull.d)
    dots = u @ hull.normals.T
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dots > 0, hull.offsets / np.where(dots > 0, dots, 1.0), np.inf)
    out = np.min(ratio, axis=-1)
    return out if np.ndim(out) else float(out)


def defect_radius(hull: Polytope, u):
    """``1 - sup{rho : rho u in hull}``; raises :class:`OriginOutside`."""
    out = 1.0 - np.asarray(radial_extent(hull, u))
    return out if out.ndim else float(out)


def flower_support_identity_check(points, u, tol: float = 1e-12) -> bool:
    """Compare the Voronoi flower's radius-vector with the hull support function.

    The ball ``B(x/2, |x|/2)`` reaches distance ``|x| cos(angle(u, x))`` along
    ``u`` when the angle is acute; the flower is the union over sample points.
    The other side is the support function of ``conv(K, 0)`` from the hull
    vertices (raw points when fewer than ``d + 1`` are given).
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    U = np.atleast_2d(np.asarray(u, dtype=float))
    norms = np.linalg.norm(P, axis=1)
    cosang = (U @ P.T) / np.where(norms > 0, norms, 1.0)
    flower = np.max(np.maximum(norms * cosang, 0.0), axis=1)
    V = P
    if P.shape[0] > P.shape[1]:
        try:
            V = convex_hull(P).vertices
        except DegenerateInput:
            V = P
    support = np.maximum(np.max(U @ V.T, axis=1), 0.0)
    return bool(np.all(np.abs(flower - support) <= tol))


# ----------------------------------------------------------------------------
# faces, angles and intrinsic volumes


def _top_index(hull: Polytope, face: tuple) -> int:
    norms = np.linalg.norm(hull.vertices[list(face)], axis=1)
    best = np.flatnonzero(norms == norms.max())
    if best.size > 1:
        cands = [face[i] for i in best]
        return min(cands, key=lambda j: tuple(hull.vertices[j]))
    return face[int(best[0])]


def face_tops(hull: Polytope, k: int) -> list:
    """Pairs ``(face, Top(face))``; the top is the face vertex of largest norm."""
    if k not in hull.faces:
        raise ValueError(f"k must lie in 0..{hull.d - 1}")
    return [(f, hull.vertices[_top_index(hull, f)]) for f in hull.faces[k]]


def _polygon_area_3d(P: np.ndarray) -> float:
    s = np.zeros(3)
    for a, b in zip(P, np.roll(P, -1, axis=0)):
        s += np.cross(a, b)
    return 0.5 * float(np.linalg.norm(s))


def _spherical_polygon_area(N: np.ndarray) -> float:
    """Area of a spherical polygon with vertices ``N`` in cyclic order (fan of triangles)."""
    total = 0.0
    a = N[0]
    for b, c in zip(N[1:-1], N[2:]):
        num = abs(float(np.dot(a, np.cross(b, c))))
        den = 1.0 + float(np.dot(a, b) + np.dot(b, c) + np.dot(c, a))
        total += 2.0 * math.atan2(num, den)
    return total


def _vertex_facet_cycles(hull: Polytope) -> list:
    """For each vertex, the incident facets in cyclic order."""
    succ = [dict() for _ in range(hull.vertices.shape[0])]
    for fi, f in enumerate(hull.faces[2]):
        m = len(f)
        for j, v in enumerate(f):
            # facet fi enters v along (prev, v) and leaves along (v, next)
            succ[v][f[j - 1]] = (f[(j + 1) % m], fi)
    cycles = []
    for v, table in enumerate(succ):
        start = next(iter(table))
        order = []
        key = start
        for _ in range(len(table)):
            nxt, fi = table[key]
            order.append(fi)
            key = nxt
        cycles.append(order)
    return cycles


def _compute_angles(hull: Polytope) -> dict:
    out: dict = {}
    V = hull.vertices
    if hull.d == 2:
        phi = np.arctan2(hull.normals[:, 1], hull.normals[:, 0])
        n = V.shape[0]
        turn = np.mod(phi - np.roll(phi, 1), TWO_PI)
        out[0] = [FaceDecoration((i,), V[i], float(turn[i] / TWO_PI), 1.0) for i in range(n)]
        lengths = np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1)
        out[1] = [
            FaceDecoration(f, V[_top_index(hull, f)], 0.5, float(lengths[i])) for i, f in enumerate(hull.faces[1])
        ]
        return out
    cycles = _vertex_facet_cycles(hull)
    out[0] = [
        FaceDecoration((i,), V[i], _spherical_polygon_area(hull.normals[c]) / (4.0 * math.pi), 1.0)
        for i, c in enumerate(cycles)
    ]
    edge_facets: dict = {}
    for fi, f in enumerate(hull.faces[2]):
        for a, b in zip(f, f[1:] + f[:1]):
            edge_facets.setdefault((min(a, b), max(a, b)), []).append(fi)
    decos = []
    for e in hull.faces[1]:
        f1, f2 = edge_facets[e]
        cosang = float(np.clip(np.dot(hull.normals[f1], hull.normals[f2]), -1.0, 1.0))
        decos.append(FaceDecoration(e, V[_top_index(hull, e)], math.acos(cosang) / TWO_PI, float(np.linalg.norm(V[e[0]] - V[e[1]]))))
    out[1] = decos
    out[2] = [FaceDecoration(f, V[_top_index(hull, f)], 0.5, _polygon_area_3d(V[list(f)])) for f in hull.faces[2]]
    return out


def external_angles(hull: Polytope) -> dict:
    """Face decorations (top, external angle, k-volume) for every k."""
    if hull._angles is None:
        hull._angles = _compute_angles(hull)
    return hull._angles


def intrinsic_volume(hull: Polytope, k: int) -> float:
    """``V_k = sum_f gamma(K, f) vol_k(f)`` over k-faces."""
    if not 0 <= k < hull.d:
        raise ValueError(f"k must lie in 0..{hull.d - 1}")
    decos = external_angles(hull)[k]
    return float(sum(dd.external_angle * dd.volume for dd in decos))


def _line_directions(n: int, gen) -> np.ndarray:
    if n >= 64:
        t = (np.arange(n) + gen.random()) * (math.pi / n)
    else:
        t = gen.uniform(0.0, math.pi, n)
    return t


def kubota_V1(hull, n_directions: int, rng) -> tuple:
    """First intrinsic volume from projection lengths onto random lines (d = 2).

    ``V_1 = (pi / 2) E[length of the projection onto a uniform line]``.
    Accepts a :class:`Polytope` or a raw point array (segments and single
    points included). Returns ``(estimate, stderr)``; the stderr is zero
    for the randomly rotated grid used when ``n_directions >= 64``.
    """
    pts = hull.vertices if isinstance(hull, Polytope) else np.atleast_2d(np.asarray(hull, dtype=float))
    if pts.shape[1] != 2:
        raise ValueError("kubota_V1 supports d = 2")
    gen = as_generator(rng)
    t = _line_directions(n_directions, gen)
    U = angle_directions(t)
    proj = pts @ U.T
    lengths = proj.max(axis=0) - proj.min(axis=0)
    scale = 2.0 * ball_volume(2) / (ball_volume(1) * ball_volume(1))
    est = scale * float(lengths.mean())
    if n_directions >= 64:
        return est, 0.0
    return est, scale * float(lengths.std(ddof=1) / math.sqrt(n_directions))


def projection_avoidance(hull: Polytope, x, k: int = 1, n_directions: int = 1, rng=None) -> float:
    """Indicator that ``x`` projects outside the hull's projection on ``lin[x]``.

    For d = 2 and k = 1 the only line through ``x`` and the origin is
    ``lin[x]`` itself, so the average over lines collapses to one indicator.
    """
    if hull.d != 2 or k != 1:
        raise ValueError("projection_avoidance supports d = 2, k = 1")
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        return 0.0
    proj = hull.vertices @ (x / r)
    return 1.0 if (r > proj.max() or r < proj.min()) else 0.0


def kubota_defect_mc(hull: Polytope, n_mc: int, rng) -> tuple:
    """``pi - V_1(hull)`` as ``(1/2) int_{B \\ K} |x|^{-1} theta(x) dx`` by Monte Carlo."""
    gen = as_generator(rng)
    r = np.sqrt(gen.random(n_mc))
    t = gen.uniform(0.0, TWO_PI, n_mc)
    X = r[:, None] * angle_directions(t)
    proj = X @ hull.vertices.T
    # x projects outside iff |x| exceeds the support in its own direction
    outside = r * r > proj.max(axis=1)
    vals = math.pi * np.where(outside, 1.0 / r, 0.0) * 0.5
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_mc))


# ----------------------------------------------------------------------------
# integrated processes (d = 2)


def _vertex_cones(hull: Polytope):
    """Unwrapped normal-cone arcs ``[lo_i, hi_i]`` of each vertex (d = 2)."""
    phi = np.unwrap(np.arctan2(hull.normals[:, 1], hull.normals[:, 0]))
    # vertex i lies between edges i-1 and i
    lo = np.roll(phi, 1)
    lo[0] = phi[-1] - TWO_PI
    hi = phi
    return lo, hi


def _support_integral(hull: Polytope, a: float, b: float) -> float:
    """``int_a^b s(theta) d theta`` by closed-form pieces over the vertex cones."""
    if b <= a:
        return 0.0
    lo, hi = _vertex_cones(hull)
    rad = np.linalg.norm(hull.vertices, axis=1)
    ang = np.arctan2(hull.vertices[:, 1], hull.vertices[:, 0])
    total = 0.0
    k0 = math.floor((a - hi.max()) / TWO_PI)
    k1 = math.ceil((b - lo.min()) / TWO_PI)
    for k in range(k0, k1 + 1):
        s = np.maximum(lo + k * TWO_PI, a)
        e = np.minimum(hi + k * TWO_PI, b)
        m = e > s
        if not m.any():
            continue
        # antiderivative of 1 - |x| cos(theta - theta_x)
        total += float(np.sum((e - s)[m] - rad[m] * (np.sin(e[m] - ang[m]) - np.sin(s[m] - ang[m]))))
    return total


def _arc(v) -> tuple:
    v = float(v)
    if abs(v) > TWO_PI + 1e-12:
        raise ValueError("arc parameter must lie in [-2pi, 2pi]")
    return (min(0.0, v), max(0.0, v))


def W_process(hull: Polytope, v) -> float:
    """``W(v) = int_{[0, v]} s(theta) d theta`` (d = 2), exact."""
    a, b = _arc(v)
    return _support_integral(hull, a, b)


def V_process(hull: Polytope, v, abs_tol: float = 1e-10, max_depth: int = 40) -> float:
    """``V(v) = int_{[0, v]} r(theta) d theta`` (d = 2) by adaptive Simpson."""
    _require_origin(hull)
    a, b = _arc(v)
    if b <= a:
        return 0.0
    ang = np.arctan2(hull.vertices[:, 1], hull.vertices[:, 0])
    cuts = []
    for k in (-1, 0, 1):
        cuts.extend(ang + k * TWO_PI)
    cuts = np.asarray(cuts)
    bp = np.concatenate(([a], np.sort(cuts[(cuts > a) & (cuts < b)]), [b]))
    f = lambda t: defect_radius(hull, angle_directions(t))  # noqa: E731
    value, _ = integrate_pieces(f, bp, abs_tol, max_depth)
    return value


def width_volume_processes(hull: Polytope, v, abs_tol: float = 1e-10) -> tuple:
    """``(W(v), V(v))``; pass ``v = 2 pi`` for the totals (d = 2)."""
    if hull.d != 2:
        raise ValueError("width_volume_processes is exact for d = 2 only; use W_total_3d")
    return W_process(hull, v), V_process(hull, v, abs_tol)


def W_total_3d(hull: Polytope, n_theta: int = 200, n_phi: int = 400) -> float:
    """``int_{S^2} s d sigma`` by a product Gauss-Legendre rule (d = 3)."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    ct = x
    st = np.sqrt(1 - ct * ct)
    phi = (np.arange(n_phi) + 0.5) * TWO_PI / n_phi
    U = np.stack(
        (st[:, None] * np.cos(phi)[None, :], st[:, None] * np.sin(phi)[None, :], np.broadcast_to(ct[:, None], (n_theta, n_phi))),
        axis=-1,
    ).reshape(-1, 3)
    s = defect_support(hull, U).reshape(n_theta, n_phi)
    return float((w[:, None] * s).sum() * TWO_PI / n_phi)


def sup_defect_support(hull: Polytope) -> float:
    """``S = sup_u s(u)``: one minus the least facet distance from the origin."""
    _require_origin(hull)
    return float(1.0 - hull.offsets.min())


def _log_sec_tan(x):
    """Antiderivative of ``sec``: ``log(sec x + tan x) = 2 artanh(tan(x/2))``."""
    return 2.0 * np.arctanh(np.tan(0.5 * x))


def vertex_scores(hull: Polytope) -> VertexScores:
    """Per-vertex scores for d = 2.

    Each edge owns the angular sector spanned by its endpoints and hands it to
    its top vertex. ``xi_s`` and ``xi_r`` integrate the defect support and
    defect radius over the sectors a vertex owns, i.e. they are volumes of
    the flower and hull complements inside the cones taken with respect to the
    radial measure ``|y|^{1-d} dy``; the totals are then ``W`` and ``V``.
    """
    if hull.d != 2:
        raise ValueError("vertex_scores supports d = 2")
    _require_origin(hull)
    V = hull.vertices
    n = V.shape[0]
    ang = np.arctan2(V[:, 1], V[:, 0])
    phi = np.arctan2(hull.normals[:, 1], hull.normals[:, 0])
    xi_s = np.zeros(n)
    xi_r = np.zeros(n)
    xi_f = {0: np.ones(n, dtype=int), 1: np.zeros(n, dtype=int)}
    for e, (i, j) in enumerate(hull.faces[1]):
        a = ang[i]
        b = a + np.mod(ang[j] - ang[i], TWO_PI)
        top = _top_index(hull, (i, j))
        xi_f[1][top] += 1
        xi_s[top] += _support_integral(hull, a, b)
        rel_a = np.mod(a - phi[e] + math.pi, TWO_PI) - math.pi
        rel_b = rel_a + (b - a)
        xi_r[top] += (b - a) - hull.offsets[e] * float(_log_sec_tan(rel_b) - _log_sec_tan(rel_a))
    return VertexScores(xi_s, xi_r, xi_f)


# ----------------------------------------------------------------------------
# Steiner formula


def _segment_distance(X, A, B):
    AB = B - A
    t = np.clip(((X[:, None, :] - A[None]) * AB[None]).sum(-1) / (AB * AB).sum(-1)[None], 0.0, 1.0)
    C = A[None] + t[..., None] * AB[None]
    return np.linalg.norm(X[:, None, :] - C, axis=-1).min(axis=1)


def _triangle_distance(X, A, B, C):
    """Vectorized point-to-triangle distance (closest-point regions)."""
    out = np.full(X.shape[0], np.inf)
    for a, b, c in zip(A, B, C):
        ab, ac = b - a, c - a
        ap = X - a
        d1, d2 = ap @ ab, ap @ ac
        bp = X - b
        d3, d4 = bp @ ab, bp @ ac
        cp = X - c
        d5, d6 = cp @ ab, cp @ ac
        va = d3 * d6 - d5 * d4
        vb = d5 * d2 - d1 * d6
        vc = d1 * d4 - d3 * d2
        den = va + vb + vc
        with np.errstate(divide="ignore", invalid="ignore"):
            v = vb / den
            w = vc / den
            closest = a + v[:, None] * ab + w[:, None] * ac
            # edge and vertex regions
            t_ab = np.clip(d1 / (d1 - d3), 0, 1)
            t_ac = np.clip(d2 / (d2 - d6), 0, 1)
            t_bc = np.clip((d4 - d3) / ((d4 - d3) + (d5 - d6)), 0, 1)
        on_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
        on_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
        on_bc = (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0)
        closest = np.where(on_bc[:, None], b + t_bc[:, None] * (c - b), closest)
        closest = np.where(on_ac[:, None], a + t_ac[:, None] * ac, closest)
        closest = np.where(on_ab[:, None], a + t_ab[:, None] * ab, closest)
        closest = np.where(((d6 >= 0) & (d5 <= d6))[:, None], c, closest)
        closest = np.where(((d3 >= 0) & (d4 <= d3))[:, None], b, closest)
        closest = np.where(((d1 <= 0) & (d2 <= 0))[:, None], a, closest)
        out = np.minimum(out, np.linalg.norm(X - closest, axis=1))
    return out


def distance_to_hull(hull: Polytope, X: np.ndarray) -> np.ndarray:
    """Euclidean distance from each row of ``X`` to the polytope (0 inside)."""
    X = np.atleast_2d(X)
    plane = X @ hull.normals.T - hull.offsets
    out = np.zeros(X.shape[0])
    outside = plane.max(axis=1) > 0
    if not outside.any():
        return out
    Y = X[outside]
    V = hull.vertices
    if hull.d == 2:
        out[outside] = _segment_distance(Y, V, np.roll(V, -1, axis=0))
    else:
        T = hull.triangles
        out[outside] = _triangle_distance(Y, V[T[:, 0]], V[T[:, 1]], V[T[:, 2]])
    return out


def steiner_polynomial(hull: Polytope, eps: float) -> float:
    d = hull.d
    return float(sum(eps ** (d - k) * ball_volume(d - k) * intrinsic_volume(hull, k) for k in range(d)))


def steiner_check(hull: Polytope, eps: float, n_mc: int, rng, chunk: int = 200_000) -> tuple:
    """Monte Carlo volume of the outer collar of width ``eps`` and the Steiner polynomial.

    Returns ``(mc_volume, mc_stderr, polynomial_value)``.
    """
    if eps == 0:
        return 0.0, 0.0, 0.0
    gen = as_generator(rng)
    lo = hull.vertices.min(axis=0) - eps
    hi = hull.vertices.max(axis=0) + eps
    box = float(np.prod(hi - lo))
    hits = 0
    done = 0
    while done < n_mc:
        m = min(chunk, n_mc - done)
        X = lo + (hi - lo) * gen.random((m, hull.d))
        plane = (X @ hull.normals.T - hull.offsets).max(axis=1)
        cand = (plane > 0) & (plane <= eps)
        if cand.any():
            dist = distance_to_hull(hull, X[cand])
            hits += int(np.count_nonzero(dist <= eps))
        done += m
    p = hits / n_mc
    return box * p, box * math.sqrt(p * (1 - p) / n_mc), steiner_polynomial(hull, eps)
