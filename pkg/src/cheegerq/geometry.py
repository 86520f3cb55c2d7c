"""Planar convex-geometry primitives.

Polygons are stored as counterclockwise ``(n, 2)`` float arrays wrapped in an
immutable :class:`ConvexPolygon`. The hot paths used by the optimizer work on
raw arrays (the ``*_array`` helpers) and skip validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linprog

from .errors import DegenerateShapeError, PreconditionError, RefineNError

EPS_CONVEX = 1e-12
EPS_LP = 1e-9
BISECTION_TOL = 1e-10
QUAD_ORDER = 16


class Point(NamedTuple):
    x: float
    y: float


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise PreconditionError(f"expected an (n, 2) array of points, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError("points must have finite coordinates")
    return arr


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def signed_area_array(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def perimeter_array(pts: np.ndarray) -> float:
    d = np.roll(pts, -1, axis=0) - pts
    return float(np.sum(np.hypot(d[:, 0], d[:, 1])))


def hull_array(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns CCW hull vertices with collinear points dropped.

    May return fewer than 3 vertices for degenerate input.
    """
    pts = sorted(set(map(tuple, np.asarray(points, dtype=float).tolist())))
    if len(pts) < 3:
        return np.array(pts, dtype=float).reshape(-1, 2)

    def keep_left(chain, p):
        while len(chain) >= 2:
            o, a = chain[-2], chain[-1]
            cr = _cross(o, a, p)
            scale = math.hypot(a[0] - o[0], a[1] - o[1]) * math.hypot(p[0] - o[0], p[1] - o[1])
            tol = EPS_CONVEX * scale
            if cr < -tol:
                chain.pop()
            elif cr <= tol and (cr <= 0 or (a[0] - o[0]) * (p[0] - a[0]) + (a[1] - o[1]) * (p[1] - a[1]) >= 0):
                # nearly collinear: drop ``a`` when it sits between ``o`` and ``p``;
                # on a reversal the exact sign decides
                chain.pop()
            else:
                break
        chain.append(p)

    lower: list = []
    for p in pts:
        keep_left(lower, p)
    upper: list = []
    for p in reversed(pts):
        keep_left(upper, p)
    return np.array(lower[:-1] + upper[:-1], dtype=float).reshape(-1, 2)


def halfplanes_array(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit outward normals ``A`` and offsets ``b`` with the polygon equal to ``{A x <= b}``."""
    d = np.roll(pts, -1, axis=0) - pts
    lengths = np.hypot(d[:, 0], d[:, 1])
    keep = lengths > 0
    normals = np.column_stack([d[keep, 1], -d[keep, 0]]) / lengths[keep, None]
    b = np.einsum("ij,ij->i", normals, pts[keep])
    return normals, b


def clip_halfplane_array(pts: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Sutherland-Hodgman step: keep the part of a convex polygon with ``a . x <= b``."""
    if len(pts) == 0:
        return pts
    s = pts @ a - b
    if np.all(s <= 0):
        return pts
    if np.all(s > 0):
        return pts[:0]
    keep = s <= 0
    nxt = np.roll(pts, -1, axis=0)
    s_next = np.roll(s, -1)
    crossing = keep != (s_next <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(crossing, s / (s - s_next), 0.0)
    cut = pts + lam[:, None] * (nxt - pts)
    both = np.stack([pts, cut], axis=1).reshape(-1, 2)
    mask = np.stack([keep, crossing], axis=1).ravel()
    return both[mask]


def halfplane_intersection_array(pts: np.ndarray, A: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = pts
    for k in range(len(b)):
        out = clip_halfplane_array(out, A[k], b[k])
        if len(out) == 0:
            break
    return out


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """A bounded convex polygon with counterclockwise vertices.

    Construction validates the vertex list as given. Use :func:`convex_hull`
    (or :meth:`from_points`) to normalize arbitrary point sets.
    """

    vertices: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _as_points(self.vertices).copy()
        if len(v) < 3:
            raise DegenerateShapeError(f"a polygon needs at least 3 vertices, got {len(v)}")
        scale = float(np.max(np.ptp(v, axis=0)))
        if scale == 0.0 or signed_area_array(v) <= EPS_CONVEX * scale * scale:
            raise DegenerateShapeError("polygon has zero or negative signed area")
        n = len(v)
        for i in range(n):
            o, a, c = v[i - 1], v[i], v[(i + 1) % n]
            tol = EPS_CONVEX * np.linalg.norm(a - o) * np.linalg.norm(c - a) + EPS_CONVEX * scale * scale
            if _cross(o, a, c) < -tol:
                raise PreconditionError(f"polygon is not convex at vertex {i}")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def from_points(cls, points) -> "ConvexPolygon":
        return convex_hull(points)

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"ConvexPolygon(n={len(self)}, area={area(self):.6g})"

    def halfplanes(self) -> tuple[np.ndarray, np.ndarray]:
        return halfplanes_array(self.vertices)

    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cr = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        a = cr.sum() / 2.0
        return np.array([np.sum((v[:, 0] + w[:, 0]) * cr), np.sum((v[:, 1] + w[:, 1]) * cr)]) / (6.0 * a)

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        """Boolean mask of points lying in the closed polygon (``tol`` widens it)."""
        A, b = self.halfplanes()
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(pts @ A.T <= b + tol, axis=1)

    def translate(self, offset) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices + np.asarray(offset, dtype=float))

    def to_list(self) -> list:
        return self.vertices.tolist()


def area(P: ConvexPolygon) -> float:
    return signed_area_array(P.vertices)


def perimeter(P: ConvexPolygon) -> float:
    return perimeter_array(P.vertices)


def convex_hull(points) -> ConvexPolygon:
    """Convex hull of a planar point set as a strictly convex CCW polygon."""
    pts = _as_points(points)
    hull = hull_array(pts)
    if len(hull) < 3:
        raise DegenerateShapeError("all points are (numerically) collinear")
    return ConvexPolygon(hull)


def clip(subject: ConvexPolygon, window: ConvexPolygon) -> Optional[ConvexPolygon]:
    """Intersection of two convex polygons, or ``None`` when it has no area."""
    A, b = window.halfplanes()
    if np.all(subject.vertices @ A.T <= b):
        return subject
    out = halfplane_intersection_array(subject.vertices, A, b)
    if len(out) < 3:
        return None
    hull = hull_array(out)
    if len(hull) < 3:
        return None
    try:
        return ConvexPolygon(hull)
    except DegenerateShapeError:
        return None


def scale_about(P: ConvexPolygon, c, t: float) -> ConvexPolygon:
    if not t > 0:
        raise PreconditionError("scale factor must be positive")
    c = np.asarray(c, dtype=float)
    return ConvexPolygon(c + t * (P.vertices - c))


def diameter(P: ConvexPolygon) -> float:
    v = P.vertices
    d = v[:, None, :] - v[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", d, d))))


@dataclass(frozen=True)
class InradiusResult:
    r: float
    ridge: tuple  # one or two Points
    is_unique_point: bool

    @property
    def center(self) -> np.ndarray:
        return np.mean(np.asarray(self.ridge, dtype=float), axis=0)


def inradius(P: ConvexPolygon) -> InradiusResult:
    """Largest inscribed disk and the set of its possible centers.

    The radius comes from the Chebyshev-center LP ``max r s.t. a_i.x + r <= b_i``
    (unit normals). The optimal face is then recovered geometrically as the
    inner parallel polygon at depth ``r - eps``, whose farthest vertex pair
    gives the ridge segment (or a single point when it collapses).
    """
    A, b = P.halfplanes()
    res = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=np.column_stack([A, np.ones(len(b))]),
        b_ub=b,
        bounds=[(None, None), (None, None), (0, None)],
        method="highs",
    )
    if not res.success or res.x[2] <= 0:
        raise DegenerateShapeError("polygon has no interior")
    r = float(res.x[2])
    scale = diameter(P)
    eps = EPS_LP * scale
    face = np.empty((0, 2))
    for _ in range(6):
        face = halfplane_intersection_array(P.vertices, A, b - (r - eps))
        if len(face):
            break
        eps *= 10.0
    if len(face) == 0:
        face = res.x[None, :2]
    d = face[:, None, :] - face[None, :, :]
    dist = np.einsum("ijk,ijk->ij", d, d)
    i, j = np.unravel_index(np.argmax(dist), dist.shape)
    c = np.asarray(res.x[:2], dtype=float)
    if math.sqrt(dist[i, j]) > 1e3 * eps:
        # The face only fixes a direction: on slivers it is long even when the
        # center is unique. Clip the line through c along it at depth r exactly.
        u = (face[j] - face[i]) / math.sqrt(dist[i, j])
        slack = b - A @ c
        slack = slack - slack.min() + 1e-12 * scale
        au = A @ u
        lo = max((slack[k] / au[k] for k in range(len(b)) if au[k] < 0), default=0.0)
        hi = min((slack[k] / au[k] for k in range(len(b)) if au[k] > 0), default=0.0)
        if hi - lo > 1e3 * eps:
            p0, p1 = c + lo * u, c + hi * u
            return InradiusResult(r, (Point(*map(float, p0)), Point(*map(float, p1))), False)
        c = c + 0.5 * (lo + hi) * u
    elif len(face) > 1:
        c = face.mean(axis=0)
    return InradiusResult(r, (Point(float(c[0]), float(c[1])),), True)


def inner_parallel_array(P: ConvexPolygon, t: float) -> np.ndarray:
    """Vertices of ``{x in P : dist(x, boundary) >= t}``; may be a segment, a point or empty."""
    A, b = P.halfplanes()
    return halfplane_intersection_array(P.vertices, A, b - t)


@dataclass(frozen=True)
class GaugeInfo:
    lipschitz: float
    origin_interior_margin: float


def _origin_margin(P: ConvexPolygon) -> tuple[np.ndarray, np.ndarray]:
    A, b = P.halfplanes()
    if np.min(b) <= EPS_CONVEX * diameter(P):
        raise PreconditionError("gauge requires the origin strictly inside the polygon")
    return A, b


def gauge(P: ConvexPolygon, x):
    """Minkowski functional ``inf{lam > 0 : x in lam P}`` (``P`` must contain 0 in its interior).

    Accepts a single point or an ``(k, 2)`` array.
    """
    A, b = _origin_margin(P)
    pts = np.asarray(x, dtype=float)
    vals = np.max(np.atleast_2d(pts) @ (A / b[:, None]).T, axis=1)
    vals = np.maximum(vals, 0.0)
    return float(vals[0]) if pts.ndim == 1 else vals


def gauge_lipschitz(P: ConvexPolygon) -> GaugeInfo:
    A, b = _origin_margin(P)
    return GaugeInfo(lipschitz=float(np.max(1.0 / b)), origin_interior_margin=float(np.min(b)))


def radial_function(P: ConvexPolygon, thetas, center=(0.0, 0.0)) -> np.ndarray:
    """Distance from ``center`` to the boundary of ``P`` along each direction."""
    A, b = P.halfplanes()
    b = b - A @ np.asarray(center, dtype=float)
    if np.min(b) <= 0:
        raise PreconditionError("center must lie strictly inside the polygon")
    u = np.column_stack([np.cos(thetas), np.sin(thetas)])
    return 1.0 / np.max(u @ (A / b[:, None]).T, axis=1)


def _mollifier_quadrature(n: int, order: int = QUAD_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights for integrating against the standard bump on the disk of radius 1/n.

    Tensor Gauss-Legendre in polar coordinates; weights are normalized to unit
    mass with the same rule, so the discrete measure is an exact probability
    measure supported in the closed disk.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    rho = 0.5 * (x + 1.0)  # in units of 1/n
    w_rho = 0.5 * w
    phi = math.pi * (x + 1.0)
    w_phi = math.pi * w
    bump = np.exp(-1.0 / (1.0 - rho**2))
    radial = w_rho * bump * rho
    R, PHI = np.meshgrid(rho, phi, indexing="ij")
    W = np.outer(radial, w_phi)
    offsets = np.column_stack([(R * np.cos(PHI)).ravel(), (R * np.sin(PHI)).ravel()]) / n
    weights = W.ravel()
    return offsets, weights / weights.sum()


def mollified_gauge(P: ConvexPolygon, n: int, points) -> np.ndarray:
    """``(j * rho_n)(x)`` for the gauge ``j`` of ``P`` (origin interior)."""
    A, b = _origin_margin(P)
    G = A / b[:, None]
    offsets, weights = _mollifier_quadrature(n)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    gx = pts @ G.T
    gy = offsets @ G.T
    vals = np.max(gx[:, None, :] - gy[None, :, :], axis=2)
    return vals @ weights


@dataclass(frozen=True, eq=False)
class SmoothedBody:
    """Sampled boundary of the smoothed body ``{j_n < 1}``.

    ``points`` are absolute coordinates; ``radii`` are measured from ``center``.
    """

    n: int
    center: np.ndarray = field(repr=False)
    thetas: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)
    base_radii: np.ndarray = field(repr=False)
    lipschitz: float

    @property
    def points(self) -> np.ndarray:
        u = np.column_stack([np.cos(self.thetas), np.sin(self.thetas)])
        return self.center + self.radii[:, None] * u

    def perimeter(self) -> float:
        return perimeter_array(self.points)

    def area(self) -> float:
        return signed_area_array(self.points)

    def polygon(self) -> ConvexPolygon:
        return convex_hull(self.points)

    def sandwich_holds(self, rtol: float = 1e-9) -> np.ndarray:
        """Per-direction check of ``(1 - C/n) r_E <= r_En <= (1 + C/n) r_E``."""
        k = self.lipschitz / self.n
        lo = (1.0 - k) * self.base_radii
        hi = (1.0 + k) * self.base_radii
        slack = rtol * self.base_radii
        return (self.radii >= lo - slack) & (self.radii <= hi + slack)


def smooth(
    P: ConvexPolygon,
    n: int,
    angular_resolution: int = 720,
    center=None,
    inside: Optional[ConvexPolygon] = None,
) -> SmoothedBody:
    """Smooth convex approximation of ``P`` by mollifying its gauge.

    The gauge is taken about ``center`` (default: the inradius center). For
    each sampled direction the boundary radius solves ``j_n(r u) = 1`` by
    bisection. Raises :class:`RefineNError` when ``C_E/n >= 1`` (the level set
    could be empty) or when ``(1 + C_E/n) P`` would not fit inside ``inside``.
    """
    if n < 1:
        raise PreconditionError("n must be a positive integer")
    c = inradius(P).center if center is None else np.asarray(center, dtype=float)
    Q = P.translate(-c)
    info = gauge_lipschitz(Q)
    k = info.lipschitz / n
    if k >= 1.0:
        raise RefineNError(f"n={n} too small: C_E/n = {k:.3g} must be < 1")
    if inside is not None:
        outer = scale_about(P, c, 1.0 + k)
        if not np.all(inside.contains(outer.vertices)):
            raise RefineNError(f"n={n} too small: (1 + C_E/n) E is not contained in the target set")

    thetas = 2.0 * math.pi * np.arange(angular_resolution) / angular_resolution
    u = np.column_stack([np.cos(thetas), np.sin(thetas)])
    base = radial_function(Q, thetas)
    lo = np.zeros_like(base)
    hi = (1.0 + k) * base * 1.01 + 1e-12
    while np.max(hi - lo) > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        inside_mask = mollified_gauge(Q, n, mid[:, None] * u) < 1.0
        lo = np.where(inside_mask, mid, lo)
        hi = np.where(inside_mask, hi, mid)
    radii = 0.5 * (lo + hi)
    return SmoothedBody(n=n, center=c, thetas=thetas, radii=radii, base_radii=base, lipschitz=info.lipschitz)


def regular_polygon(n: int, R: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> ConvexPolygon:
    k = np.arange(n)
    ang = phase + 2.0 * math.pi * k / n
    c = np.asarray(center, dtype=float)
    return ConvexPolygon(c + R * np.column_stack([np.cos(ang), np.sin(ang)]))


def rectangle(x0: float, y0: float, x1: float, y1: float) -> ConvexPolygon:
    return ConvexPolygon([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


def project_points_array(pts: np.ndarray, A: np.ndarray, b: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Euclidean projection of points onto the convex polygon ``{A x <= b}`` with vertices ``verts``.

    The nearest boundary point of an outside point lies on an edge whose
    constraint it violates (a vertex is shared by such an edge), so only those
    pairs are examined.
    """
    viol = pts @ A.T - b
    ki, ei = np.nonzero(viol > 0)
    if len(ki) == 0:
        return pts
    d = np.roll(verts, -1, axis=0) - verts
    rel = pts[ki] - verts[ei]
    de = d[ei]
    lam = np.clip(np.einsum("ij,ij->i", rel, de) / np.einsum("ij,ij->i", de, de), 0.0, 1.0)
    foot = verts[ei] + lam[:, None] * de
    dist = np.einsum("ij,ij->i", pts[ki] - foot, pts[ki] - foot)
    order = np.lexsort((dist, ki))
    _, first = np.unique(ki[order], return_index=True)
    pick = order[first]
    out = pts.copy()
    out[ki[pick]] = foot[pick]
    return out


def resample_boundary(P: ConvexPolygon, count: int) -> np.ndarray:
    """``count`` boundary points of ``P`` that keep every vertex when ``count >= len(P)``.

    Extra points are spread over edges in proportion to edge length. With
    fewer slots than vertices, points are taken at equal arclength.
    """
    v = P.vertices
    n = len(v)
    d = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(d[:, 0], d[:, 1])
    if count < n:
        s = np.concatenate([[0.0], np.cumsum(lengths)])
        targets = np.arange(count) * s[-1] / count
        idx = np.searchsorted(s, targets, side="right") - 1
        lam = (targets - s[idx]) / lengths[idx]
        return v[idx] + lam[:, None] * d[idx]
    extra = count - n
    share = lengths / lengths.sum() * extra
    per_edge = np.floor(share).astype(int)
    rest = extra - per_edge.sum()
    order = np.argsort(-(share - per_edge), kind="stable")
    per_edge[order[:rest]] += 1
    out = []
    for i in range(n):
        m = per_edge[i] + 1
        for k in range(m):
            out.append(v[i] + (k / m) * d[i])
    return np.array(out)
