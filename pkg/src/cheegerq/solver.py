"""Numerical estimates of h_q for planar domains.

The polygon optimizer only ever produces upper bounds; every estimate also
carries the isoperimetric lower bound ``2 sqrt(pi) |Omega|^(1/2 - 1/q)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import geometry as geo
from .closed_forms import Exponent, hq_ball
from .errors import GeometryError, PreconditionError
from .shapes import (
    Disk,
    Ellipse,
    Epigraph,
    HalfStrip,
    PolygonShape,
    Rectangle,
    ShapeSpec,
    Stadium,
    UnionShape,
    ellipse_perimeter,
)

METHODS = ("analytic", "polygon_opt", "rounded_family", "grid")
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
FAMILY_GRID = 65
FAMILY_TOL = 1e-10
EPS_CONTAIN = 1e-9
HALFSTRIP_L0 = 40.0
HALFSTRIP_RTOL = 1e-3
RUN_CAP = 4  # evaluations per Nelder-Mead run, in units of simplex size


@dataclass(frozen=True)
class SolverOptions:
    vertex_count: int = 48
    multistarts: int = 8
    max_iters: int = 20000  # objective evaluations per solve, all starts together
    tol_rel: float = 1e-8
    rng_seed: int = 0

    def __post_init__(self):
        if self.vertex_count < 8:
            raise PreconditionError("vertex_count must be >= 8")
        if self.multistarts < 1:
            raise PreconditionError("multistarts must be >= 1")
        if self.max_iters < 100:
            raise PreconditionError("max_iters must be >= 100")
        if not self.tol_rel > 0:
            raise PreconditionError("tol_rel must be positive")


@dataclass
class CheegerEstimate:
    value: float
    minimizer: Optional[geo.ConvexPolygon]
    lower_bound: float
    method: str
    iterations: int
    converged: bool
    q: float
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "lower_bound": self.lower_bound,
            "method": self.method,
            "iterations": self.iterations,
            "converged": self.converged,
            "q": self.q,
            "minimizer": None if self.minimizer is None else self.minimizer.to_list(),
            "metadata": self.metadata,
        }


def ratio(perimeter: float, area: float, q: float) -> float:
    if area <= 0:
        return math.inf
    return perimeter / area ** (1.0 / q)


def polygon_ratio(P: geo.ConvexPolygon, q: float) -> float:
    return ratio(geo.perimeter(P), geo.area(P), q)


def isoperimetric_floor(area: float, q: float) -> float:
    """``2 sqrt(pi) A^(1/2 - 1/q)``: no subset of a set of area ``A`` does better (q < 2)."""
    if math.isinf(area):
        return 0.0
    return 2.0 * math.sqrt(math.pi) * area ** (0.5 - 1.0 / q)


def _check_planar(q: float) -> Exponent:
    e = Exponent(2, q)
    return e


# ---------------------------------------------------------------------------
# rounded-corner family


def _interior_half_cotangents(P: geo.ConvexPolygon) -> np.ndarray:
    """``cot(alpha_i / 2)`` at every vertex, ``alpha_i`` the interior angle."""
    v = P.vertices
    e_in = v - np.roll(v, 1, axis=0)
    e_out = np.roll(v, -1, axis=0) - v
    turn = np.arctan2(
        e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0],
        np.einsum("ij,ij->i", e_in, e_out),
    )
    return np.tan(turn / 2.0)  # cot((pi - turn)/2) = tan(turn/2)


class _ParallelBodies:
    """Area and perimeter of inner parallel bodies of a fixed polygon.

    While no edge has shrunk to zero the measures are the polynomials
    ``A - P t + K t^2`` and ``P - 2 K t``; past that the body is clipped.
    """

    def __init__(self, P: geo.ConvexPolygon):
        self.P = P
        self.area = geo.area(P)
        self.perimeter = geo.perimeter(P)
        k = _interior_half_cotangents(P)
        self.K = float(k.sum())
        d = np.roll(P.vertices, -1, axis=0) - P.vertices
        lengths = np.hypot(d[:, 0], d[:, 1])
        shrink = k + np.roll(k, -1)
        self.t_event = float(np.min(lengths / shrink))

    def measures(self, t: float) -> tuple[float, float]:
        if t <= self.t_event * (1.0 - 1e-12):
            return self.area - self.perimeter * t + self.K * t * t, self.perimeter - 2.0 * self.K * t
        pts = geo.inner_parallel_array(self.P, t)
        if len(pts) == 0:
            return 0.0, 0.0
        return max(geo.signed_area_array(pts), 0.0), geo.perimeter_array(pts)

    def rounded(self, t: float) -> tuple[float, float]:
        """Area and perimeter of the inner body at distance ``t`` thickened back by ``t``."""
        a, p = self.measures(t)
        return a + p * t + math.pi * t * t, p + 2.0 * math.pi * t


def _golden_min(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    candidates = [(f(lo), lo), (f1, x1), (f2, x2), (f(hi), hi)]
    best = min(candidates)
    return best[1], best[0]


def rounded_polygon(core: np.ndarray, t: float, arc_points: int = 32) -> geo.ConvexPolygon:
    """Convex hull of disks of radius ``t`` centered at the ``core`` points."""
    if t <= 0:
        return geo.convex_hull(core)
    ang = 2.0 * math.pi * np.arange(arc_points) / arc_points
    circle = t * np.column_stack([np.cos(ang), np.sin(ang)])
    return geo.convex_hull((core[:, None, :] + circle[None, :, :]).reshape(-1, 2))


def _as_convex_polygon(omega) -> geo.ConvexPolygon:
    if isinstance(omega, geo.ConvexPolygon):
        return omega
    if isinstance(omega, (UnionShape, Epigraph)) or not omega.bounded:
        raise PreconditionError(f"a bounded convex domain is required, got {omega.kind}")
    return omega.polygon()


def solve_rounded_family(omega, q: float) -> CheegerEstimate:
    """Best inner-parallel-body-with-rounded-corners subset, over the offset ``t``.

    For the square at ``q = 1`` this family contains the true minimizer.
    """
    _check_planar(q)
    P = _as_convex_polygon(omega)
    r = geo.inradius(P).r
    bodies = _ParallelBodies(P)

    def g(t: float) -> float:
        a, p = bodies.rounded(min(max(t, 0.0), r))
        return ratio(p, a, q)

    grid = np.linspace(0.0, r, FAMILY_GRID)
    vals = np.array([g(t) for t in grid])
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, FAMILY_GRID - 1)]
    t_star, value = _golden_min(g, lo, hi, FAMILY_TOL * max(r, 1.0))
    a, p = bodies.rounded(t_star)
    return CheegerEstimate(
        value=value,
        minimizer=None,
        lower_bound=isoperimetric_floor(geo.area(P), q),
        method="rounded_family",
        iterations=FAMILY_GRID,
        converged=True,
        q=q,
        metadata={"t": t_star, "inradius": r, "area": a, "perimeter": p},
    )


def rounded_family_polygon(P: geo.ConvexPolygon, t: float) -> geo.ConvexPolygon:
    core = geo.inner_parallel_array(P, t) if t > 0 else P.vertices
    if len(core) == 0:
        core = np.array([geo.inradius(P).center])
    return rounded_polygon(core, t, arc_points=64)


# ---------------------------------------------------------------------------
# Nelder-Mead over vertex coordinates


class _NMResult(NamedTuple):
    x: np.ndarray
    f: float
    fev: int
    converged: bool


def nelder_mead(f, x0: np.ndarray, step: float, max_fev: int, tol_rel: float) -> _NMResult:
    """Adaptive Nelder-Mead (dimension-dependent coefficients); stops on relative simplex spread."""
    n = len(x0)
    alpha, gamma = 1.0, 1.0 + 2.0 / n
    rho, sigma = 0.75 - 0.5 / n, 1.0 - 1.0 / n
    sim = np.vstack([x0, x0 + step * np.eye(n)])
    fs = np.array([f(x) for x in sim])
    fev = n + 1
    converged = False
    while fev < max_fev:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        best, worst = fs[0], fs[-1]
        if math.isfinite(worst) and worst - best <= tol_rel * abs(best):
            converged = True
            break
        c = sim[:-1].mean(axis=0)
        xr = c + alpha * (c - sim[-1])
        fr = f(xr)
        fev += 1
        if fr < best:
            xe = c + gamma * (xr - c)
            fe = f(xe)
            fev += 1
            sim[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if fr < worst:
            xc = c + rho * (xr - c)
        else:
            xc = c + rho * (sim[-1] - c)
        fc = f(xc)
        fev += 1
        if fc < min(fr, worst):
            sim[-1], fs[-1] = xc, fc
            continue
        sim[1:] = sim[0] + sigma * (sim[1:] - sim[0])
        fs[1:] = [f(x) for x in sim[1:]]
        fev += n
    i = int(np.argmin(fs))
    return _NMResult(sim[i], float(fs[i]), fev, converged)


class _VertexObjective:
    """Ratio of the hull of the vertices after projecting them into ``Omega``."""

    def __init__(self, omega: geo.ConvexPolygon, q: float):
        self.A, self.b = omega.halfplanes()
        self.verts = omega.vertices
        self.inv_q = 1.0 / q

    def project(self, x: np.ndarray) -> np.ndarray:
        return geo.project_points_array(x.reshape(-1, 2), self.A, self.b, self.verts)

    def __call__(self, x: np.ndarray) -> float:
        h = geo.hull_array(self.project(x))
        if len(h) < 3:
            return math.inf
        a = geo.signed_area_array(h)
        if a <= 0:
            return math.inf
        return geo.perimeter_array(h) / a**self.inv_q


def _polish(obj: _VertexObjective, x0: np.ndarray, step: float, budget: int, tol_rel: float):
    """Nelder-Mead with restarts from the best point and the step halved each time."""
    x = obj.project(x0).ravel()
    fx = obj(x)
    used = 0
    converged = False
    cap = RUN_CAP * (len(x) + 1)
    while used < budget:
        res = nelder_mead(obj, x, step, min(cap, budget - used), tol_rel)
        used += res.fev
        improved = fx - res.f
        if res.f < fx:
            x, fx = obj.project(res.x).ravel(), res.f
        if res.converged and improved <= tol_rel * abs(fx):
            converged = True
            break
        step *= 0.5
    return x, fx, used, converged


def _seeds(P: geo.ConvexPolygon, q: float, opts: SolverOptions, extra: Sequence[np.ndarray]):
    m = opts.vertex_count
    ir = geo.inradius(P)
    c = np.asarray(ir.center)
    boundary = geo.resample_boundary(P, m)
    seeds = [c + s * (boundary - c) for s in (1.0, 0.8, 0.6, 0.4)]
    fam = solve_rounded_family(P, q)
    family = geo.resample_boundary(rounded_family_polygon(P, fam.metadata["t"]), m)
    seeds.append(family)
    ang = 2.0 * math.pi * np.arange(m) / m
    seeds.append(c + ir.r * np.column_stack([np.cos(ang), np.sin(ang)]))
    seeds.extend(np.asarray(s, dtype=float).reshape(m, 2) for s in extra)
    rng = np.random.default_rng(opts.rng_seed)
    for _ in range(max(opts.multistarts - len(seeds), 2)):
        seeds.append(family + rng.normal(scale=0.05 * ir.r, size=family.shape))
    return seeds, ir.r, fam


def solve_convex(
    omega,
    q: float,
    opts: SolverOptions = SolverOptions(),
    extra_seeds: Sequence[np.ndarray] = (),
) -> CheegerEstimate:
    """Upper bound for h_q of a bounded convex domain by optimizing a convex polygon inside it.

    Seeds: the domain's boundary scaled by 1, 0.8, 0.6, 0.4 about the inradius
    center, the best rounded-corner set, the inscribed disk and random
    perturbations. All seeds get a short screening run, then the winner is
    polished with the rest of the budget.
    """
    _check_planar(q)
    P = _as_convex_polygon(omega)
    obj = _VertexObjective(P, q)
    seeds, r, fam = _seeds(P, q, opts, extra_seeds)

    screen = max(opts.max_iters // (3 * len(seeds)), RUN_CAP * (2 * opts.vertex_count + 1))
    step = 0.1 * r
    runs = []
    used = 0
    for i, s in enumerate(seeds):
        x, fx, fev, _ = _polish(obj, s.ravel(), step, screen, opts.tol_rel)
        used += fev
        runs.append((fx, i, x))
    fx, best_i, x = min(runs, key=lambda t: (t[0], t[1]))
    x, fx, fev, converged = _polish(obj, x, 0.5 * step, max(opts.max_iters - used, 1), opts.tol_rel)
    used += fev

    poly = geo.convex_hull(obj.project(x))
    value = polygon_ratio(poly, q)
    source = "optimizer"
    full = geo.convex_hull(obj.project(rounded_family_polygon(P, fam.metadata["t"]).vertices.ravel()))
    if polygon_ratio(full, q) < value:
        poly, value, source = full, polygon_ratio(full, q), "family_polygon"
    return CheegerEstimate(
        value=value,
        minimizer=poly,
        lower_bound=isoperimetric_floor(geo.area(P), q),
        method="polygon_opt",
        iterations=used,
        converged=converged,
        q=q,
        metadata={"source": source, "best_start": best_i, "starts": len(seeds), "family_value": fam.value, "family_t": fam.metadata["t"]},
    )


# ---------------------------------------------------------------------------
# unions


def joint_scaling_min(perimeters: Sequence[float], areas: Sequence[float], q: float) -> tuple[float, np.ndarray]:
    """Minimize ``sum s_i P_i / (sum s_i^2 A_i)^(1/q)`` over ``s`` in ``[0, 1]^k`` minus 0.

    With one candidate set per component, shrinking component ``i`` by ``s_i``
    scales its perimeter by ``s_i`` and area by ``s_i^2``. Along any free
    coordinate the objective has no interior local minimum (its only critical
    point is a maximum), so the minimum sits at a vertex of the cube; all
    ``2^k - 1`` vertices are enumerated.
    """
    Pv = np.asarray(perimeters, dtype=float)
    Av = np.asarray(areas, dtype=float)
    k = len(Pv)
    if k == 0 or k > 20:
        raise PreconditionError("need between 1 and 20 components")
    corners = np.array(list(itertools.product((0.0, 1.0), repeat=k)))[1:]
    P = corners @ Pv
    A = corners @ Av
    vals = P / A ** (1.0 / q)
    i = int(np.argmin(vals))
    return float(vals[i]), corners[i]


def solve_union(shape: UnionShape, q: float, opts: SolverOptions = SolverOptions()) -> CheegerEstimate:
    e = _check_planar(q)
    if not isinstance(shape, UnionShape):
        raise PreconditionError("solve_union needs a union shape")
    parts = [estimate(m, q, opts) for m in shape.members]
    floor = isoperimetric_floor(shape.area(), q)
    iters = sum(p.iterations for p in parts)
    if e.q >= 1:
        i = min(range(len(parts)), key=lambda j: (parts[j].value, j))
        best = parts[i]
        return CheegerEstimate(
            best.value, best.minimizer, floor, best.method, iters,
            all(p.converged for p in parts), q, {"member": i, "member_values": [p.value for p in parts]},
        )
    # q < 1: one candidate per member, jointly rescaled
    perims, areas = [], []
    for m, p in zip(shape.members, parts):
        if isinstance(m, Disk):
            perims.append(m.perimeter())
            areas.append(m.area())
        elif p.minimizer is not None:
            perims.append(geo.perimeter(p.minimizer))
            areas.append(geo.area(p.minimizer))
        else:
            a = p.metadata["area"]
            perims.append(p.metadata["perimeter"])
            areas.append(a)
    value, scales = joint_scaling_min(perims, areas, q)
    all_disks = all(isinstance(m, Disk) for m in shape.members)
    meta = {"scales": scales.tolist(), "member_values": [p.value for p in parts]}
    if all_disks:
        meta["radii"] = [s * m.R for s, m in zip(scales, shape.members)]
    return CheegerEstimate(
        value, None, floor, "analytic" if all_disks else "grid", iters,
        all(p.converged for p in parts), q, meta,
    )


# ---------------------------------------------------------------------------
# unbounded convex sets


def rounded_rectangle_measures(length: float, halfwidth: float, t: float) -> tuple[float, float]:
    """Area and perimeter of ``[0, length] x [-w, w]`` with corners rounded at radius ``t <= w``."""
    w = halfwidth
    return 2.0 * w * length - (4.0 - math.pi) * t * t, 2.0 * length + 4.0 * w - (8.0 - 2.0 * math.pi) * t


def strip_proxy(halfwidth: float, q: float, max_length: float = math.inf) -> tuple[float, float, float]:
    """Best rounded rectangle inside a strip of the given half-width.

    Returns ``(ratio, length, t)``. For ``1 < q < 2`` long rectangles lose
    (ratio grows like length^(1 - 1/q)), so the optimum has finite length.
    """
    e = _check_planar(q)
    if e.q <= 1:
        raise PreconditionError("the strip proxy is used for 1 < q < 2")
    w = halfwidth

    def best_t(length: float) -> tuple[float, float]:
        def g(t):
            a, p = rounded_rectangle_measures(length, w, t)
            return ratio(p, a, q)

        t, v = _golden_min(g, 0.0, min(w, length / 2.0 + w), FAMILY_TOL * w)
        return v, t

    hi = min(max_length, 1e3 * w)
    lengths = np.linspace(0.0, hi, 401)[1:]
    vals = [best_t(L)[0] for L in lengths]
    k = int(np.argmin(vals))
    lo, up = lengths[max(k - 1, 0)], lengths[min(k + 1, len(lengths) - 1)]
    L, v = _golden_min(lambda s: best_t(s)[0], lo, up, FAMILY_TOL * w)
    return v, L, best_t(L)[1]


def _rounded_rectangle_polygon(length: float, halfwidth: float, t: float, x0: float = 0.0) -> geo.ConvexPolygon:
    t = min(t, halfwidth)
    core = np.array([[x0 + t, -halfwidth + t], [x0 + length - t, -halfwidth + t],
                     [x0 + length - t, halfwidth - t], [x0 + t, halfwidth - t]])
    return rounded_polygon(core, t, arc_points=64)


def solve_halfstrip(
    shape: HalfStrip,
    q: float,
    opts: SolverOptions = SolverOptions(),
    L0: float = HALFSTRIP_L0,
    rtol: float = HALFSTRIP_RTOL,
    max_doublings: int = 6,
) -> CheegerEstimate:
    """Truncate at length ``L`` and double ``L`` until the estimate moves by less than ``rtol``.

    Optimal sets have a diameter bound independent of ``L``, so the estimates
    settle once the truncation exceeds it. The optimizer is seeded with the best
    rounded rectangle placed at the closed end.
    """
    e = _check_planar(q)
    if e.q <= 1:
        raise PreconditionError("half-strip solving needs 1 < q < 2 (h_q = 0 for q < 1; q = 1 is borderline)")
    w = shape.halfwidth
    history = []
    prev = None
    L = L0 if not shape.bounded else min(L0, shape.length)
    for _ in range(max_doublings + 1):
        _, ell, t = strip_proxy(w, q, max_length=L)
        seed = geo.resample_boundary(_rounded_rectangle_polygon(ell, w, t), opts.vertex_count)
        est = solve_convex(shape.truncated(L), q, opts, extra_seeds=[seed])
        proxy = _rounded_rectangle_polygon(ell, w, t)
        if polygon_ratio(proxy, q) < est.value:
            est.minimizer, est.value = proxy, polygon_ratio(proxy, q)
            est.metadata["source"] = "strip_proxy"
        history.append((L, est.value))
        if prev is not None and abs(est.value - prev.value) <= rtol * prev.value:
            break
        if shape.bounded and L >= shape.length:
            break
        prev = est
        L = 2.0 * L if not shape.bounded else min(2.0 * L, shape.length)
    est.lower_bound = isoperimetric_floor(shape.area(), q)
    est.metadata["truncations"] = history
    return est


@dataclass(frozen=True)
class ExistenceReport:
    exists: Optional[bool]  # None: borderline, positive but attainment not settled
    h_zero: bool
    reason: str
    ridge: str

    def to_dict(self) -> dict:
        return {"exists": self.exists, "h_zero": self.h_zero, "reason": self.reason, "ridge": self.ridge}


def _ridge_description(P: geo.ConvexPolygon) -> str:
    ir = geo.inradius(P)
    if ir.is_unique_point:
        x, y = ir.center
        return f"point ({x:.6g}, {y:.6g}), inradius {ir.r:.6g}"
    (x0, y0), (x1, y1) = ir.ridge[0], ir.ridge[-1]
    return f"segment ({x0:.6g}, {y0:.6g}) -- ({x1:.6g}, {y1:.6g}), inradius {ir.r:.6g}"


def existence_report(shape: ShapeSpec, q: float) -> ExistenceReport:
    """Whether h_q is attained, decided through the set of centers of largest inscribed disks."""
    e = _check_planar(q)
    if isinstance(shape, UnionShape):
        raise PreconditionError("existence is decided for convex domains; a union is not convex")
    if isinstance(shape, (HalfStrip, Epigraph)) and not (isinstance(shape, HalfStrip) and shape.bounded):
        r = shape.halfwidth
        if e.q < 1:
            return ExistenceReport(False, True, "unbounded convex set with q < 1: elongated stadiums drive the ratio to 0", "")
        if e.q == 1:
            return ExistenceReport(None, False, "q = 1 on an unbounded strip-like set: positive but possibly not attained", "")
        if isinstance(shape, HalfStrip):
            return ExistenceReport(
                True, False, "half-strip: largest inscribed disks exist, so minimizing sequences stay bounded",
                f"half-line {{(x, 0) : x >= {r:.6g}}}, inradius {r:.6g}",
            )
        return ExistenceReport(
            False, False,
            "epigraph with a blowing-up profile: inradius is not attained, translated and enlarged sets keep improving",
            "empty",
        )
    if isinstance(shape, Disk):
        x, y = shape.center
        return ExistenceReport(True, False, "bounded convex set", f"point ({x:.6g}, {y:.6g}), inradius {shape.R:.6g}")
    P = _as_convex_polygon(shape)
    return ExistenceReport(True, False, "bounded convex set", _ridge_description(P))


class WitnessStep(NamedTuple):
    d: float
    ratio: float


def stadium_ratio(r: float, d: float, q: float) -> float:
    return ratio(2.0 * math.pi * r + 2.0 * d, math.pi * r * r + 2.0 * r * d, q)


def stadium_witness(halfwidth: float, q: float, eps: float, max_doublings: int = 1000) -> list[WitnessStep]:
    """Stadiums of radius ``halfwidth/2`` with doubling length until the ratio drops below ``eps`` (q < 1)."""
    e = _check_planar(q)
    if e.q >= 1:
        raise PreconditionError("stadium witnesses only decay for q < 1")
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    r = 0.5 * halfwidth
    d = 1.0
    steps = [WitnessStep(d, stadium_ratio(r, d, q))]
    for _ in range(max_doublings):
        if steps[-1].ratio < eps:
            return steps
        d *= 2.0
        steps.append(WitnessStep(d, stadium_ratio(r, d, q)))
    raise GeometryError(f"stadium ratio did not drop below {eps:g}")


class DemoStep(NamedTuple):
    shift: float
    scale: float
    ratio: float


def nonexistence_demo(
    shape: Epigraph,
    q: float,
    steps: int = 10,
    delta: float = 0.1,
    contraction: float = 0.5,
    margin: float = 1e-6,
) -> list[DemoStep]:
    """Translate the strip-optimal rounded rectangle rightward and enlarge it, step by step.

    The set is scaled by ``s_k = 1 - delta * contraction^k`` (so each step
    multiplies by ``s_k / s_(k-1) > 1``) and pushed right until all its
    vertices clear the profile by ``margin``. Since the ratio scales like
    ``s^(1 - 2/q)`` the returned ratios decrease strictly toward the strip
    value, which is never reached inside the epigraph.
    ``contraction = 1`` keeps the scale fixed.
    """
    e = _check_planar(q)
    if not isinstance(shape, Epigraph):
        raise PreconditionError("nonexistence_demo needs an epigraph")
    if not 1 < e.q < 2:
        raise PreconditionError("nonexistence_demo needs 1 < q < 2")
    if steps < 2:
        raise PreconditionError("steps must be >= 2")
    if not (0 < delta < 1 and 0 < contraction <= 1):
        raise PreconditionError("need 0 < delta < 1 and 0 < contraction <= 1")
    w = shape.halfwidth
    _, ell, t = strip_proxy(w, q)
    base = _rounded_rectangle_polygon(ell, w, t)
    out = []
    for k in range(steps):
        s = 1.0 - delta * contraction**k
        verts = s * base.vertices
        shift = float(np.max(shape.f(verts[:, 1]) - verts[:, 0])) + margin
        verts = verts + [shift, 0.0]
        if not np.all(shape.contains(verts)):
            raise GeometryError(f"step {k}: translated set is not inside the epigraph")
        out.append(DemoStep(shift, s, polygon_ratio(geo.ConvexPolygon(verts), q)))
    return out


@dataclass(frozen=True)
class ElongationResult:
    family: str
    q: float
    rows: tuple  # (size, perimeter, area, ratio)
    slope: float


def _family_measures(family: str, size: float) -> tuple[float, float]:
    if family == "stadium":
        return 2.0 * math.pi + 2.0 * size, math.pi + 2.0 * size
    if family == "ellipse":
        return ellipse_perimeter(size, 1.0), math.pi * size
    if family == "rectangle":
        return 2.0 * (1.0 + size), size
    raise PreconditionError(f"unknown family {family!r}; use stadium, ellipse or rectangle")


def elongation_demo(family: str, q: float, sizes: Sequence[float]) -> ElongationResult:
    """Ratios of elongating sets: stadium (r=1, d=size), ellipse (semi-axes size and 1), rectangle 1 x size."""
    _check_planar(q)
    sizes = [float(s) for s in sizes]
    if len(sizes) < 2 or any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] <= 0:
        raise PreconditionError("sizes must be positive and strictly increasing, at least two")
    rows = []
    for s in sizes:
        p, a = _family_measures(family, s)
        rows.append((s, p, a, ratio(p, a, q)))
    arr = np.array(rows)
    slope = float(np.polyfit(np.log(arr[:, 0]), np.log(arr[:, 3]), 1)[0])
    return ElongationResult(family, q, tuple(rows), slope)


# ---------------------------------------------------------------------------


def estimate(shape: ShapeSpec, q: float, opts: SolverOptions = SolverOptions()) -> CheegerEstimate:
    """Dispatch on the shape kind."""
    e = _check_planar(q)
    if isinstance(shape, Disk):
        value = hq_ball(e, shape.R)
        # disks meet the isoperimetric floor exactly; guard against the last bit
        floor = min(isoperimetric_floor(shape.area(), q), value)
        return CheegerEstimate(
            value, shape.polygon(), floor, "analytic", 0, True, q,
            {"exact": True},
        )
    if isinstance(shape, UnionShape):
        return solve_union(shape, q, opts)
    if isinstance(shape, (HalfStrip, Epigraph)) and not (isinstance(shape, HalfStrip) and shape.bounded):
        if e.q < 1:
            return CheegerEstimate(0.0, None, 0.0, "analytic", 0, True, q, {"attained": False})
        if e.q == 1:
            raise PreconditionError("q = 1 on an unbounded strip-like set is the borderline case; see existence_report")
        strip = HalfStrip(shape.halfwidth)
        est = solve_halfstrip(strip, q, opts)
        if isinstance(shape, Epigraph):
            est.minimizer = None
            est.metadata["attained"] = False
            est.metadata["note"] = "infimum equals the strip value and is not attained"
        return est
    return solve_convex(shape, q, opts)
