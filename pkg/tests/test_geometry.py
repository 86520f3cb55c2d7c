import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.spatial import ConvexHull, HalfspaceIntersection

from cheegerq import geometry as geo
from cheegerq.errors import DegenerateShapeError, PreconditionError, RefineNError

coords = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
point_sets = st.lists(st.tuples(coords, coords), min_size=3, max_size=30)


def _polygon_or_skip(points):
    try:
        return geo.convex_hull(points)
    except (DegenerateShapeError, PreconditionError):
        assume(False)


def _scipy_polygon(points):
    hull = ConvexHull(np.asarray(points, dtype=float))
    return hull.volume, hull.area  # 2-D: volume is area, area is perimeter


def test_unit_square_measures():
    S = geo.rectangle(0, 0, 1, 1)
    assert geo.area(S) == 1.0
    assert geo.perimeter(S) == 4.0


def test_rejects_bad_polygons():
    with pytest.raises(DegenerateShapeError):
        geo.ConvexPolygon(np.array([[0, 0], [1, 1], [2, 2]]))
    with pytest.raises(DegenerateShapeError):
        geo.ConvexPolygon(np.array([[0, 0], [1, 0]]))
    with pytest.raises(PreconditionError):
        geo.ConvexPolygon(np.array([[0, 0], [2, 0], [1, 0.2], [1, 2]]))  # reflex vertex
    with pytest.raises(DegenerateShapeError):
        geo.ConvexPolygon(np.array([[0, 0], [0, 1], [1, 1], [1, 0]]))  # clockwise


def test_vertices_are_read_only():
    S = geo.rectangle(0, 0, 1, 1)
    with pytest.raises(ValueError):
        S.vertices[0, 0] = 5.0


@given(point_sets)
def test_hull_matches_qhull(points):
    P = _polygon_or_skip(points)
    a, p = _scipy_polygon(P.vertices)
    assert geo.area(P) == pytest.approx(a, rel=1e-9)
    assert geo.perimeter(P) == pytest.approx(p, rel=1e-9)
    # every input point is inside
    assert np.all(P.contains(np.asarray(points, dtype=float), tol=1e-9 * (1 + geo.diameter(P))))


@given(point_sets)
def test_hull_is_idempotent(points):
    P = _polygon_or_skip(points)
    Q = geo.convex_hull(P.vertices)
    assert np.allclose(P.vertices, Q.vertices)


@given(point_sets, st.floats(0, 2 * math.pi), coords, coords)
def test_area_and_perimeter_rigid_invariance(points, angle, dx, dy):
    P = _polygon_or_skip(points)
    R = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    Q = geo.convex_hull(P.vertices @ R.T + [dx, dy])
    assert geo.area(Q) == pytest.approx(geo.area(P), rel=1e-9)
    assert geo.perimeter(Q) == pytest.approx(geo.perimeter(P), rel=1e-9)


@given(point_sets, st.floats(0.1, 10))
def test_scaling_law(points, t):
    P = _polygon_or_skip(points)
    Q = geo.scale_about(P, P.centroid(), t)
    assert geo.area(Q) == pytest.approx(t * t * geo.area(P), rel=1e-9)
    assert geo.perimeter(Q) == pytest.approx(t * geo.perimeter(P), rel=1e-9)


@given(point_sets, point_sets)
def test_clip_matches_halfspace_intersection(a, b):
    P = _polygon_or_skip(a)
    W = _polygon_or_skip(b)
    C = geo.clip(P, W)
    # oracle: qhull half-space intersection, needs an interior point
    A1, b1 = P.halfplanes()
    A2, b2 = W.halfplanes()
    A = np.vstack([A1, A2])
    bb = np.concatenate([b1, b2])
    from scipy.optimize import linprog

    # Chebyshev center of the intersection
    norms = np.linalg.norm(A, axis=1)
    res = linprog([0, 0, -1], A_ub=np.column_stack([A, norms]), b_ub=bb, bounds=[(None, None)] * 2 + [(0, None)])
    scale = max(geo.diameter(P), geo.diameter(W))
    if res.status != 0 or res.x[2] < 1e-6 * scale:
        assert C is None or geo.area(C) < 1e-6 * scale * scale
        return
    hs = HalfspaceIntersection(np.column_stack([A, -bb]), res.x[:2])
    expected = ConvexHull(hs.intersections).volume
    assert C is not None
    assert geo.area(C) == pytest.approx(expected, rel=1e-7, abs=1e-12 * scale * scale)
    assert np.all(P.contains(C.vertices, tol=1e-9 * scale))
    assert np.all(W.contains(C.vertices, tol=1e-9 * scale))


def test_clip_disjoint_is_none():
    assert geo.clip(geo.rectangle(0, 0, 1, 1), geo.rectangle(2, 2, 3, 3)) is None


def test_clip_contained_returns_subject():
    S = geo.rectangle(0.2, 0.2, 0.4, 0.4)
    assert geo.clip(S, geo.rectangle(0, 0, 1, 1)) is S


@pytest.mark.parametrize("n", [3, 4, 6, 7, 32, 256])
def test_inradius_regular_polygon(n):
    P = geo.regular_polygon(n, 2.0, center=(1.0, -3.0))
    ir = geo.inradius(P)
    assert ir.r == pytest.approx(2.0 * math.cos(math.pi / n), rel=1e-9)
    assert ir.is_unique_point
    assert ir.center == pytest.approx((1.0, -3.0), abs=1e-7)


def test_inradius_examples():
    ir = geo.inradius(geo.rectangle(0, 0, 4, 2))
    assert ir.r == pytest.approx(1.0)
    assert not ir.is_unique_point
    ends = sorted(tuple(p) for p in (ir.ridge[0], ir.ridge[-1]))
    assert ends[0] == pytest.approx((1.0, 1.0), abs=1e-7)
    assert ends[1] == pytest.approx((3.0, 1.0), abs=1e-7)

    tri = geo.convex_hull([(0, 0), (4, 0), (0, 3)])
    ir = geo.inradius(tri)
    # oracle: r = area / semiperimeter for triangles
    assert ir.r == pytest.approx(6.0 / 6.0)
    assert ir.center == pytest.approx((1.0, 1.0), abs=1e-8)


@given(point_sets)
def test_inradius_against_sampled_distance(points):
    P = _polygon_or_skip(points)
    ir = geo.inradius(P)
    A, b = P.halfplanes()
    # the reported center is at distance r from the boundary
    dist = np.min(b - A @ np.asarray(ir.center))
    assert dist == pytest.approx(ir.r, rel=1e-6, abs=1e-9)
    # no vertex-sampled interior point does better
    w = np.random.default_rng(0).dirichlet(np.ones(len(P)), 200)
    inner = w @ P.vertices
    assert np.all(np.min(b[None, :] - inner @ A.T, axis=1) <= ir.r * (1 + 1e-7) + 1e-12)


def test_inradius_of_sliver_triangle_is_a_single_center():
    P = geo.convex_hull(np.array([(0.0, 3.0), (0.0, 4.0), (0.125, -4.0)]))
    ir = geo.inradius(P)
    A, b = P.halfplanes()
    assert ir.is_unique_point
    assert np.min(b - A @ ir.center) == pytest.approx(ir.r, rel=1e-9)


def test_inner_parallel_body_of_square():
    S = geo.rectangle(0, 0, 1, 1)
    I = geo.inner_parallel_array(S, 0.25)
    assert geo.signed_area_array(I) == pytest.approx(0.25)
    assert len(geo.inner_parallel_array(S, 0.6)) == 0


@given(point_sets, st.floats(0.0, 0.99))
def test_inner_parallel_body_points_keep_distance(points, frac):
    P = _polygon_or_skip(points)
    t = frac * geo.inradius(P).r
    I = geo.inner_parallel_array(P, t)
    A, b = P.halfplanes()
    assert len(I) >= 1
    assert np.all(b[None, :] - I @ A.T >= t - 1e-7 * (1 + geo.diameter(P)))


def test_gauge_basic():
    S = geo.rectangle(-1, -1, 1, 1)
    assert geo.gauge(S, (0.5, 0.0)) == pytest.approx(0.5)
    assert np.allclose(geo.gauge(S, S.vertices), 1.0)
    assert geo.gauge(S, (0.0, 0.0)) == 0.0
    with pytest.raises(PreconditionError):
        geo.gauge(geo.rectangle(0, 0, 1, 1), (0.5, 0.5))


@given(st.integers(3, 12), st.floats(0.5, 3), st.lists(st.tuples(coords, coords), min_size=2, max_size=2), st.floats(0.01, 5))
def test_gauge_properties(n, R, pair, lam):
    P = geo.regular_polygon(n, R, phase=0.3)
    x, y = np.asarray(pair[0]), np.asarray(pair[1])
    L = geo.gauge_lipschitz(P).lipschitz
    assert geo.gauge(P, lam * x) == pytest.approx(lam * geo.gauge(P, x), rel=1e-9, abs=1e-12)
    assert abs(geo.gauge(P, x) - geo.gauge(P, y)) <= L * np.linalg.norm(x - y) * (1 + 1e-12) + 1e-12
    # radial function is the inverse gauge of the direction
    th = math.atan2(x[1], x[0]) if np.linalg.norm(x) > 0 else 0.0
    rho = geo.radial_function(P, np.array([th]))[0]
    assert geo.gauge(P, rho * np.array([math.cos(th), math.sin(th)])) == pytest.approx(1.0, rel=1e-9)


def test_mollifier_weights_normalized():
    pts, w = geo._mollifier_quadrature(10)
    assert w.sum() == pytest.approx(1.0, rel=1e-12)
    assert np.all(np.hypot(pts[:, 0], pts[:, 1]) <= 0.1 + 1e-12)


def test_mollified_gauge_is_close_to_gauge():
    S = geo.rectangle(-0.5, -0.5, 0.5, 0.5)
    pts = np.random.default_rng(1).uniform(-1, 1, (50, 2))
    for n in (10, 40):
        diff = np.abs(geo.mollified_gauge(S, n, pts) - geo.gauge(S, pts))
        assert diff.max() <= geo.gauge_lipschitz(S).lipschitz / n + 1e-12


@pytest.mark.parametrize("n", [10, 20, 40])
def test_smoothing_sandwich_on_square(n):
    body = geo.smooth(geo.rectangle(-0.5, -0.5, 0.5, 0.5), n)
    assert body.sandwich_holds().all()
    assert len(body.radii) == 720


def test_smoothing_perimeter_converges_at_first_order():
    S = geo.rectangle(-0.5, -0.5, 0.5, 0.5)
    errs = [abs(geo.smooth(S, n).perimeter() - 4.0) for n in (10, 20, 40)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 0.9


def test_smoothing_needs_large_enough_n():
    S = geo.rectangle(-0.5, -0.5, 0.5, 0.5)  # C_E = 2
    with pytest.raises(RefineNError):
        geo.smooth(S, 2)
    big = geo.rectangle(-0.52, -0.52, 0.52, 0.52)
    with pytest.raises(RefineNError):
        geo.smooth(S, 10, inside=big)  # (1 + 2/10) S does not fit
    geo.smooth(S, 100, inside=big)


def test_smoothed_body_is_convex_and_contains_center():
    body = geo.smooth(geo.regular_polygon(5, 1.0), 20)
    P = body.polygon()
    # sampled boundary points are in convex position
    assert geo.area(P) == pytest.approx(body.area(), rel=1e-9)
    assert P.contains(np.array([[0.0, 0.0]]))[0]


def test_projection_onto_polygon_matches_dense_sampling():
    P = geo.regular_polygon(7, 1.0)
    A, b = P.halfplanes()
    x = np.random.default_rng(1).normal(size=(300, 2)) * 2
    x = x[np.any(x @ A.T - b > 0, axis=1)]
    y = geo.project_points_array(x, A, b, P.vertices)
    bd = geo.resample_boundary(P, 20000)
    d = np.linalg.norm(x[:, None] - bd[None], axis=2)
    assert np.abs(y - bd[d.argmin(1)]).max() < 2e-3
    inside = np.array([[0.1, 0.2]])
    assert np.array_equal(geo.project_points_array(inside, A, b, P.vertices), inside)


@pytest.mark.parametrize("count", [3, 7, 48, 300])
def test_resample_boundary(count):
    P = geo.regular_polygon(7, 1.0)
    pts = geo.resample_boundary(P, count)
    assert pts.shape == (count, 2)
    A, b = P.halfplanes()
    assert np.all(np.abs(np.max(pts @ A.T - b, axis=1)) < 1e-12)
    if count >= 7:
        for v in P.vertices:
            assert np.min(np.linalg.norm(pts - v, axis=1)) < 1e-12
