import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cheegerq import geometry as geo
from cheegerq.closed_forms import hq_ball, two_ball_h
from cheegerq.errors import ExponentError, GeometryError, PreconditionError
from cheegerq.shapes import Disk, Ellipse, Epigraph, HalfStrip, PolygonShape, Rectangle, Stadium, UnionShape
from cheegerq.solver import (
    SolverOptions,
    elongation_demo,
    estimate,
    existence_report,
    isoperimetric_floor,
    joint_scaling_min,
    nonexistence_demo,
    polygon_ratio,
    rounded_rectangle_measures,
    solve_convex,
    solve_halfstrip,
    solve_rounded_family,
    stadium_ratio,
    stadium_witness,
    strip_proxy,
)

FAST = SolverOptions(vertex_count=24, multistarts=4, max_iters=3000)
SQUARE_H1 = (4 - math.pi) / (2 - math.sqrt(math.pi))  # classical value for the unit square


def rounded_square_oracle(q):
    # unit square minus corners: A = 1 - (4 - pi) t^2, P = 4 - (8 - 2 pi) t, brute force over t
    t = np.linspace(0, 0.5, 200001)
    return np.min((4 - (8 - 2 * math.pi) * t) / (1 - (4 - math.pi) * t * t) ** (1 / q))


def test_options_validation():
    with pytest.raises(PreconditionError):
        SolverOptions(vertex_count=4)
    with pytest.raises(PreconditionError):
        SolverOptions(max_iters=10)
    with pytest.raises(PreconditionError):
        SolverOptions(tol_rel=0)


@pytest.mark.parametrize("q", [0.5, 1.0, 1.5, 1.8])
def test_rounded_family_on_square_matches_brute_force(q):
    est = solve_rounded_family(Rectangle(1, 1), q)
    assert est.value == pytest.approx(rounded_square_oracle(q), rel=1e-9)
    assert est.method == "rounded_family"


def test_rounded_family_q1_is_classical_square_value():
    assert solve_rounded_family(Rectangle(1, 1), 1.0).value == pytest.approx(SQUARE_H1, rel=1e-10)


def test_rounded_family_on_triangle_matches_brute_force():
    tri = PolygonShape(((0, 0), (4, 0), (0, 3)))
    # K = sum cot(angle/2); triangle with inradius 1, perimeter 12, area 6
    P = tri.polygon()
    ang = []
    V = P.vertices
    for i in range(3):
        u, w = V[i - 1] - V[i], V[(i + 1) % 3] - V[i]
        ang.append(math.acos(u @ w / np.linalg.norm(u) / np.linalg.norm(w)))
    K = sum(1 / math.tan(a / 2) for a in ang)
    t = np.linspace(0, 1, 200001)
    for q in (1.0, 1.5):
        oracle = np.min((12 - 2 * K * t + 2 * math.pi * t) / (6 - 12 * t + K * t * t + 12 * t - 2 * K * t * t + math.pi * t * t) ** (1 / q))
        assert solve_rounded_family(tri, q).value == pytest.approx(oracle, rel=1e-9)


def test_solver_square_q1_close_to_classical_value():
    est = solve_convex(Rectangle(1, 1), 1.0, FAST)
    assert SQUARE_H1 <= est.value <= SQUARE_H1 * 1.01
    assert est.value <= est.metadata["family_value"] * (1 + 5e-3)


def test_estimate_invariants():
    P = Rectangle(3, 1)
    est = estimate(P, 1.5, FAST)
    poly = P.polygon()
    assert est.method == "polygon_opt"
    assert est.lower_bound <= est.value
    assert est.lower_bound == pytest.approx(isoperimetric_floor(3.0, 1.5))
    assert np.all(poly.contains(est.minimizer.vertices, tol=1e-9))
    assert polygon_ratio(est.minimizer, 1.5) == pytest.approx(est.value, rel=1e-12)
    d = est.to_dict()
    assert d["q"] == 1.5 and len(d["minimizer"]) == len(est.minimizer)


def test_solver_is_deterministic():
    a = solve_convex(Rectangle(1, 1), 1.3, FAST)
    b = solve_convex(Rectangle(1, 1), 1.3, FAST)
    assert a.value == b.value
    assert np.array_equal(a.minimizer.vertices, b.minimizer.vertices)


@pytest.mark.parametrize("t", [0.5, 2.0])
def test_scaling_law(t):
    q = 1.5
    base = solve_convex(Rectangle(1, 1), q, FAST).value
    scaled = solve_convex(Rectangle(t, t), q, FAST).value
    assert scaled == pytest.approx(t ** (1 - 2 / q) * base, rel=1e-2)


@pytest.mark.parametrize("shift", [(5.0, -3.0), (-0.25, 12.0)])
def test_translation_invariance_within_tolerance(shift):
    quad = np.array([(0, 0), (2, 0), (1.5, 1), (0.2, 1.2)], dtype=float)
    a = solve_convex(PolygonShape(tuple(map(tuple, quad))), 1.3, FAST).value
    b = solve_convex(PolygonShape(tuple(map(tuple, quad + shift))), 1.3, FAST).value
    assert abs(a - b) <= FAST.tol_rel * a


def test_rotation_invariance():
    q = 1.2
    hexagon = geo.regular_polygon(6, 1.0)
    a = solve_convex(hexagon, q, FAST).value
    moved = geo.regular_polygon(6, 1.0, center=(5.0, -3.0), phase=0.7)
    assert solve_convex(moved, q, FAST).value == pytest.approx(a, rel=1e-2)


def test_monotone_under_inclusion():
    q = 1.5
    small = solve_convex(Rectangle(1, 1), q, FAST).value
    big = solve_convex(Rectangle(2, 1), q, FAST).value
    assert big <= small * (1 + 1e-3)


def test_estimate_dispatch_for_disks_is_exact():
    est = estimate(Disk(2.0, (1.0, 1.0)), 1.5)
    assert est.value == pytest.approx(hq_ball(1.5, 2.0), rel=1e-14)
    assert est.lower_bound <= est.value
    assert est.method == "analytic"


def test_q_out_of_range():
    with pytest.raises(ExponentError):
        estimate(Rectangle(1, 1), 2.0)


def test_joint_scaling_min_two_disks():
    r = 0.1
    value, corner = joint_scaling_min([2 * math.pi * r, 2 * math.pi], [math.pi * r * r, math.pi], 0.5)
    assert value == pytest.approx(two_ball_h(r, 1.0, 0.5).value, rel=1e-12)
    assert corner.tolist() == [0.0, 1.0]


@given(st.lists(st.tuples(st.floats(0.5, 20), st.floats(0.05, 5)), min_size=2, max_size=3), st.floats(0.2, 0.95))
@settings(max_examples=40)
def test_joint_scaling_min_matches_dense_grid(parts, q):
    # isoperimetric-compatible pieces: P^2 >= 4 pi A
    P = [max(p, math.sqrt(4 * math.pi * a)) for p, a in parts]
    A = [a for _, a in parts]
    value, _ = joint_scaling_min(P, A, q)
    g = np.linspace(0.0, 1.0, 41)
    mesh = np.stack(np.meshgrid(*[g] * len(P), indexing="ij"), -1).reshape(-1, len(P))[1:]
    brute = np.min(mesh @ np.array(P) / (mesh**2 @ np.array(A)) ** (1 / q))
    assert value <= brute * (1 + 1e-12)
    assert value == pytest.approx(brute, rel=1e-12)


def test_union_q_ge_1_takes_member_minimum():
    U = UnionShape((Disk(1.0), Disk(0.5, (3.0, 0.0)), Disk(2.0, (8.0, 0.0))))
    for q in (1.0, 1.5):
        est = estimate(U, q)
        assert est.value == pytest.approx(min(hq_ball(q, R) for R in (1.0, 0.5, 2.0)), rel=1e-14)


def test_union_with_polygon_member_small_q():
    U = UnionShape((Rectangle(1, 1), Disk(1.0, (4.0, 0.5))))
    est = estimate(U, 0.5, FAST)
    parts = est.metadata["member_values"]
    assert est.value <= min(parts) * (1 + 1e-12)
    assert est.method == "grid"


def test_rounded_rectangle_measures():
    a, p = rounded_rectangle_measures(4.0, 1.0, 1.0)
    # stadium with r = 1, straight part 2
    assert a == pytest.approx(stadium_ratio(1, 2, 1.0) ** 0 * (math.pi + 4.0))
    assert p == pytest.approx(2 * math.pi + 4.0)


def test_strip_proxy_has_finite_length():
    v, L, t = strip_proxy(1.0, 1.5)
    assert 0 < L < 100
    assert 0 < t <= 1.0
    a, p = rounded_rectangle_measures(L, 1.0, t)
    assert v == pytest.approx(p / a ** (1 / 1.5))
    with pytest.raises(PreconditionError):
        strip_proxy(1.0, 1.0)


def test_halfstrip_truncations_settle():
    est = solve_halfstrip(HalfStrip(1.0), 1.5, FAST)
    hist = est.metadata["truncations"]
    assert len(hist) >= 2
    (_, a), (_, b) = hist[-2], hist[-1]
    assert abs(a - b) <= 1e-3 * a
    # the proxy polygon is a candidate; its 64-point arcs cost about 3e-4
    assert est.value <= strip_proxy(1.0, 1.5)[0] * (1 + 1e-3)


def test_unbounded_small_q_is_zero_and_q1_is_refused():
    assert estimate(HalfStrip(1.0), 0.5).value == 0.0
    assert estimate(Epigraph(1.0), 0.7).value == 0.0
    with pytest.raises(PreconditionError):
        estimate(HalfStrip(1.0), 1.0)


def test_existence_reports():
    rep = existence_report(Rectangle(1, 1), 1.5)
    assert rep.exists and rep.ridge.startswith("point (0.5, 0.5)")
    rep = existence_report(Rectangle(3, 1), 1.5)
    assert rep.ridge.startswith("segment")
    assert existence_report(HalfStrip(1.0), 1.5).exists
    assert existence_report(Epigraph(1.0), 1.5).exists is False
    rep = existence_report(HalfStrip(1.0), 0.5)
    assert rep.h_zero and rep.exists is False
    assert existence_report(HalfStrip(1.0), 1.0).exists is None
    with pytest.raises(PreconditionError):
        existence_report(UnionShape((Disk(1.0), Disk(1.0, (3, 0)))), 1.5)


def test_stadium_witness_reaches_eps():
    steps = stadium_witness(1.0, 0.5, 1e-3)
    assert steps[-1].ratio < 1e-3
    assert all(b.ratio < a.ratio for a, b in zip(steps, steps[1:]))
    with pytest.raises(PreconditionError):
        stadium_witness(1.0, 1.5, 1e-3)


@given(st.floats(0.2, 0.9), st.floats(1e-6, 1e-1))
@settings(max_examples=25)
def test_stadium_witness_any_eps(q, eps):
    steps = stadium_witness(1.0, q, eps)
    assert steps[-1].ratio < eps


def test_nonexistence_demo_strictly_decreasing():
    E = Epigraph(1.0)
    steps = nonexistence_demo(E, 1.5, steps=12)
    ratios = [s.ratio for s in steps]
    assert len(ratios) == 12
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] > strip_proxy(1.0, 1.5)[0]
    flat = nonexistence_demo(E, 1.5, steps=3, contraction=1.0)
    assert flat[0].ratio == pytest.approx(flat[-1].ratio, rel=1e-12)
    with pytest.raises(PreconditionError):
        nonexistence_demo(E, 0.5)


def test_nonexistence_demo_containment_failure():
    with pytest.raises(GeometryError):
        nonexistence_demo(Epigraph(1.0), 1.5, steps=2, margin=-10.0)


@pytest.mark.parametrize("family", ["stadium", "ellipse", "rectangle"])
def test_elongation_slopes(family):
    sizes = (100, 1000, 10000)
    low = elongation_demo(family, 0.5, sizes)
    assert low.slope == pytest.approx(-1.0, abs=0.05)
    high = elongation_demo(family, 1.5, sizes)
    assert high.slope == pytest.approx(1 - 1 / 1.5, abs=0.05)
    with pytest.raises(PreconditionError):
        elongation_demo(family, 0.5, (10, 5))


def test_elongation_unknown_family():
    with pytest.raises(PreconditionError):
        elongation_demo("triangle", 0.5, (1, 2))


@pytest.mark.parametrize("shape", [Stadium(1.0, 2.0), Ellipse(2.0, 1.0)])
def test_solver_beats_floor_and_family_on_smooth_shapes(shape):
    est = estimate(shape, 1.5, FAST)
    assert est.lower_bound <= est.value <= est.metadata["family_value"] * (1 + 5e-3)
