"""Inequality suite over a corpus of planar shapes.

Each check compares a left-hand side with a right-hand side. One-sided checks
pass when ``lhs <= rhs * (1 + margin)``, identities when
``|lhs - rhs| <= margin * max(|lhs|, |rhs|)`` and strict checks when
``lhs < rhs``. Failures are recorded, never raised.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import geometry as geo
from .closed_forms import Exponent, combine_disjoint, decompose_ratio, hq_ball, lambda_upper_proxy_two_balls, two_ball_h
from .constants import A_const, B_partial, comparison_constants, isoperimetric_constant
from .errors import CheegerError, PreconditionError, SuiteError
from .shapes import Disk, Ellipse, PolygonShape, Rectangle, ShapeSpec, Stadium, UnionShape, summary
from .solver import CheegerEstimate, SolverOptions, elongation_demo, estimate

SOLVER_MARGIN = 0.05
EXACT_MARGIN = 1e-9
FAMILY_MARGIN = 1e-3
DEFAULT_QS = (0.5, 1.0, 1.2, 1.5, 1.8)
ELONGATION_SIZES = (100.0, 1000.0, 10000.0)
CORPUS_SEED = 20240601

ANCHORS = {
    "floor": "planar isoperimetric inequality P^2 >= 4 pi A applied to subsets of Omega",
    "minimizer_ratio": "reported value is the ratio of the reported minimizer",
    "minimizer_contained": "admissible sets lie inside Omega",
    "decomposition": "P/A^(1/q) = (P/A)^(2/q-1) (P/A^(1/2))^(2-2/q)",
    "family_dominates": "free polygon search does at least as well as the rounded-corner family",
    "comparison_lower": "lower comparison h_q >= (2 sqrt(pi))^(2-2/q) h_1^(2/q-1), q > 1",
    "comparison_lower_exact": "lower comparison is an equality on disks",
    "comparison_upper": "upper comparison h_q <= 3 * 2^N * C_moser h_1^(2/q-1), q > 1",
    "small_q_upper": "for q < 1, h_q <= (2 sqrt(pi))^(2-2/q) h_1^(2/q-1)",
    "union_min": "for q >= 1 the constant of a disjoint union is the smallest member constant",
    "lambda_proxy_below": "for q < 1 the Poincare-constant combination of the members stays below h_q of the union",
    "ball_formula": "h_q of a disk of radius R is 2 pi^(1-1/q) R^(1-2/q)",
    "ball_scaling": "h_q(t Omega) = t^(1-2/q) h_q(Omega)",
    "two_ball_example": "two disks r=0.1, R=1, q=1/2: h_q = 2/pi, only the big disk is kept",
    "two_ball_gap": "two disks r=0.1, R=1, q=1/2: the Poincare constant is strictly below h_q",
    "elongation_slope": "elongated sets decay like L^(1-1/q) for q < 1",
    "elongation_monotone": "elongated ratios decrease for q < 1 and increase for q > 1",
    "ellipse_perimeter_bound": "perimeter of the ellipse with semi-axes (L, 1) is at most 2 pi L",
    "moser_A_unity": "the A factor of the local bound equals 1 at p = 1",
    "moser_B_closed_form": "the B factor at N = 2, p = q = 1 equals 2^6 = 64",
}


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    shape: str
    q: Optional[float]
    lhs: float
    rhs: float
    margin: float
    passed: bool
    kind: str  # "upper", "identity" or "strict"
    anchor: str


def _judge(kind: str, lhs: float, rhs: float, margin: float) -> bool:
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        return False
    if kind == "upper":
        return lhs <= rhs * (1.0 + margin) if rhs >= 0 else lhs <= rhs * (1.0 - margin)
    if kind == "identity":
        return abs(lhs - rhs) <= margin * max(abs(lhs), abs(rhs))
    if kind == "strict":
        return lhs < rhs
    raise ValueError(kind)


def make_check(check_id: str, shape: str, q, lhs: float, rhs: float, margin: float, kind: str = "upper") -> CheckResult:
    lhs, rhs = float(lhs), float(rhs)
    return CheckResult(check_id, shape, None if q is None else float(q), lhs, rhs, margin,
                       _judge(kind, lhs, rhs, margin), kind, ANCHORS[check_id])


@dataclass
class Report:
    results: list
    corpus: list
    qs: list
    seed: int
    timestamp: str
    summary: dict = field(default_factory=dict)
    sandwich_points: list = field(default_factory=list)  # (shape, q, C_lower h1^s, h_q, C_upper h1^s)
    elongation: list = field(default_factory=list)  # (family, q, [(size, ratio)], slope)

    def __post_init__(self):
        if not self.summary:
            passed = sum(r.passed for r in self.results)
            self.summary = {"total": len(self.results), "passed": passed, "failed": len(self.results) - passed}

    @property
    def all_passed(self) -> bool:
        return self.summary["failed"] == 0

    def to_dict(self, include_timestamp: bool = True) -> dict:
        d = {
            "corpus": self.corpus,
            "qs": self.qs,
            "seed": self.seed,
            "summary": self.summary,
            "results": [asdict(r) for r in self.results],
            "sandwich_points": self.sandwich_points,
            "elongation": self.elongation,
        }
        if include_timestamp:
            d["timestamp"] = self.timestamp
        return d

    def to_json(self, include_timestamp: bool = True) -> str:
        return json.dumps(self.to_dict(include_timestamp), indent=2, sort_keys=True) + "\n"

    def to_markdown(self) -> str:
        s = self.summary
        lines = [
            "# Inequality suite",
            "",
            f"seed {self.seed}, {s['total']} checks, {s['passed']} passed, {s['failed']} failed",
            "",
            "| check | shape | q | lhs | rhs | kind | margin | result |",
            "|---|---|---|---|---|---|---|---|",
        ]
        for r in self.results:
            q = "" if r.q is None else f"{r.q:g}"
            lines.append(
                f"| {r.check_id} | {r.shape} | {q} | {r.lhs:.10g} | {r.rhs:.10g} | {r.kind} | {r.margin:g} | "
                f"{'pass' if r.passed else 'FAIL'} |"
            )
        return "\n".join(lines) + "\n"

    def sandwich_svg(self) -> str:
        series = {}
        for shape, q, lo, hq, _ in self.sandwich_points:
            series.setdefault(f"q={q:g}", []).append((lo, hq))
        return svg_chart(series, "h_q against its lower comparison bound", "C_lower h_1^(2/q-1)", "h_q estimate",
                         diagonal=True, lines=False)

    def elongation_svg(self) -> str:
        series = {f"{fam} q={q:g} slope {slope:.3f}": pts for fam, q, pts, slope in self.elongation}
        return svg_chart(series, "ratio of elongated sets", "size", "P / A^(1/q)", diagonal=False, lines=True)


# ---------------------------------------------------------------------------
# SVG


PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def svg_chart(series: dict, title: str, xlabel: str, ylabel: str, diagonal: bool, lines: bool,
              width: int = 640, height: int = 480) -> str:
    """Self-contained log-log chart."""
    pts = [p for s in series.values() for p in s if p[0] > 0 and p[1] > 0]
    if not pts:
        pts = [(1.0, 1.0)]
    lx = [math.log10(p[0]) for p in pts]
    ly = [math.log10(p[1]) for p in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    if diagonal:
        x0 = y0 = min(x0, y0)
        x1 = y1 = max(x1, y1)
    pad = 0.05 * max(x1 - x0, y1 - y0, 0.1)
    x0, x1, y0, y1 = x0 - pad, x1 + pad, y0 - pad, y1 + pad
    left, right, top, bottom = 70, 200, 40, 50
    pw, ph = width - left - right, height - top - bottom

    def X(v):
        return left + (math.log10(v) - x0) / (x1 - x0) * pw

    def Y(v):
        return top + ph - (math.log10(v) - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{_esc(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">{_esc(xlabel)} (log)</text>',
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{_esc(ylabel)} (log)</text>',
    ]
    for k in range(int(math.ceil(x0)), int(math.floor(x1)) + 1):
        x = X(10.0**k)
        out.append(f'<line x1="{x:.1f}" y1="{top + ph}" x2="{x:.1f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{top + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="10">1e{k}</text>')
    for k in range(int(math.ceil(y0)), int(math.floor(y1)) + 1):
        y = Y(10.0**k)
        out.append(f'<line x1="{left - 5}" y1="{y:.1f}" x2="{left}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{y + 3:.1f}" text-anchor="end" font-family="sans-serif" font-size="10">1e{k}</text>')
    if diagonal:
        a, b = 10.0**x0, 10.0**x1
        out.append(f'<line x1="{X(a):.1f}" y1="{Y(a):.1f}" x2="{X(b):.1f}" y2="{Y(b):.1f}" stroke="#999" stroke-dasharray="4 3"/>')
    for i, (name, s) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        good = [p for p in s if p[0] > 0 and p[1] > 0]
        if lines and len(good) > 1:
            path = " ".join(f"{X(p[0]):.1f},{Y(p[1]):.1f}" for p in good)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}"/>')
        for p in good:
            out.append(f'<circle cx="{X(p[0]):.1f}" cy="{Y(p[1]):.1f}" r="3" fill="{color}"/>')
        ly_ = top + 14 + 16 * i
        out.append(f'<circle cx="{width - right + 15}" cy="{ly_ - 4}" r="4" fill="{color}"/>')
        out.append(f'<text x="{width - right + 25}" y="{ly_}" font-family="sans-serif" font-size="11">{_esc(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ---------------------------------------------------------------------------
# corpus


def random_hexagon(rng: np.random.Generator, r_in: float = 0.5, r_out: float = 1.0) -> PolygonShape:
    """Hull of 6 points uniform in an annulus, redrawn until it has 6 vertices and is not a sliver."""
    while True:
        rad = np.sqrt(rng.uniform(r_in**2, r_out**2, 6))
        ang = rng.uniform(0.0, 2.0 * math.pi, 6)
        pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        hull = geo.hull_array(pts)
        if len(hull) != 6:
            continue
        circum = float(np.max(np.hypot(hull[:, 0], hull[:, 1])))
        if geo.inradius(geo.ConvexPolygon(hull)).r < 0.1 * circum:
            continue
        return PolygonShape(tuple(map(tuple, hull.tolist())))


def default_corpus() -> list:
    rng = np.random.default_rng(CORPUS_SEED)
    return [
        Disk(1.0),
        Rectangle(1.0, 1.0),
        Rectangle(3.0, 1.0),
        random_hexagon(rng),
        random_hexagon(rng),
        UnionShape((Disk(1.0), Disk(0.1, (3.0, 0.0)))),
        Stadium(1.0, 2.0),
        Ellipse(2.0, 1.0),
    ]


# ---------------------------------------------------------------------------


def _shape_checks(shape: ShapeSpec, name: str, q: float, est: CheegerEstimate, h1: CheegerEstimate,
                  member_values: Optional[list]) -> list:
    e = Exponent(2, q)
    out = [make_check("floor", name, q, est.lower_bound, est.value, EXACT_MARGIN)]
    if est.minimizer is not None and est.method != "analytic":
        P, A = geo.perimeter(est.minimizer), geo.area(est.minimizer)
        out.append(make_check("minimizer_ratio", name, q, P / A ** (1.0 / q), est.value, 1e-10, "identity"))
        omega = shape.polygon()
        Ah, bh = omega.halfplanes()
        viol = float(np.max(est.minimizer.vertices @ Ah.T - bh))
        out.append(make_check("minimizer_contained", name, q, viol, 1e-9 * geo.diameter(omega), 0.0))
        out.append(make_check("decomposition", name, q, decompose_ratio(P, A, e).product, est.value, EXACT_MARGIN, "identity"))
    if est.method == "polygon_opt":
        out.append(make_check("family_dominates", name, q, est.value, est.metadata["family_value"], FAMILY_MARGIN))
    s = e.comparison_power
    if q > 1:
        cc = comparison_constants(2, q)
        lo = cc.lower * h1.value**s
        up = cc.upper * h1.value**s
        out.append(make_check("comparison_lower", name, q, lo, est.value, SOLVER_MARGIN))
        out.append(make_check("comparison_upper", name, q, est.value, up, 0.0))
        if isinstance(shape, Disk):
            out.append(make_check("comparison_lower_exact", name, q, lo, est.value, 1e-10, "identity"))
    elif q < 1:
        bound = isoperimetric_constant(2) ** (2.0 - 2.0 / q) * h1.value**s
        out.append(make_check("small_q_upper", name, q, est.value, bound, SOLVER_MARGIN))
    if member_values is not None:
        vals = member_values
        if q >= 1:
            out.append(make_check("union_min", name, q, est.value, min(vals), EXACT_MARGIN, "identity"))
        else:
            out.append(make_check("lambda_proxy_below", name, q, combine_disjoint(vals, e), est.value, 0.0))
    return out


def _global_checks(qs: Sequence[float]) -> tuple[list, list]:
    out = []
    for q in qs:
        for R in (0.5, 2.0):
            exact = 2.0 * math.pi ** (1.0 - 1.0 / q) * R ** (1.0 - 2.0 / q)
            out.append(make_check("ball_formula", f"disk(R={R:g})", q, hq_ball(q, R), exact, 1e-12, "identity"))
        out.append(make_check("ball_scaling", "disk(R=1) -> disk(R=3)", q, hq_ball(q, 3.0),
                              3.0 ** (1.0 - 2.0 / q) * hq_ball(q, 1.0), 1e-12, "identity"))
        if q >= 1:
            out.append(make_check("moser_A_unity", "-", q, A_const(2, 1.0, q), 1.0, 1e-15, "identity"))
    tb = two_ball_h(0.1, 1.0, 0.5, force_grid=True)
    out.append(make_check("two_ball_example", "two disks r=0.1 R=1", 0.5, tb.value, 2.0 / math.pi, 1e-6, "identity"))
    out.append(make_check("two_ball_gap", "two disks r=0.1 R=1", 0.5,
                          lambda_upper_proxy_two_balls(0.1, 1.0, 0.5), tb.value * (1.0 - 1e-4), 0.0, "strict"))
    bp = B_partial(2, 1.0, 1.0, 60)
    out.append(make_check("moser_B_closed_form", "N=2", 1.0, bp.lower, 64.0, 1e-10, "identity"))

    elong = []
    for fam in ("stadium", "ellipse"):
        for q in qs:
            if q == 1:
                continue
            res = elongation_demo(fam, q, ELONGATION_SIZES)
            ratios = [row[3] for row in res.rows]
            diffs = np.diff(ratios)
            name = f"{fam} sizes {','.join(f'{s:g}' for s in ELONGATION_SIZES)}"
            if q < 1:
                out.append(make_check("elongation_slope", name, q, res.slope, 1.0 - 1.0 / q, 0.05, "identity"))
                out.append(make_check("elongation_monotone", name, q, float(np.max(diffs)), 0.0, 0.0, "strict"))
            else:
                out.append(make_check("elongation_monotone", name, q, float(-np.min(diffs)), 0.0, 0.0, "strict"))
            if fam == "ellipse":
                for size, p, _, _ in res.rows:
                    out.append(make_check("ellipse_perimeter_bound", f"ellipse(a={size:g},b=1)", q, p,
                                          2.0 * math.pi * size, 0.0))
            elong.append((fam, q, [(row[0], row[3]) for row in res.rows], res.slope))
    return out, elong


def run_suite(corpus: Sequence[ShapeSpec], qs: Sequence[float], seed: int = 0,
              opts: Optional[SolverOptions] = None) -> Report:
    """Run every check on every corpus shape and exponent; deterministic for fixed inputs."""
    corpus = list(corpus)
    qs = sorted(set(float(q) for q in qs))
    if not corpus:
        raise PreconditionError("the corpus is empty")
    if not qs:
        raise PreconditionError("no exponents given")
    for q in qs:
        Exponent(2, q)
    opts = opts or SolverOptions()
    opts = SolverOptions(opts.vertex_count, opts.multistarts, opts.max_iters, opts.tol_rel, seed)

    results = []
    sandwich = []
    try:
        for shape in corpus:
            name = summary(shape)
            cache = {}

            def est(q, shape=shape, cache=cache):
                if q not in cache:
                    cache[q] = estimate(shape, q, opts)
                return cache[q]

            h1 = est(1.0)
            for q in qs:
                res = est(q)
                members = res.metadata["member_values"] if isinstance(shape, UnionShape) else None
                results.extend(_shape_checks(shape, name, q, res, h1, members))
                if q > 1:
                    cc = comparison_constants(2, q)
                    s = Exponent(2, q).comparison_power
                    sandwich.append((name, q, cc.lower * h1.value**s, res.value, cc.upper * h1.value**s))
        glob, elong = _global_checks(qs)
    except CheegerError as exc:
        raise SuiteError(f"suite could not run: {exc}") from exc
    results.extend(glob)
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    corpus_desc = [{"summary": summary(s), "shape": s.to_dict()} for s in corpus]
    return Report(results, corpus_desc, qs, seed, stamp, sandwich_points=sandwich, elongation=elong)
