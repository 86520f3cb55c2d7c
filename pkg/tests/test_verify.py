import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from cheegerq.errors import ExponentError, GeometryError, PreconditionError, SuiteError
from cheegerq.shapes import Disk, Rectangle, UnionShape
from cheegerq.solver import SolverOptions
from cheegerq import verify
from cheegerq.verify import ANCHORS, default_corpus, make_check, random_hexagon, run_suite, svg_chart

FAST = SolverOptions(vertex_count=24, multistarts=4, max_iters=3000)
SMALL = [Disk(1.0), Rectangle(1.0, 1.0), UnionShape((Disk(1.0), Disk(0.1, (3.0, 0.0))))]


@pytest.fixture(scope="module")
def report():
    return run_suite(SMALL, [0.5, 1.5], seed=0, opts=FAST)


def test_small_suite_passes(report):
    assert report.all_passed, [r for r in report.results if not r.passed]
    ids = {r.check_id for r in report.results}
    assert {"floor", "comparison_lower", "comparison_upper", "small_q_upper", "union_min", "ball_formula",
            "two_ball_example", "elongation_slope", "ellipse_perimeter_bound"} <= ids
    assert ids <= set(ANCHORS)


def test_disk_lower_comparison_is_exact(report):
    exact = [r for r in report.results if r.check_id == "comparison_lower_exact"]
    assert exact
    for r in exact:
        assert r.lhs == pytest.approx(r.rhs, rel=1e-10)


def test_report_is_deterministic(report):
    again = run_suite(SMALL, [1.5, 0.5, 1.5], seed=0, opts=FAST)
    assert again.to_json(include_timestamp=False) == report.to_json(include_timestamp=False)


def test_report_outputs(report):
    d = json.loads(report.to_json())
    assert d["summary"]["total"] == len(d["results"])
    assert "timestamp" in d and "timestamp" not in report.to_dict(include_timestamp=False)
    md = report.to_markdown()
    assert md.count("\n| ") == len(report.results) + 1
    for svg in (report.sandwich_svg(), report.elongation_svg()):
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")
        assert len(root.findall("{http://www.w3.org/2000/svg}circle")) > 0


def test_checks_judge_kinds():
    assert make_check("floor", "x", 1.0, 1.0, 2.0, 0.0).passed
    assert not make_check("floor", "x", 1.0, 2.0, 1.0, 0.0).passed
    assert make_check("floor", "x", 1.0, 1.04, 1.0, 0.05).passed
    assert make_check("ball_formula", "x", 1.0, 1.0, 1.0 + 1e-13, 1e-12, "identity").passed
    assert not make_check("ball_formula", "x", 1.0, 1.0, 1.1, 1e-12, "identity").passed
    assert make_check("two_ball_gap", "x", 0.5, 1.0, 2.0, 0.0, "strict").passed
    assert not make_check("two_ball_gap", "x", 0.5, 2.0, 2.0, 0.0, "strict").passed


def test_empty_inputs_raise():
    with pytest.raises(PreconditionError):
        run_suite([], [1.5])
    with pytest.raises(PreconditionError):
        run_suite(SMALL, [])
    with pytest.raises(ExponentError):
        run_suite(SMALL, [2.5])


def test_suite_errors_are_wrapped(monkeypatch):
    def boom(*a, **k):
        raise GeometryError("no")

    monkeypatch.setattr(verify, "estimate", boom)
    with pytest.raises(SuiteError):
        run_suite([Rectangle(1, 1)], [1.5], opts=FAST)


def test_random_hexagon_is_reproducible():
    a = random_hexagon(np.random.default_rng(7))
    b = random_hexagon(np.random.default_rng(7))
    assert a == b and len(a.vertices) == 6


def test_default_corpus_is_fixed():
    c1, c2 = default_corpus(), default_corpus()
    assert c1 == c2
    kinds = [s.kind for s in c1]
    assert {"disk", "rectangle", "polygon", "union", "stadium", "ellipse"} <= set(kinds)


def test_svg_chart_handles_empty_series():
    root = ET.fromstring(svg_chart({}, "t", "x", "y", diagonal=True, lines=False))
    assert root.tag.endswith("svg")
    assert "&lt;" in svg_chart({"a<b": [(1.0, 2.0)]}, "t", "x", "y", diagonal=False, lines=True)
