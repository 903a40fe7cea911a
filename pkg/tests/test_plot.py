import xml.etree.ElementTree as ET

import pytest

from vsnopt.model import AssignmentPlan, make_plan
from vsnopt.plot import InvalidPlanError, render_svg
from vsnopt.scenario import PRESETS, generate
from vsnopt.solver import solve_exact

from instances import scenario

NS = "{http://www.w3.org/2000/svg}"


def elements(svg, cls):
    root = ET.fromstring(svg.encode())
    return [e for e in root.iter() if cls in (e.get("class") or "").split()]


def test_empty_plan():
    s = scenario([(10, 10), (80, 80)], [(15, 10)])
    svg = render_svg(s, AssignmentPlan())
    assert len(elements(svg, "node")) == 2
    assert len(elements(svg, "task")) == 1
    assert elements(svg, "edge") == []


def test_virtualized_host():
    s = scenario([(50, 50)], [(45, 50), (55, 50)])
    svg = render_svg(s, make_plan([(0, 0, "VS"), (1, 0, "VS")]))
    edges = elements(svg, "edge")
    assert len(edges) == 2 and all(e.get("data-node") == "0" for e in edges)
    (node,) = elements(svg, "node")
    assert "virtualized" in node.get("class")


def test_marker_kinds_and_coordinates():
    s = scenario([(0, 0), (100, 100), (50, 50)], [(5, 0), (95, 100)])
    svg = render_svg(s, make_plan([(0, 0, "PS"), (1, 1, "PS")]))
    kinds = {e.get("data-node"): e.get("class") for e in elements(svg, "node")}
    assert kinds == {"0": "node physical", "1": "node physical", "2": "node idle"}
    # meters map linearly onto the viewport with y flipped
    n0 = [e for e in elements(svg, "node") if e.get("data-node") == "0"][0]
    n1 = [e for e in elements(svg, "node") if e.get("data-node") == "1"][0]
    assert float(n0.get("cx")) < float(n1.get("cx"))
    assert float(n0.get("cy")) > float(n1.get("cy"))


def test_range_circles_toggle():
    s = scenario([(10, 10), (80, 80)], [])
    assert len(elements(render_svg(s), "range")) == 2
    assert elements(render_svg(s, range_circles=False), "range") == []


def test_deterministic():
    s = generate(PRESETS["s3"].with_seed(5))
    plan = solve_exact(s).plan
    assert render_svg(s, plan) == render_svg(s, plan)


def test_invalid_plan_refused():
    s = scenario([(50, 50)], [(45, 50), (55, 50)])
    with pytest.raises(InvalidPlanError, match="validate"):
        render_svg(s, make_plan([(0, 0, "PS"), (1, 0, "PS")]))
