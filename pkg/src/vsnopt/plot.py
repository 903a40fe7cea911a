"""Deterministic SVG rendering of a scenario and its assignment plan."""

from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

from .model import AssignmentPlan, Mode, Scenario, validate_plan

VIEW = 560.0
MARGIN = 40.0
LEGEND_H = 40.0

COLORS = {
    "virtualized": "#d62728",
    "physical": "#1f77b4",
    "idle": "#7f7f7f",
    "task": "#2ca02c",
    "edge_vs": "#d62728",
    "edge_ps": "#1f77b4",
}


class InvalidPlanError(ValueError):
    pass


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Canvas:
    def __init__(self, area):
        self.w, self.h = area
        self.k = VIEW / max(self.w, self.h, 1e-9)
        self.width = 2 * MARGIN + self.w * self.k
        self.height = 2 * MARGIN + self.h * self.k + LEGEND_H

    def xy(self, pos) -> tuple[str, str]:
        # y grows upwards in meters, downwards in SVG
        return _f(MARGIN + pos[0] * self.k), _f(MARGIN + (self.h - pos[1]) * self.k)


def render_svg(scenario: Scenario, plan: Optional[AssignmentPlan] = None,
               range_circles: bool = True, title: str = "") -> str:
    """Render nodes, tasks, assignment edges and (optionally) sensing ranges.

    A missing or empty plan draws the scenario alone. Any other plan must
    pass validation.
    """
    if plan is not None and (plan.assignments or plan.virtualized):
        if not validate_plan(plan, scenario).ok:
            raise InvalidPlanError("plan is not valid for this scenario; run `vsnopt validate` for details")
    else:
        plan = AssignmentPlan()

    c = _Canvas(scenario.area)
    ps_nodes = {a.node_id for a in plan.assignments if a.mode == Mode.PS}
    nodes = {n.id: n for n in scenario.nodes}
    tasks = {t.id: t for t in scenario.tasks}

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(c.width)}" '
        f'height="{_f(c.height)}" viewBox="0 0 {_f(c.width)} {_f(c.height)}">',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    out.append(f'<rect class="area" x="{_f(MARGIN)}" y="{_f(MARGIN)}" width="{_f(c.w * c.k)}" '
               f'height="{_f(c.h * c.k)}" fill="none" stroke="#000" stroke-width="1"/>')

    if range_circles:
        out.append('<g class="ranges" fill="none" stroke="#bbb" stroke-dasharray="3,3">')
        for n in scenario.nodes:
            x, y = c.xy(n.pos)
            out.append(f'<circle class="range" data-node="{n.id}" cx="{x}" cy="{y}" r="{_f(n.range * c.k)}"/>')
        out.append('</g>')

    out.append('<g class="edges" stroke-width="1.5">')
    for a in plan.assignments:
        (x1, y1), (x2, y2) = c.xy(nodes[a.node_id].pos), c.xy(tasks[a.task_id].pos)
        kind = "vs" if a.mode == Mode.VS else "ps"
        out.append(f'<line class="edge {kind}" data-node="{a.node_id}" data-task="{a.task_id}" '
                   f'x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{COLORS["edge_" + kind]}"/>')
    out.append('</g>')

    out.append('<g class="tasks">')
    for t in scenario.tasks:
        x, y = c.xy(t.pos)
        out.append(f'<path class="task" data-task="{t.id}" transform="translate({x},{y})" '
                   f'd="M0,-5 L4.5,3 L-4.5,3 Z" fill="{COLORS["task"]}"/>')
    out.append('</g>')

    out.append('<g class="nodes">')
    for n in scenario.nodes:
        x, y = c.xy(n.pos)
        if n.id in plan.virtualized:
            out.append(f'<rect class="node virtualized" data-node="{n.id}" x="{_f(float(x) - 5)}" '
                       f'y="{_f(float(y) - 5)}" width="10.00" height="10.00" fill="{COLORS["virtualized"]}"/>')
        elif n.id in ps_nodes:
            out.append(f'<circle class="node physical" data-node="{n.id}" cx="{x}" cy="{y}" r="5.00" '
                       f'fill="{COLORS["physical"]}"/>')
        else:
            out.append(f'<circle class="node idle" data-node="{n.id}" cx="{x}" cy="{y}" r="5.00" '
                       f'fill="#fff" stroke="{COLORS["idle"]}" stroke-width="1.5"/>')
        out.append(f'<text x="{_f(float(x) + 7)}" y="{_f(float(y) - 7)}" font-size="9" '
                   f'font-family="sans-serif">{n.id}</text>')
    out.append('</g>')

    ly = _f(c.height - LEGEND_H / 2)
    legend = [("virtualized node", "virtualized"), ("physical-mode node", "physical"),
              ("idle node", "idle"), ("task", "task")]
    out.append('<g class="legend" font-size="11" font-family="sans-serif">')
    x = MARGIN
    for label, key in legend:
        out.append(f'<circle cx="{_f(x)}" cy="{ly}" r="4.00" fill="{COLORS[key]}"/>')
        out.append(f'<text x="{_f(x + 8)}" y="{_f(float(ly) + 4)}">{escape(label)}</text>')
        x += 130
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"
