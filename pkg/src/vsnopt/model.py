"""Domain types, energy-cost evaluation and plan validation.

All energies are integer nanojoules so that costs compare exactly.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional


class Mode(str, Enum):
    PS = "PS"
    VS = "VS"


@dataclass(frozen=True)
class EnergyParams:
    """Energy constants: PS cost ``e_ps``, per-VS overhead ``e_vs``, VS cap ``max_vs``."""

    e_ps: int
    e_vs: int
    max_vs: int

    def __post_init__(self):
        for name in ("e_ps", "e_vs", "max_vs"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise TypeError(f"{name} must be an integer, got {value!r}")
        if self.e_ps <= 0:
            raise ValueError(f"e_ps must be > 0, got {self.e_ps}")
        if self.e_vs < 0:
            raise ValueError(f"e_vs must be >= 0, got {self.e_vs}")
        if self.max_vs < 1:
            raise ValueError(f"max_vs must be >= 1, got {self.max_vs}")

    def scaled(self, k: int) -> "EnergyParams":
        return EnergyParams(self.e_ps * k, self.e_vs * k, self.max_vs)


# 0.017 mJ per active node, 10% virtualization overhead, four VSs per node.
PAPER_PARAMS = EnergyParams(e_ps=17_000, e_vs=1_700, max_vs=4)


@dataclass(frozen=True)
class SensorNode:
    id: int
    pos: tuple[float, float]
    budget: int
    range: float

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError(f"node {self.id}: budget must be >= 0")
        if not self.range > 0:
            raise ValueError(f"node {self.id}: range must be > 0")


@dataclass(frozen=True)
class SensingTask:
    id: int
    pos: tuple[float, float]


def covers(node: SensorNode, task: SensingTask) -> bool:
    """True iff the task lies within the node's sensing range (boundary included)."""
    dx = node.pos[0] - task.pos[0]
    dy = node.pos[1] - task.pos[1]
    return math.hypot(dx, dy) <= node.range


@dataclass(frozen=True)
class CoverageMatrix:
    """Binary node-by-task coverage; row order follows ``node_ids``."""

    node_ids: tuple[int, ...]
    task_ids: tuple[int, ...]
    entries: tuple[tuple[bool, ...], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.node_ids), len(self.task_ids)

    def column(self, j: int) -> tuple[bool, ...]:
        return tuple(row[j] for row in self.entries)

    def degree(self, i: int) -> int:
        return sum(self.entries[i])


@dataclass(frozen=True)
class Scenario:
    area: tuple[float, float]
    nodes: tuple[SensorNode, ...]
    tasks: tuple[SensingTask, ...]
    params: EnergyParams
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        w, h = self.area
        if w < 0 or h < 0:
            raise ValueError(f"area must be non-negative, got {self.area}")
        for kind, items in (("node", self.nodes), ("task", self.tasks)):
            seen = set()
            for item in items:
                if item.id in seen:
                    raise ValueError(f"duplicate {kind} id {item.id}")
                seen.add(item.id)
                x, y = item.pos
                if not (0 <= x <= w and 0 <= y <= h):
                    raise ValueError(f"{kind} {item.id} at {item.pos} lies outside area {self.area}")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def node(self, node_id: int) -> SensorNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise UnknownIdError(f"unknown node id {node_id}")

    def task(self, task_id: int) -> SensingTask:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise UnknownIdError(f"unknown task id {task_id}")


@dataclass(frozen=True)
class Assignment:
    task_id: int
    node_id: int
    mode: Mode


@dataclass(frozen=True)
class AssignmentPlan:
    """Per-task (node, mode) records plus the set of virtualized nodes.

    Construction does not enforce feasibility; use :func:`validate_plan`.
    """

    assignments: tuple[Assignment, ...] = ()
    virtualized: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "assignments", tuple(self.assignments))
        object.__setattr__(self, "virtualized", frozenset(self.virtualized))

    def is_virtualized(self, node_id: int) -> bool:
        return node_id in self.virtualized

    def node_modes(self, scenario: Scenario) -> dict[int, bool]:
        return {n.id: n.id in self.virtualized for n in scenario.nodes}

    def tasks_on(self, node_id: int, mode: Optional[Mode] = None) -> list[int]:
        return [a.task_id for a in self.assignments
                if a.node_id == node_id and (mode is None or a.mode == mode)]


@dataclass(frozen=True)
class CostBreakdown:
    c_ps: int
    c_vs: int
    total: int

    @classmethod
    def of(cls, c_ps: int, c_vs: int) -> "CostBreakdown":
        return cls(c_ps, c_vs, c_ps + c_vs)


ZERO_COST = CostBreakdown(0, 0, 0)


class UnknownIdError(ValueError):
    pass


def _check_ids(plan: AssignmentPlan, scenario: Scenario):
    node_ids = {n.id for n in scenario.nodes}
    task_ids = {t.id for t in scenario.tasks}
    for a in plan.assignments:
        if a.task_id not in task_ids:
            raise UnknownIdError(f"assignment {a}: unknown task id {a.task_id}")
        if a.node_id not in node_ids:
            raise UnknownIdError(f"assignment {a}: unknown node id {a.node_id}")
    for node_id in sorted(plan.virtualized):
        if node_id not in node_ids:
            raise UnknownIdError(f"virtualized set: unknown node id {node_id}")


def plan_cost(plan: AssignmentPlan, scenario: Scenario) -> CostBreakdown:
    """PS cost (one e_ps per PS task) and VS cost (e_ps per virtualized node plus e_vs per VS task)."""
    _check_ids(plan, scenario)
    p = scenario.params
    n_ps = sum(1 for a in plan.assignments if a.mode == Mode.PS)
    n_vs = len(plan.assignments) - n_ps
    return CostBreakdown.of(n_ps * p.e_ps, len(plan.virtualized) * p.e_ps + n_vs * p.e_vs)


def node_energy_use(plan: AssignmentPlan, node_id: int, scenario: Scenario) -> int:
    """Energy drawn from one node's own budget under ``plan``."""
    scenario.node(node_id)
    p = scenario.params
    n_ps = n_vs = 0
    for a in plan.assignments:
        if a.node_id == node_id:
            if a.mode == Mode.PS:
                n_ps += 1
            else:
                n_vs += 1
    base = p.e_ps if node_id in plan.virtualized else 0
    return base + n_ps * p.e_ps + n_vs * p.e_vs


@dataclass(frozen=True)
class Violation:
    constraint: str  # "eq4".."eq7", or "ref" for dangling ids
    message: str
    node: Optional[int] = None
    task: Optional[int] = None
    observed: Optional[int] = None
    allowed: Optional[int] = None

    def __str__(self):
        where = []
        if self.task is not None:
            where.append(f"task {self.task}")
        if self.node is not None:
            where.append(f"node {self.node}")
        qty = ""
        if self.observed is not None:
            qty = f" ({self.observed} > {self.allowed})" if self.allowed is not None else f" ({self.observed})"
        return f"{self.constraint} [{', '.join(where)}]: {self.message}{qty}"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def by_constraint(self, name: str) -> list[Violation]:
        return [v for v in self.violations if v.constraint == name]


def validate_plan(plan: AssignmentPlan, scenario: Scenario) -> ValidationResult:
    """Check a plan against assignment, mode, capacity and per-node energy constraints.

    Violations are returned as data, never raised.
    """
    violations: list[Violation] = []
    warnings: list[str] = []
    nodes = {n.id: n for n in scenario.nodes}
    tasks = {t.id: t for t in scenario.tasks}
    p = scenario.params

    for node_id in sorted(plan.virtualized):
        if node_id not in nodes:
            violations.append(Violation("ref", "virtualized node is not in the scenario", node=node_id))

    counts: Counter[int] = Counter()
    ps_on: Counter[int] = Counter()
    vs_on: Counter[int] = Counter()
    for a in plan.assignments:
        if a.task_id not in tasks:
            violations.append(Violation("ref", "assignment references unknown task", task=a.task_id, node=a.node_id))
            continue
        if a.node_id not in nodes:
            violations.append(Violation("ref", "assignment references unknown node", task=a.task_id, node=a.node_id))
            continue
        counts[a.task_id] += 1
        if not covers(nodes[a.node_id], tasks[a.task_id]):
            violations.append(Violation("eq4", "task assigned to a node that does not cover it",
                                        task=a.task_id, node=a.node_id))
        if a.mode == Mode.PS:
            ps_on[a.node_id] += 1
        else:
            vs_on[a.node_id] += 1

    for t in scenario.tasks:
        n = counts[t.id]
        if n != 1:
            msg = "task is unassigned" if n == 0 else "task is assigned more than once"
            violations.append(Violation("eq4", msg, task=t.id, observed=n, allowed=1))

    for node in scenario.nodes:
        i = node.id
        virt = i in plan.virtualized
        if virt:
            if ps_on[i]:
                violations.append(Violation("eq5", "virtualized node hosts PS tasks",
                                            node=i, observed=ps_on[i], allowed=0))
            if vs_on[i] > p.max_vs:
                violations.append(Violation("eq6", "too many virtual sensors",
                                            node=i, observed=vs_on[i], allowed=p.max_vs))
            if vs_on[i] == 0:
                warnings.append(f"node {i} is virtualized but hosts no VS task")
        else:
            if ps_on[i] > 1:
                violations.append(Violation("eq5", "physical-mode node hosts more than one PS task",
                                            node=i, observed=ps_on[i], allowed=1))
            if vs_on[i]:
                violations.append(Violation("eq5", "non-virtualized node hosts VS tasks",
                                            node=i, observed=vs_on[i], allowed=0))
        use = (p.e_ps if virt else 0) + ps_on[i] * p.e_ps + vs_on[i] * p.e_vs
        if use > node.budget:
            violations.append(Violation("eq7", "energy use exceeds node budget",
                                        node=i, observed=use, allowed=node.budget))

    return ValidationResult(tuple(violations), tuple(warnings))


def make_plan(records: Iterable[tuple[int, int, Mode | str]]) -> AssignmentPlan:
    """Build a plan from (task, node, mode) triples; VS hosts become virtualized."""
    assignments = tuple(Assignment(t, n, Mode(m)) for t, n, m in records)
    virt = frozenset(a.node_id for a in assignments if a.mode == Mode.VS)
    return AssignmentPlan(assignments, virt)
