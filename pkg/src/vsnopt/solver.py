"""Exact and heuristic solvers for the virtualized task-assignment ILP.

For a fixed virtualization vector the remaining problem is a capacitated
min-cost bipartite assignment, so the exact solver branches only on which
nodes are virtualized and prices every branch with a min-cost flow.
"""

from __future__ import annotations

import itertools
import math
import os
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Optional, Sequence

from .flow import MinCostFlow, hopcroft_karp
from .model import (
    Assignment,
    AssignmentPlan,
    CostBreakdown,
    Mode,
    Scenario,
    covers,
    plan_cost,
    validate_plan,
)

DEFAULT_BRUTE_CAP = 8


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"


class NodeMode(str, Enum):
    VIRTUALIZED = "virtualized"
    PHYSICAL = "physical"
    CLOSED = "closed"


@dataclass
class SolveStats:
    nodes_explored: int = 0
    bound_prunes: int = 0
    flow_calls: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class SolveResult:
    status: Status
    plan: Optional[AssignmentPlan] = None
    cost: Optional[CostBreakdown] = None
    stats: SolveStats = field(default_factory=SolveStats, compare=False)

    @property
    def optimal(self) -> bool:
        return self.status == Status.OPTIMAL


@dataclass(frozen=True)
class NodeCapacity:
    ps_allowed: bool
    vs_capacity: int


def node_capacity(budget: int, e_ps: int, e_vs: int, max_vs: int) -> NodeCapacity:
    """Fold the VS limit and the node's energy budget into a single VS capacity."""
    if budget < e_ps:
        return NodeCapacity(False, 0)
    if e_vs == 0:
        return NodeCapacity(True, max_vs)
    return NodeCapacity(True, min(max_vs, (budget - e_ps) // e_vs))


def node_capacities(scenario: Scenario) -> list[NodeCapacity]:
    p = scenario.params
    return [node_capacity(n.budget, p.e_ps, p.e_vs, p.max_vs) for n in scenario.nodes]


def _infeasible(stats: SolveStats) -> SolveResult:
    return SolveResult(Status.INFEASIBLE, None, None, stats)


def _optimal(plan: AssignmentPlan, scenario: Scenario, stats: SolveStats) -> SolveResult:
    return SolveResult(Status.OPTIMAL, plan, plan_cost(plan, scenario), stats)


# --- brute force oracle ---------------------------------------------------


class ProblemTooLarge(ValueError):
    pass


def brute_force_cap() -> int:
    raw = os.environ.get("VSNOPT_BRUTE_CAP")
    return int(raw) if raw else DEFAULT_BRUTE_CAP


def brute_force(scenario: Scenario, cap: Optional[int] = None) -> SolveResult:
    """Enumerate every (node, mode) choice per task and keep the cheapest valid plan.

    Choices with a non-covering node are skipped since they can never be valid.
    Among equal-cost plans the lexicographically first choice vector wins.
    """
    cap = brute_force_cap() if cap is None else cap
    n_tasks = len(scenario.tasks)
    if n_tasks > cap:
        raise ProblemTooLarge(
            f"brute force refused: {n_tasks} tasks x {len(scenario.nodes)} nodes exceeds the cap of {cap} tasks")
    start = time.perf_counter()
    stats = SolveStats()
    p = scenario.params
    nodes = sorted(scenario.nodes, key=lambda n: n.id)
    choices = [
        [(n.id, m) for n in nodes if covers(n, t) for m in (Mode.PS, Mode.VS)]
        for t in scenario.tasks
    ]
    best_cost = None
    best_plan = None
    for combo in itertools.product(*choices):
        stats.nodes_explored += 1
        n_ps = sum(1 for _, m in combo if m == Mode.PS)
        vs_nodes = {i for i, m in combo if m == Mode.VS}
        cost = (n_ps + len(vs_nodes)) * p.e_ps + (n_tasks - n_ps) * p.e_vs
        if best_cost is not None and cost >= best_cost:
            continue
        plan = AssignmentPlan(
            tuple(Assignment(t.id, i, m) for t, (i, m) in zip(scenario.tasks, combo)),
            frozenset(vs_nodes),
        )
        if validate_plan(plan, scenario).ok:
            best_cost, best_plan = cost, plan
    stats.wall_time = time.perf_counter() - start
    if best_plan is None:
        return _infeasible(stats)
    return _optimal(best_plan, scenario, stats)


# --- assignment subproblem ------------------------------------------------

_UNDECIDED = "undecided"


@dataclass(frozen=True)
class SubproblemResult:
    feasible: bool
    vs_count: int
    ps_count: int
    task_routing: dict[int, tuple[int, Mode]]
    max_flow: int = 0


class _Instance:
    """Index-based view of a scenario shared by the flow-pricing routines."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.params = scenario.params
        self.nodes = scenario.nodes
        self.tasks = scenario.tasks
        self.caps = node_capacities(scenario)
        self.cover = [[covers(n, t) for t in scenario.tasks] for n in scenario.nodes]
        # common denominator for amortized fixed charges
        self.scale = math.lcm(*(c.vs_capacity for c in self.caps if c.vs_capacity > 0)) if any(
            c.vs_capacity > 0 for c in self.caps) else 1

    def price(self, modes: Sequence[str], stats: Optional[SolveStats] = None):
        """Min-cost flow for per-node modes (NodeMode values or undecided).

        Undecided nodes get a PS arc and a VS arc whose cost carries the node's
        fixed charge spread over its VS capacity; all arc costs are multiplied
        by ``self.scale`` to stay integral. Returns (flow, scaled cost, routing).
        """
        if stats is not None:
            stats.flow_calls += 1
        p = self.params
        L = self.scale
        n_t, n_n = len(self.tasks), len(self.nodes)
        src, sink = 0, 1 + n_t + 2 * n_n
        g = MinCostFlow(sink + 1)
        for j in range(n_t):
            g.add_edge(src, 1 + j, 1, 0)
        slot_arcs = []
        for i, mode in enumerate(modes):
            cap = self.caps[i]
            ps_v, vs_v = 1 + n_t + 2 * i, 2 + n_t + 2 * i
            ps_open = cap.ps_allowed and mode in (NodeMode.PHYSICAL, _UNDECIDED)
            vs_open = cap.vs_capacity > 0 and mode in (NodeMode.VIRTUALIZED, _UNDECIDED)
            if ps_open:
                g.add_edge(ps_v, sink, 1, 0)
            if vs_open:
                g.add_edge(vs_v, sink, cap.vs_capacity, 0)
                vs_cost = p.e_vs * L
                if mode == _UNDECIDED:
                    vs_cost += p.e_ps * (L // cap.vs_capacity)
            for j in range(n_t):
                if not self.cover[i][j]:
                    continue
                if ps_open:
                    slot_arcs.append((j, i, Mode.PS, g.add_edge(1 + j, ps_v, 1, p.e_ps * L)))
                if vs_open:
                    slot_arcs.append((j, i, Mode.VS, g.add_edge(1 + j, vs_v, 1, vs_cost)))
        flow, cost = g.solve(src, sink, n_t)
        routing = {}
        for j, i, mode, ref in slot_arcs:
            if g.flow_on(ref):
                routing[j] = (i, mode)
        return flow, cost, routing


def _normalize_modes(scenario: Scenario, y_fixed) -> list[NodeMode]:
    if isinstance(y_fixed, Mapping):
        return [NodeMode(y_fixed[n.id]) for n in scenario.nodes]
    modes = [NodeMode(m) for m in y_fixed]
    if len(modes) != len(scenario.nodes):
        raise ValueError(f"expected {len(scenario.nodes)} node modes, got {len(modes)}")
    return modes


def assignment_subproblem(scenario: Scenario, y_fixed) -> SubproblemResult:
    """Route tasks for a fixed per-node mode vector (mapping by node id, or a sequence in node order)."""
    inst = _Instance(scenario)
    inst.scale = 1
    modes = _normalize_modes(scenario, y_fixed)
    flow, _, routing = inst.price(modes)
    vs = sum(1 for _, m in routing.values() if m == Mode.VS)
    task_routing = {scenario.tasks[j].id: (scenario.nodes[i].id, m) for j, (i, m) in sorted(routing.items())}
    return SubproblemResult(flow == len(scenario.tasks), vs, len(routing) - vs, task_routing, flow)


def lower_bound(scenario: Scenario, partial: Mapping[int, bool]) -> Optional[int]:
    """Admissible bound on the best completion of a partial virtualization vector.

    ``partial`` maps node id to True (virtualized) or False (not virtualized);
    absent nodes are undecided. Returns None when no completion is feasible.
    """
    inst = _Instance(scenario)
    modes = [_UNDECIDED if n.id not in partial else
             (NodeMode.VIRTUALIZED if partial[n.id] else NodeMode.PHYSICAL) for n in scenario.nodes]
    return _bound(inst, modes)[0]


def _bound(inst: _Instance, modes, stats=None):
    flow, cost, routing = inst.price(modes, stats)
    if flow < len(inst.tasks):
        return None, routing
    fixed = sum(1 for m in modes if m == NodeMode.VIRTUALIZED) * inst.params.e_ps
    return fixed + -(-cost // inst.scale), routing


# --- greedy warm start ----------------------------------------------------


def greedy_upper_bound(scenario: Scenario) -> SolveResult:
    """Virtualize the densest nodes first, then place leftovers at the cheapest option."""
    start = time.perf_counter()
    stats = SolveStats()
    p = scenario.params
    caps = node_capacities(scenario)
    nodes, tasks = scenario.nodes, scenario.tasks
    cover = [[covers(n, t) for t in tasks] for n in nodes]
    unassigned = list(range(len(tasks)))
    vs_load: dict[int, list[int]] = {}
    ps_used: dict[int, int] = {}

    while True:
        best, best_count = None, 1
        for i in sorted(range(len(nodes)), key=lambda i: nodes[i].id):
            if i in vs_load or caps[i].vs_capacity < 2:
                continue
            count = min(caps[i].vs_capacity, sum(1 for j in unassigned if cover[i][j]))
            if count > best_count:
                best, best_count = i, count
        if best is None:
            break
        packed = [j for j in unassigned if cover[best][j]][:best_count]
        vs_load[best] = packed
        unassigned = [j for j in unassigned if j not in packed]

    for j in unassigned:
        options = []
        for i in range(len(nodes)):
            if not cover[i][j]:
                continue
            if i in vs_load:
                if len(vs_load[i]) < caps[i].vs_capacity:
                    options.append((p.e_vs, nodes[i].id, i, Mode.VS))
            elif i not in ps_used and caps[i].ps_allowed:
                # opening a fresh VS host for one task always loses to PS on that node
                options.append((p.e_ps, nodes[i].id, i, Mode.PS))
        if not options:
            stats.wall_time = time.perf_counter() - start
            return _infeasible(stats)
        _, _, i, mode = min(options, key=lambda o: (o[0], o[1]))
        if mode == Mode.PS:
            ps_used[i] = j
        else:
            vs_load[i].append(j)

    records = [Assignment(tasks[j].id, nodes[i].id, Mode.PS) for i, j in ps_used.items()]
    records += [Assignment(tasks[j].id, nodes[i].id, Mode.VS) for i, js in vs_load.items() for j in js]
    records.sort(key=lambda a: a.task_id)
    plan = AssignmentPlan(tuple(records), frozenset(nodes[i].id for i in vs_load))
    stats.wall_time = time.perf_counter() - start
    return _optimal(plan, scenario, stats)


# --- exact branch-and-bound -----------------------------------------------

TraceFn = Callable[[Scenario, dict, Optional[int]], None]


def _components(scenario: Scenario) -> list[Scenario]:
    """Split into independent sub-instances along the coverage graph."""
    nodes, tasks = scenario.nodes, scenario.tasks
    caps = node_capacities(scenario)
    parent = list(range(len(nodes) + len(tasks)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    usable = [c.ps_allowed or c.vs_capacity > 0 for c in caps]
    for i, n in enumerate(nodes):
        if not usable[i]:
            continue
        for j, t in enumerate(tasks):
            if covers(n, t):
                parent[find(i)] = find(len(nodes) + j)
    groups: dict[int, tuple[list, list]] = {}
    for j, t in enumerate(tasks):
        groups.setdefault(find(len(nodes) + j), ([], []))[1].append(t)
    for i, n in enumerate(nodes):
        root = find(i)
        if usable[i] and root in groups:
            groups[root][0].append(n)
    return [Scenario(scenario.area, tuple(ns), tuple(ts), scenario.params, scenario.seed)
            for ns, ts in groups.values()]


def _solve_component(sub: Scenario, stats: SolveStats, trace: Optional[TraceFn]) -> Optional[AssignmentPlan]:
    inst = _Instance(sub)
    n_nodes = len(sub.nodes)
    degree = [sum(row) for row in inst.cover]
    modes: list = [_UNDECIDED] * n_nodes
    branch = []
    for i in range(n_nodes):
        # virtualizing for fewer than two tasks never beats PS on the same node
        if inst.caps[i].vs_capacity < 2 or degree[i] < 2:
            modes[i] = NodeMode.PHYSICAL
        else:
            branch.append(i)
    branch.sort(key=lambda i: (-degree[i], sub.nodes[i].id))

    warm = greedy_upper_bound(sub)
    best_cost = warm.cost.total if warm.optimal else None
    best_plan = warm.plan if warm.optimal else None

    def visit(depth: int):
        nonlocal best_cost, best_plan
        stats.nodes_explored += 1
        bound, routing = _bound(inst, modes, stats)
        if trace is not None:
            trace(sub, {sub.nodes[i].id: modes[i] == NodeMode.VIRTUALIZED
                        for i in range(n_nodes) if modes[i] != _UNDECIDED}, bound)
        if bound is None:
            return
        if best_cost is not None and bound >= best_cost:
            stats.bound_prunes += 1
            return
        if all(modes[i] != _UNDECIDED or m == Mode.PS for i, m in routing.values()):
            # the relaxation routed nothing through an undecided VS arc, so
            # closing every undecided node realizes the bound exactly
            records = sorted((Assignment(sub.tasks[j].id, sub.nodes[i].id, m) for j, (i, m) in routing.items()),
                             key=lambda a: a.task_id)
            virt = frozenset(sub.nodes[i].id for i in range(n_nodes) if modes[i] == NodeMode.VIRTUALIZED)
            best_plan = AssignmentPlan(tuple(records), virt)
            best_cost = bound
            return
        i = branch[depth]
        modes[i] = NodeMode.VIRTUALIZED
        visit(depth + 1)
        modes[i] = NodeMode.PHYSICAL
        visit(depth + 1)
        modes[i] = _UNDECIDED

    visit(0)
    return best_plan


def solve_exact(scenario: Scenario, trace: Optional[TraceFn] = None) -> SolveResult:
    """Provably optimal plan by branch-and-bound over node virtualization.

    ``trace`` is called as ``trace(component, partial, bound)`` for every
    explored search node.
    """
    start = time.perf_counter()
    stats = SolveStats()
    plans = []
    for sub in _components(scenario):
        if not sub.nodes:
            stats.wall_time = time.perf_counter() - start
            return _infeasible(stats)
        plan = _solve_component(sub, stats, trace)
        if plan is None:
            stats.wall_time = time.perf_counter() - start
            return _infeasible(stats)
        plans.append(plan)
    records = sorted((a for pl in plans for a in pl.assignments), key=lambda a: a.task_id)
    plan = AssignmentPlan(tuple(records), frozenset().union(*(pl.virtualized for pl in plans)))
    stats.wall_time = time.perf_counter() - start
    return _optimal(plan, scenario, stats)


# --- traditional baseline -------------------------------------------------


def solve_traditional(scenario: Scenario) -> SolveResult:
    """One task per physical sensor, no virtualization: a perfect bipartite matching or nothing."""
    start = time.perf_counter()
    stats = SolveStats()
    caps = node_capacities(scenario)
    adj = [[i for i, n in enumerate(scenario.nodes) if caps[i].ps_allowed and covers(n, t)]
           for t in scenario.tasks]
    match = hopcroft_karp(adj, len(scenario.nodes))
    stats.wall_time = time.perf_counter() - start
    if any(m is None for m in match):
        return _infeasible(stats)
    plan = AssignmentPlan(
        tuple(Assignment(t.id, scenario.nodes[i].id, Mode.PS) for t, i in zip(scenario.tasks, match)),
        frozenset(),
    )
    return _optimal(plan, scenario, stats)
