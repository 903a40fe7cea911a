"""Seeded scenario generation, coverage matrices, and the scenario/plan file formats."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Optional

from .model import (
    PAPER_PARAMS,
    Assignment,
    AssignmentPlan,
    CostBreakdown,
    CoverageMatrix,
    EnergyParams,
    Mode,
    Scenario,
    SensingTask,
    SensorNode,
    covers,
    plan_cost,
)

SCHEMA_VERSION = 1
MASK64 = (1 << 64) - 1
COVERAGE_RETRIES = 1000

DEFAULT_RANGE = 30.0
DEFAULT_BUDGET_NJ = (1_900_000_000, 3_400_000_000)


class SplitMix64:
    """SplitMix64 stream (Steele, Lea & Flood); identical output on every platform."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self, scale: float) -> float:
        # int / int true division is correctly rounded, so this is reproducible
        return self.next_u64() / 2**64 * scale

    def integer(self, lo: int, hi: int) -> int:
        """Integer in the closed interval [lo, hi] by modular reduction."""
        return lo + self.next_u64() % (hi - lo + 1)


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenerationConfig:
    area: tuple[float, float] = (100.0, 100.0)
    n_nodes: int = 10
    n_tasks: int = 8
    range: float = DEFAULT_RANGE
    budget_interval: tuple[int, int] = DEFAULT_BUDGET_NJ
    params: EnergyParams = PAPER_PARAMS
    seed: int = 0
    require_coverage: bool = True

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError(f"n_nodes must be >= 1, got {self.n_nodes}")
        if self.n_tasks < 1:
            raise ValueError(f"n_tasks must be >= 1, got {self.n_tasks}")
        lo, hi = self.budget_interval
        if not (0 <= lo <= hi):
            raise ValueError(f"budget interval must satisfy 0 <= lo <= hi, got {self.budget_interval}")
        if not self.range > 0:
            raise ValueError(f"range must be > 0, got {self.range}")
        if self.area[0] <= 0 or self.area[1] <= 0:
            raise ValueError(f"area must be positive, got {self.area}")
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def with_seed(self, seed: int) -> "GenerationConfig":
        return replace(self, seed=seed)


# Table I evaluation scenarios
PRESETS: dict[str, GenerationConfig] = {
    "s1": GenerationConfig(area=(100.0, 100.0), n_nodes=10, n_tasks=8),
    "s2": GenerationConfig(area=(150.0, 150.0), n_nodes=15, n_tasks=12),
    "s3": GenerationConfig(area=(200.0, 200.0), n_nodes=20, n_tasks=16),
}


def generate(config: GenerationConfig) -> Scenario:
    """Draw a scenario: node positions (x then y per node), then budgets, then tasks."""
    rng = SplitMix64(config.seed)
    w, h = config.area
    positions = []
    for _ in range(config.n_nodes):
        x = rng.uniform(w)
        y = rng.uniform(h)
        positions.append((x, y))
    lo, hi = config.budget_interval
    budgets = [rng.integer(lo, hi) for _ in range(config.n_nodes)]
    nodes = tuple(SensorNode(i, positions[i], budgets[i], config.range) for i in range(config.n_nodes))

    tasks = []
    for j in range(config.n_tasks):
        for _ in range(COVERAGE_RETRIES):
            task = SensingTask(j, (rng.uniform(w), rng.uniform(h)))
            if not config.require_coverage or any(covers(n, task) for n in nodes):
                break
        else:
            raise GenerationError(
                f"task {j}: no covered position found in {COVERAGE_RETRIES} draws (seed {config.seed})")
        tasks.append(task)
    return Scenario(config.area, nodes, tuple(tasks), config.params, config.seed)


def build_coverage(scenario: Scenario) -> CoverageMatrix:
    entries = tuple(tuple(covers(n, t) for t in scenario.tasks) for n in scenario.nodes)
    return CoverageMatrix(
        tuple(n.id for n in scenario.nodes),
        tuple(t.id for t in scenario.tasks),
        entries,
    )


# --- file formats ---------------------------------------------------------


class FormatError(ValueError):
    """Malformed scenario or plan file."""


class SchemaVersionError(FormatError):
    pass


def write_atomic(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "area": {"w": s.area[0], "h": s.area[1]},
        "params": {"e_ps_nj": s.params.e_ps, "e_vs_nj": s.params.e_vs, "max_vs": s.params.max_vs},
        "seed": s.seed,
        "nodes": [{"id": n.id, "x": n.pos[0], "y": n.pos[1], "budget_nj": n.budget, "range": n.range}
                  for n in s.nodes],
        "tasks": [{"id": t.id, "x": t.pos[0], "y": t.pos[1]} for t in s.tasks],
    }


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


def scenario_digest(s: Scenario) -> str:
    return "sha256:" + hashlib.sha256(dumps_scenario(s).encode()).hexdigest()


def save_scenario(scenario: Scenario, path):
    write_atomic(path, dumps_scenario(scenario))


def _parse_json(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{source}: line {e.lineno} column {e.colno}: {e.msg}") from None


def _obj(value, where: str, keys: tuple[str, ...]) -> dict:
    if not isinstance(value, dict):
        raise FormatError(f"{where}: expected an object")
    for k in value:
        if k not in keys:
            raise FormatError(f"{where}: unknown field {k!r}")
    for k in keys:
        if k not in value:
            raise FormatError(f"{where}: missing field {k!r}")
    return value


def _int(value, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise FormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _num(value, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise FormatError(f"{where}: expected a number, got {value!r}")
    return value


def _list(value, where: str) -> list:
    if not isinstance(value, list):
        raise FormatError(f"{where}: expected a list")
    return value


def _version(doc: dict, where: str):
    v = doc.get("schema_version") if isinstance(doc, dict) else None
    if isinstance(doc, dict) and "schema_version" in doc and v != SCHEMA_VERSION:
        raise SchemaVersionError(f"{where}: unsupported schema_version {v!r} (expected {SCHEMA_VERSION})")


def scenario_from_dict(doc: Any, source: str = "scenario") -> Scenario:
    _version(doc, source)
    doc = _obj(doc, source, ("schema_version", "area", "params", "seed", "nodes", "tasks"))
    area = _obj(doc["area"], f"{source}.area", ("w", "h"))
    params = _obj(doc["params"], f"{source}.params", ("e_ps_nj", "e_vs_nj", "max_vs"))
    seed = doc["seed"]
    if seed is not None:
        seed = _int(seed, f"{source}.seed")
    nodes = []
    for k, raw in enumerate(_list(doc["nodes"], f"{source}.nodes")):
        where = f"{source}.nodes[{k}]"
        raw = _obj(raw, where, ("id", "x", "y", "budget_nj", "range"))
        nodes.append((_int(raw["id"], f"{where}.id"),
                      (_num(raw["x"], f"{where}.x"), _num(raw["y"], f"{where}.y")),
                      _int(raw["budget_nj"], f"{where}.budget_nj"),
                      _num(raw["range"], f"{where}.range")))
    tasks = []
    for k, raw in enumerate(_list(doc["tasks"], f"{source}.tasks")):
        where = f"{source}.tasks[{k}]"
        raw = _obj(raw, where, ("id", "x", "y"))
        tasks.append((_int(raw["id"], f"{where}.id"),
                      (_num(raw["x"], f"{where}.x"), _num(raw["y"], f"{where}.y"))))
    try:
        return Scenario(
            (_num(area["w"], f"{source}.area.w"), _num(area["h"], f"{source}.area.h")),
            tuple(SensorNode(*n) for n in nodes),
            tuple(SensingTask(*t) for t in tasks),
            EnergyParams(_int(params["e_ps_nj"], f"{source}.params.e_ps_nj"),
                         _int(params["e_vs_nj"], f"{source}.params.e_vs_nj"),
                         _int(params["max_vs"], f"{source}.params.max_vs")),
            seed,
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(f"{source}: {e}") from None


def load_scenario(path) -> Scenario:
    path = Path(path)
    return scenario_from_dict(_parse_json(path.read_text(encoding="utf-8"), str(path)), str(path))


@dataclass(frozen=True)
class PlanFile:
    plan: AssignmentPlan
    scenario_ref: Optional[str] = None
    cost: Optional[CostBreakdown] = None


def plan_to_dict(plan: AssignmentPlan, scenario_ref: Optional[str], cost: CostBreakdown) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario_ref": scenario_ref,
        "assignments": [{"task": a.task_id, "node": a.node_id, "mode": a.mode.value}
                        for a in plan.assignments],
        "virtualized": sorted(plan.virtualized),
        "cost": {"c_ps_nj": cost.c_ps, "c_vs_nj": cost.c_vs, "total_nj": cost.total},
    }


def dumps_plan(plan: AssignmentPlan, scenario: Scenario) -> str:
    doc = plan_to_dict(plan, scenario_digest(scenario), plan_cost(plan, scenario))
    return json.dumps(doc, indent=2) + "\n"


def save_plan(plan: AssignmentPlan, scenario: Scenario, path):
    write_atomic(path, dumps_plan(plan, scenario))


def plan_from_dict(doc: Any, source: str = "plan") -> PlanFile:
    _version(doc, source)
    doc = _obj(doc, source, ("schema_version", "scenario_ref", "assignments", "virtualized", "cost"))
    ref = doc["scenario_ref"]
    if ref is not None and not isinstance(ref, str):
        raise FormatError(f"{source}.scenario_ref: expected a string or null")
    records = []
    for k, raw in enumerate(_list(doc["assignments"], f"{source}.assignments")):
        where = f"{source}.assignments[{k}]"
        raw = _obj(raw, where, ("task", "node", "mode"))
        if raw["mode"] not in ("PS", "VS"):
            raise FormatError(f"{where}.mode: expected 'PS' or 'VS', got {raw['mode']!r}")
        records.append(Assignment(_int(raw["task"], f"{where}.task"),
                                  _int(raw["node"], f"{where}.node"), Mode(raw["mode"])))
    virt = [_int(v, f"{source}.virtualized[{k}]")
            for k, v in enumerate(_list(doc["virtualized"], f"{source}.virtualized"))]
    cost = _obj(doc["cost"], f"{source}.cost", ("c_ps_nj", "c_vs_nj", "total_nj"))
    breakdown = CostBreakdown(*(_int(cost[k], f"{source}.cost.{k}") for k in ("c_ps_nj", "c_vs_nj", "total_nj")))
    return PlanFile(AssignmentPlan(tuple(records), frozenset(virt)), ref, breakdown)


def load_plan(path) -> PlanFile:
    path = Path(path)
    return plan_from_dict(_parse_json(path.read_text(encoding="utf-8"), str(path)), str(path))
