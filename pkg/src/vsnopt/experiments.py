"""Virtualized-vs-traditional comparisons and multi-seed sweeps."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import mean
from typing import Mapping, Optional, Sequence

from .model import AssignmentPlan, Mode, Scenario
from .scenario import GenerationConfig, GenerationError, generate
from .solver import solve_exact, solve_traditional

INFEASIBLE = "infeasible"


def count_nodes(plan: AssignmentPlan) -> tuple[int, int]:
    """(virtualized nodes, nodes hosting a PS task); idle nodes count in neither."""
    physical = {a.node_id for a in plan.assignments if a.mode == Mode.PS}
    return len(plan.virtualized), len(physical)


@dataclass(frozen=True)
class ComparisonRecord:
    scenario_id: str
    seed: Optional[int]
    virt_cost_nj: Optional[int]  # None when infeasible
    trad_cost_nj: Optional[int]
    nodes_virtualized: int = 0
    nodes_physical_mode: int = 0
    nodes_used_trad: int = 0
    error: Optional[str] = None

    @property
    def nodes_used_virt(self) -> int:
        return self.nodes_virtualized + self.nodes_physical_mode

    @property
    def savings_fraction(self) -> Optional[Fraction]:
        if self.virt_cost_nj is None or not self.trad_cost_nj:
            return None
        return 1 - Fraction(self.virt_cost_nj, self.trad_cost_nj)

    @property
    def node_ratio(self) -> Optional[Fraction]:
        if self.virt_cost_nj is None or self.trad_cost_nj is None:
            return None
        if not self.nodes_used_virt or not self.nodes_used_trad:
            return None
        return Fraction(self.nodes_used_trad, self.nodes_used_virt)

    @property
    def mixed(self) -> bool:
        """Both virtualized and physical-mode nodes appear in the optimal plan."""
        return self.nodes_virtualized > 0 and self.nodes_physical_mode > 0


def compare(scenario: Scenario, scenario_id: str = "") -> ComparisonRecord:
    virt = solve_exact(scenario)
    trad = solve_traditional(scenario)
    n_virt = n_phys = 0
    if virt.optimal:
        n_virt, n_phys = count_nodes(virt.plan)
    return ComparisonRecord(
        scenario_id=scenario_id,
        seed=scenario.seed,
        virt_cost_nj=virt.cost.total if virt.optimal else None,
        trad_cost_nj=trad.cost.total if trad.optimal else None,
        nodes_virtualized=n_virt,
        nodes_physical_mode=n_phys,
        nodes_used_trad=len({a.node_id for a in trad.plan.assignments}) if trad.optimal else 0,
    )


@dataclass(frozen=True)
class FamilyAggregate:
    records: int
    feasible_pairs: int
    trad_infeasible: int
    virt_infeasible: int
    generation_failures: int
    mixed_records: int
    savings_mean: Optional[Fraction] = None
    savings_min: Optional[Fraction] = None
    savings_max: Optional[Fraction] = None
    ratio_mean: Optional[Fraction] = None
    ratio_min: Optional[Fraction] = None
    ratio_max: Optional[Fraction] = None


def aggregate(records: Sequence[ComparisonRecord]) -> FamilyAggregate:
    ok = [r for r in records if r.error is None]
    savings = [r.savings_fraction for r in ok if r.savings_fraction is not None]
    ratios = [r.node_ratio for r in ok if r.node_ratio is not None]

    def stats(xs):
        return (mean(xs), min(xs), max(xs)) if xs else (None, None, None)

    s_mean, s_min, s_max = stats(savings)
    r_mean, r_min, r_max = stats(ratios)
    return FamilyAggregate(
        records=len(records),
        feasible_pairs=sum(1 for r in ok if r.virt_cost_nj is not None and r.trad_cost_nj is not None),
        trad_infeasible=sum(1 for r in ok if r.trad_cost_nj is None),
        virt_infeasible=sum(1 for r in ok if r.virt_cost_nj is None),
        generation_failures=len(records) - len(ok),
        mixed_records=sum(1 for r in ok if r.mixed),
        savings_mean=s_mean, savings_min=s_min, savings_max=s_max,
        ratio_mean=r_mean, ratio_min=r_min, ratio_max=r_max,
    )


@dataclass(frozen=True)
class SweepReport:
    families: tuple[tuple[str, GenerationConfig], ...]
    seeds: tuple[int, ...]
    records: tuple[ComparisonRecord, ...]
    aggregates: Mapping[str, FamilyAggregate] = field(default_factory=dict)

    def family_records(self, name: str) -> list[ComparisonRecord]:
        return [r for r in self.records if r.scenario_id == name]


def _cell(job: tuple[str, GenerationConfig]) -> ComparisonRecord:
    name, config = job
    try:
        scenario = generate(config)
    except GenerationError as e:
        return ComparisonRecord(name, config.seed, None, None, error=str(e))
    return compare(scenario, name)


def run_sweep(families, seeds: Sequence[int], workers: int = 1) -> SweepReport:
    """Generate and compare every family x seed cell.

    ``families`` is a mapping or sequence of (name, GenerationConfig template);
    the template's seed is replaced per cell. Records come back in
    (family, seed) order whatever the worker count.
    """
    if not seeds:
        raise ValueError("seeds must be non-empty")
    families = tuple(families.items()) if isinstance(families, Mapping) else tuple(families)
    jobs = [(name, cfg.with_seed(seed)) for name, cfg in families for seed in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = tuple(pool.map(_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        records = tuple(_cell(job) for job in jobs)
    aggregates = {name: aggregate([r for r in records if r.scenario_id == name]) for name, _ in families}
    return SweepReport(families, tuple(seeds), records, aggregates)


# --- report emitters ------------------------------------------------------

CSV_HEADER = (
    "scenario_id", "seed", "virt_cost_nj", "trad_cost_nj",
    "nodes_virtualized", "nodes_physical_mode", "nodes_used_virt", "nodes_used_trad",
    "savings_fraction", "node_ratio", "error",
)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return f"{float(x):.6f}"
    return str(x)


def records_csv(records: Sequence[ComparisonRecord]) -> str:
    """One row per record; infeasible costs are written as ``infeasible``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        failed = r.error is not None
        w.writerow([
            r.scenario_id, _fmt(r.seed),
            "" if failed else (INFEASIBLE if r.virt_cost_nj is None else r.virt_cost_nj),
            "" if failed else (INFEASIBLE if r.trad_cost_nj is None else r.trad_cost_nj),
            r.nodes_virtualized, r.nodes_physical_mode, r.nodes_used_virt, r.nodes_used_trad,
            _fmt(r.savings_fraction), _fmt(r.node_ratio), r.error or "",
        ])
    return buf.getvalue()


def _pct(x) -> str:
    return "-" if x is None else f"{float(x) * 100:.1f}%"


def _ratio(x) -> str:
    return "-" if x is None else f"{float(x):.2f}"


def summary_table(report: SweepReport) -> str:
    head = (f"{'family':<8} {'n':>4} {'mixed':>5} {'trad-inf':>8} {'virt-inf':>8} {'gen-fail':>8} "
            f"{'save mean':>9} {'save min':>8} {'save max':>8} {'ratio mean':>10} {'ratio max':>9}")
    lines = [head, "-" * len(head)]
    for name, _ in report.families:
        a = report.aggregates[name]
        lines.append(
            f"{name:<8} {a.records:>4} {a.mixed_records:>5} {a.trad_infeasible:>8} {a.virt_infeasible:>8} "
            f"{a.generation_failures:>8} {_pct(a.savings_mean):>9} {_pct(a.savings_min):>8} "
            f"{_pct(a.savings_max):>8} {_ratio(a.ratio_mean):>10} {_ratio(a.ratio_max):>9}")
    return "\n".join(lines) + "\n"


def record_summary(r: ComparisonRecord) -> str:
    virt = INFEASIBLE if r.virt_cost_nj is None else f"{r.virt_cost_nj} nJ"
    trad = INFEASIBLE if r.trad_cost_nj is None else f"{r.trad_cost_nj} nJ"
    return (f"virtualized: {virt} ({r.nodes_virtualized} virtualized, {r.nodes_physical_mode} physical-mode)\n"
            f"traditional: {trad} ({r.nodes_used_trad} nodes)\n"
            f"savings: {_pct(r.savings_fraction)}  node ratio: {_ratio(r.node_ratio)}\n")
