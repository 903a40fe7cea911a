"""Energy-optimal sensing-task assignment for node-level virtualized WSNs."""

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
    ValidationResult,
    Violation,
    covers,
    make_plan,
    node_energy_use,
    plan_cost,
    validate_plan,
)
from .scenario import PRESETS, GenerationConfig, build_coverage, generate, load_plan, load_scenario, save_plan, save_scenario
from .solver import (
    NodeMode,
    SolveResult,
    Status,
    assignment_subproblem,
    brute_force,
    greedy_upper_bound,
    solve_exact,
    solve_traditional,
)

__version__ = "0.1.0"
