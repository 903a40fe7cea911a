"""Exit criteria. Each test prints its measured figures; run with ``-s`` to see them."""

import random
import time
from fractions import Fraction

import pytest

from vsnopt.cli import main
from vsnopt.experiments import compare, run_sweep
from vsnopt.model import Mode, Scenario, SensorNode, make_plan, validate_plan
from vsnopt.scenario import PRESETS, load_plan
from vsnopt.solver import Status, brute_force, solve_exact

from instances import (
    budget_limited,
    full_packing,
    isolated,
    naive_valid,
    random_micro,
    random_plan,
    scaled,
)

pytestmark = pytest.mark.acceptance


def micro_population(n, seed=0):
    rng = random.Random(seed)
    return [random_micro(rng, binding=(k % 2 == 1)) for k in range(n)]


def test_oracle_equivalence():
    """Criterion 1: exact == brute force on >=500 micro-instances, zero tolerance"""
    start = time.perf_counter()
    instances = micro_population(600)
    infeasible = 0
    for s in instances:
        exact, oracle = solve_exact(s), brute_force(s)
        assert exact.status == oracle.status
        if exact.optimal:
            assert exact.cost.total == oracle.cost.total
            assert validate_plan(exact.plan, s).ok and validate_plan(oracle.plan, s).ok
        else:
            infeasible += 1
    elapsed = time.perf_counter() - start
    print(f"\n[1] {len(instances)} instances, {infeasible} infeasible, {elapsed:.1f} s")
    assert 0 < infeasible < len(instances)
    assert elapsed < 60


def test_analytic_extremes():
    """Criterion 2: full packing saves exactly 65% with node ratio 4; isolated tasks save 0"""
    packed = compare(full_packing())
    assert (packed.virt_cost_nj, packed.trad_cost_nj) == (23_800, 68_000)
    assert packed.savings_fraction == Fraction(65, 100)
    assert packed.node_ratio == 4
    lonely = compare(isolated())
    assert lonely.savings_fraction == 0
    print(f"\n[2] packed savings {packed.savings_fraction}, ratio {packed.node_ratio}; "
          f"isolated savings {lonely.savings_fraction}")


def test_paper_claims():
    """Criterion 3: Table I sweep, virt <= trad, max savings >= 40%, max node ratio >= 1.8, mixed outcomes"""
    start = time.perf_counter()
    for n_seeds in (100, 1000):
        report = run_sweep(PRESETS, range(n_seeds))
        pairs = [r for r in report.records if r.virt_cost_nj is not None and r.trad_cost_nj is not None]
        savings = max(r.savings_fraction for r in pairs)
        ratio = max(r.node_ratio for r in pairs if r.node_ratio is not None)
        if savings >= Fraction(40, 100) and ratio >= Fraction(18, 10):
            break
    elapsed = time.perf_counter() - start
    assert len(report.records) == 3 * n_seeds
    assert all(r.virt_cost_nj <= r.trad_cost_nj for r in pairs)
    mixed = sum(r.mixed for r in report.records)
    print(f"\n[3] {n_seeds} seeds x 3 presets: {len(pairs)} feasible pairs, "
          f"max savings {float(savings):.3f}, max node ratio {float(ratio):.2f}, "
          f"{mixed} mixed records, {elapsed:.1f} s")
    assert savings >= Fraction(40, 100)
    assert ratio >= Fraction(18, 10)
    assert mixed > 0
    assert elapsed < 300


def test_invariant_suites():
    """Criterion 4: structural optimality, cost floor, monotonicity, scale invariance, dual validators"""
    rng = random.Random(4)
    instances = micro_population(300, seed=4)
    violations = {"structural": 0, "floor": 0, "monotone": 0, "scale": 0, "validators": 0}
    for s in instances:
        r = solve_exact(s)
        if r.optimal:
            if any(len(r.plan.tasks_on(i, Mode.VS)) < 2 for i in r.plan.virtualized):
                violations["structural"] += 1
            if r.cost.total < len(s.tasks) * 5_950:
                violations["floor"] += 1
            extra = SensorNode(len(s.nodes), (rng.uniform(0, 60), rng.uniform(0, 60)), 10**9, 30.0)
            more_nodes = solve_exact(Scenario(s.area, s.nodes + (extra,), s.tasks, s.params))
            if not more_nodes.optimal or more_nodes.cost.total > r.cost.total:
                violations["monotone"] += 1
            if s.tasks:
                drop = rng.randrange(len(s.tasks))
                fewer = solve_exact(Scenario(s.area, s.nodes, s.tasks[:drop] + s.tasks[drop + 1:], s.params))
                if not fewer.optimal or fewer.cost.total > r.cost.total:
                    violations["monotone"] += 1
        for k in (2, 10, 1000):
            big = solve_exact(scaled(s, k))
            if big.status != r.status or (r.optimal and (big.cost.total != k * r.cost.total or big.plan != r.plan)):
                violations["scale"] += 1
    plans = 0
    while plans < 1000:
        s = random_micro(rng)
        plan = random_plan(rng, s)
        if validate_plan(plan, s).ok != naive_valid(plan, s):
            violations["validators"] += 1
        plans += 1
    print(f"\n[4] violations over {len(instances)} instances / {plans} plans: {violations}")
    assert not any(violations.values())


def test_budget_activation():
    """Criterion 5: an 18000 nJ budget admits PS hosting but not virtualization"""
    one = solve_exact(budget_limited(1))
    assert one.optimal and one.cost.total == 17_000 and one.plan.assignments[0].mode == Mode.PS
    two = solve_exact(budget_limited(2))
    assert two.status == Status.INFEASIBLE
    bad = validate_plan(make_plan([(0, 0, "VS")]), budget_limited(1))
    assert [v.constraint for v in bad.violations] == ["eq7"]
    print(f"\n[5] PS plan {one.cost.total} nJ; two tasks {two.status.value}; flagged: {bad.violations[0]}")


def test_reproducibility(tmp_path, monkeypatch):
    """Criterion 6: generate, solve and plot are byte-reproducible from the CLI"""
    monkeypatch.chdir(tmp_path)
    for tag in ("a", "b"):
        assert main(["generate", "--preset", "s1", "--seed", "42", "-o", f"s1{tag}.json"]) == 0
        assert main(["solve", f"s1{tag}.json", "-o", f"plan{tag}.json"]) == 0
        assert main(["plot", f"s1{tag}.json", f"plan{tag}.json", "-o", f"fig{tag}.svg"]) == 0
    assert (tmp_path / "s1a.json").read_bytes() == (tmp_path / "s1b.json").read_bytes()
    pa, pb = load_plan(tmp_path / "plana.json"), load_plan(tmp_path / "planb.json")
    assert pa.plan == pb.plan and pa.cost == pb.cost
    assert (tmp_path / "figa.svg").read_bytes() == (tmp_path / "figb.svg").read_bytes()
    print(f"\n[6] identical scenario, plan ({pa.cost.total} nJ) and SVG")
