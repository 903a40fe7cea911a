"""Command-line front end.

Exit codes: 0 success, 1 infeasible or invalid (a valid analytical outcome),
2 usage, parse or I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import compare, record_summary, records_csv, run_sweep, summary_table
from .model import EnergyParams, plan_cost, validate_plan
from .plot import render_svg
from .scenario import (
    PRESETS,
    FormatError,
    GenerationConfig,
    GenerationError,
    dumps_plan,
    dumps_scenario,
    generate,
    load_plan,
    load_scenario,
    scenario_digest,
    write_atomic,
)
from .solver import ProblemTooLarge, brute_force, greedy_upper_bound, solve_exact, solve_traditional

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE = 0, 1, 2


def _area(text: str) -> tuple[float, float]:
    try:
        w, h = text.lower().split("x")
        area = float(w), float(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if area[0] <= 0 or area[1] <= 0:
        raise argparse.ArgumentTypeError(f"area must be positive, got {text!r}")
    return area


def _int_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None


def _seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = _int_range(text)
        if lo > hi:
            raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B or a comma list, got {text!r}") from None


def _add_energy_flags(p: argparse.ArgumentParser):
    p.add_argument("--eps-nj", type=int, help="energy of one active physical sensor (nJ)")
    p.add_argument("--evs-nj", type=int, help="per-virtual-sensor overhead (nJ)")
    p.add_argument("--max-vs", type=int, help="maximum virtual sensors per node")


def _add_generation_flags(p: argparse.ArgumentParser):
    p.add_argument("--nodes", type=int, help="number of sensor nodes")
    p.add_argument("--tasks", type=int, help="number of sensing tasks")
    p.add_argument("--area", type=_area, help="area as WxH meters")
    p.add_argument("--range", type=float, help="sensing range (m)")
    p.add_argument("--budget-nj", type=_int_range, help="node budget interval LO..HI (nJ)")
    p.add_argument("--allow-uncovered", action="store_true", help="do not re-draw uncovered tasks")
    _add_energy_flags(p)


def _energy(base: EnergyParams, args) -> EnergyParams:
    return EnergyParams(
        base.e_ps if args.eps_nj is None else args.eps_nj,
        base.e_vs if args.evs_nj is None else args.evs_nj,
        base.max_vs if args.max_vs is None else args.max_vs,
    )


def _config(template: GenerationConfig, args) -> GenerationConfig:
    changes = {}
    for attr, field in (("nodes", "n_nodes"), ("tasks", "n_tasks"), ("area", "area"),
                        ("range", "range"), ("budget_nj", "budget_interval")):
        value = getattr(args, attr, None)
        if value is not None:
            changes[field] = value
    if getattr(args, "allow_uncovered", False):
        changes["require_coverage"] = False
    changes["params"] = _energy(template.params, args)
    return replace(template, **changes)


def _load_scenario(args):
    scenario = load_scenario(args.scenario)
    if hasattr(args, "eps_nj"):
        scenario = replace(scenario, params=_energy(scenario.params, args))
    return scenario


def _emit(text: str, out):
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def cmd_generate(args) -> int:
    config = _config(PRESETS[args.preset], args)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    _emit(dumps_scenario(generate(config)), args.output)
    return EXIT_OK


def _report(result, scenario, args) -> int:
    print(f"status: {result.status.value}")
    if not result.optimal:
        return EXIT_INFEASIBLE
    c = result.cost
    print(f"cost: total {c.total} nJ (PS {c.c_ps} nJ, VS {c.c_vs} nJ)")
    print(f"virtualized nodes: {sorted(result.plan.virtualized)}")
    s = result.stats
    print(f"search: {s.nodes_explored} nodes, {s.bound_prunes} pruned, {s.flow_calls} flow calls, "
          f"{s.wall_time:.3f} s")
    if args.output:
        write_atomic(args.output, dumps_plan(result.plan, scenario))
    return EXIT_OK


def cmd_solve(args) -> int:
    scenario = _load_scenario(args)
    method = {"exact": solve_exact, "greedy": greedy_upper_bound, "brute": brute_force}[args.method]
    return _report(method(scenario), scenario, args)


def cmd_baseline(args) -> int:
    scenario = _load_scenario(args)
    return _report(solve_traditional(scenario), scenario, args)


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    doc = load_plan(args.plan)
    if doc.scenario_ref is not None and doc.scenario_ref != scenario_digest(scenario):
        print("warning: plan was produced for a different scenario file", file=sys.stderr)
    result = validate_plan(doc.plan, scenario)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not result.ok:
        print("INVALID")
        for v in result.violations:
            print(f"  {v}")
        return EXIT_INFEASIBLE
    cost = plan_cost(doc.plan, scenario)
    if doc.cost is not None and doc.cost != cost:
        print(f"warning: stored cost {doc.cost.total} nJ differs from recomputed {cost.total} nJ",
              file=sys.stderr)
    print("OK")
    print(f"cost: total {cost.total} nJ (PS {cost.c_ps} nJ, VS {cost.c_vs} nJ)")
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = _load_scenario(args)
    record = compare(scenario, Path(args.scenario).stem)
    if args.csv:
        write_atomic(args.csv, records_csv([record]))
    sys.stdout.write(record_summary(record))
    return EXIT_OK if record.virt_cost_nj is not None else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    names = args.preset or ["s1", "s2", "s3"]
    families = [(name, _config(PRESETS[name], args)) for name in names]
    report = run_sweep(families, args.seeds, workers=args.workers)
    if args.csv:
        write_atomic(args.csv, records_csv(report.records))
    sys.stdout.write(summary_table(report))
    return EXIT_OK


def cmd_plot(args) -> int:
    scenario = load_scenario(args.scenario)
    plan = load_plan(args.plan).plan if args.plan else None
    title = f"{len(scenario.nodes)} nodes, {len(scenario.tasks)} tasks"
    if scenario.seed is not None:
        title += f", seed {scenario.seed}"
    svg = render_svg(scenario, plan, range_circles=not args.no_range_circles, title=title)
    _emit(svg, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vsnopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a seeded scenario")
    p.add_argument("--preset", choices=sorted(PRESETS), default="s1")
    p.add_argument("--seed", type=int)
    _add_generation_flags(p)
    p.add_argument("-o", "--output", help="scenario file (default: stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve a scenario exactly")
    p.add_argument("scenario")
    p.add_argument("--method", choices=["exact", "greedy", "brute"], default="exact")
    _add_energy_flags(p)
    p.add_argument("-o", "--output", help="plan file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("baseline", help="traditional (one task per physical sensor) assignment")
    p.add_argument("scenario")
    _add_energy_flags(p)
    p.add_argument("-o", "--output", help="plan file")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("validate", help="check a plan against a scenario")
    p.add_argument("scenario")
    p.add_argument("plan")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compare", help="virtualized optimum vs traditional baseline")
    p.add_argument("scenario")
    _add_energy_flags(p)
    p.add_argument("--csv", help="write the comparison record as CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="multi-seed comparison over presets")
    p.add_argument("--preset", choices=sorted(PRESETS), action="append",
                   help="scenario family (repeatable; default: all presets)")
    p.add_argument("--seeds", type=_seeds, default=list(range(100)), help="A..B (inclusive) or a,b,c")
    _add_generation_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", help="write one row per record")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="render a scenario and plan as SVG")
    p.add_argument("scenario")
    p.add_argument("plan", nargs="?")
    p.add_argument("--no-range-circles", action="store_true")
    p.add_argument("-o", "--output", help="SVG file (default: stdout)")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (FormatError, GenerationError, ProblemTooLarge, OSError, ValueError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # keep the exit-code contract closed
        print(f"error: unexpected {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
