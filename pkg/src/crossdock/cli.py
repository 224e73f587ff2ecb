"""Command-line surface.

Exit codes: 0 on success, 1 on infeasible `check`, invalid input files, or a
budget exhausted without an incumbent. All output meant for scripting is
line-oriented and stable; timing goes on its own line.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import diagnosis, exact, lp_export, vns
from .formulations import Formulation, check_solution
from .instance_io import (
    SchemaError,
    generate,
    parse_instance,
    parse_solution,
    serialize_instance,
)
from .model import InvalidInstanceError, instance_flags, validate_instance
from .reproduce import render_report, reproduce_note

_MODELS = {f.value: f for f in Formulation}

#: Non-string defaults so argparse never feeds them through the type converter.
_KEEP_CAPACITY = ("keep",)
_FIXTURE_CAPACITY = ("fixture",)


def _capacity_arg(text: str):
    if text == "unbounded":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"capacity must be a number or 'unbounded', got {text!r}"
        )


def _load_instance(path: str, capacity=_KEEP_CAPACITY):
    inst = parse_instance(Path(path))
    if capacity is not _KEEP_CAPACITY:
        inst = inst.with_capacity(capacity)
    return validate_instance(inst)


def _print_result(result: exact.OptimizeResult) -> None:
    print(f"status: {result.status}")
    print(f"objective: {result.objective.total:g}")
    print(f"  transfer_cost: {result.objective.transfer_cost_total:g}")
    print(f"  penalty: {result.objective.penalty_total:g}")
    print(f"  fulfilled_pairs: {result.objective.fulfilled_pairs}")
    print(f"proven_optimal: {str(result.proven_optimal).lower()}")
    print(f"nodes_explored: {result.nodes_explored}")
    print(f"bound_at_root: {result.bound_at_root:g}")
    if result.rng_algorithm:
        print(f"rng_algorithm: {result.rng_algorithm}")
    print("dock: " + " ".join(str(k) for k in result.best.dock))
    for (i, j, k, l) in result.best.transfers:
        print(f"transfer: {i} {j} {k} {l}")
    print(f"wall_time: {result.wall_time:.3f}s")


def _cmd_validate(args) -> int:
    inst = parse_instance(Path(args.instance))
    from .model import validation_issues

    issues = validation_issues(inst)
    if issues:
        for issue in issues:
            where = ",".join(map(str, issue.indices))
            print(f"error: {issue.code}({where}): {issue.message}")
        return 1
    print("OK")
    for flag in instance_flags(inst):
        print(f"flag: {flag}")
    return 0


def _cmd_solve(args) -> int:
    inst = _load_instance(args.instance, args.capacity)
    form = _MODELS[args.model]
    budget = exact.Budget(time_limit=args.time_limit)
    if args.method == "bnb":
        result = exact.branch_and_bound(inst, form, budget)
    elif args.method == "brute":
        result = exact.brute_force(inst, form)
    else:
        cfg = vns.VnsConfig(rng_seed=args.seed, time_budget=args.time_limit)
        result = vns.vns_solve(inst, form, cfg)
    _print_result(result)
    if result.status == "budget_exhausted" and result.best is None:
        return 1
    return 0


def _cmd_check(args) -> int:
    inst = _load_instance(args.instance)
    sol = parse_solution(Path(args.solution), n=inst.n, m=inst.m)
    report = check_solution(inst, sol, _MODELS[args.model])
    if report.feasible:
        print("FEASIBLE")
        return 0
    print("INFEASIBLE")
    for v in report.violations:
        print(f"violation: {v.constraint} lhs={v.lhs:g} rhs={v.rhs:g} :: {v.message}")
    return 1


def _cmd_compare(args) -> int:
    inst = _load_instance(args.instance, args.capacity)
    comparison = exact.compare_models(
        inst, exact.Budget(time_limit=args.time_limit)
    )
    cd, rcd = comparison.cross_dock, comparison.r_cross_dock
    print(f"crossdock optimum: {cd.objective.total:g} ({cd.status})")
    print(f"r-crossdock optimum: {rcd.objective.total:g} ({rcd.status})")
    print(f"absolute gap: {comparison.absolute_gap:g}")
    print(f"relative gap percent: {comparison.relative_gap_percent:g}")
    print(
        "r-crossdock optimum under crossdock: "
        + ("FEASIBLE" if not comparison.rcd_infeasible_under_cd else "INFEASIBLE")
    )
    print(f"wall_time: {cd.wall_time + rcd.wall_time:.3f}s")
    return 0


def _cmd_diagnose(args) -> int:
    inst = _load_instance(args.instance)
    sol = parse_solution(Path(args.solution), n=inst.n, m=inst.m)
    conflict = diagnosis.find_conflict(inst, sol.dock, _MODELS[args.model])
    if conflict is None:
        print("consistent")
        return 0
    print(
        "minimal conflict set: " + ", ".join(str(c) for c in conflict.constraints)
    )
    print(f"minimality verified: {conflict.minimal}")
    print(conflict.narrative)
    return 0


def _cmd_export_lp(args) -> int:
    inst = _load_instance(args.instance)
    form = _MODELS[args.model]
    doc = lp_export.emit_lp(inst, form)
    out = Path(args.out) if args.out else Path(lp_export.lp_filename(inst.name, form))
    if out.is_dir():
        out = out / lp_export.lp_filename(inst.name, form)
    out.write_text(doc.text)
    print(f"wrote: {out}")
    print(f"variables: {doc.variable_count}")
    print(f"constraints: {doc.constraint_count}")
    print(f"objective_constant: {doc.objective_constant:g}")
    return 0


def _cmd_gen(args) -> int:
    inst = generate(
        seed=args.seed,
        n=args.n,
        m=args.m,
        flow_density=args.flow_density,
        capacity_ratio=args.capacity_ratio,
    )
    Path(args.out).write_text(serialize_instance(inst) + "\n")
    print(f"wrote: {args.out}")
    return 0


def _cmd_reproduce_note(args) -> int:
    rep = reproduce_note(
        capacity="fixture" if args.capacity is _FIXTURE_CAPACITY else args.capacity,
        time_limit=args.time_limit,
    )
    print(render_report(rep))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossdock",
        description=(
            "Crossdock truck-to-dock assignment: evaluate, solve, diagnose and "
            "export the CROSS-DOCK and R-CROSS-DOCK models."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate an instance file")
    p.add_argument("instance")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("instance")
    p.add_argument("--model", choices=sorted(_MODELS), required=True)
    p.add_argument("--method", choices=["bnb", "brute", "vns"], default="bnb")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--capacity", type=_capacity_arg, default=_KEEP_CAPACITY)
    p.add_argument("--time-limit", type=float, default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("check", help="check a solution file against a model")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--model", choices=sorted(_MODELS), required=True)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("compare", help="solve both models and report the gap")
    p.add_argument("instance")
    p.add_argument("--capacity", type=_capacity_arg, default=_KEEP_CAPACITY)
    p.add_argument("--time-limit", type=float, default=None)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("diagnose", help="explain why an assignment is infeasible")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--model", choices=sorted(_MODELS), required=True)
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("export-lp", help="write an LP-format file")
    p.add_argument("instance")
    p.add_argument("--model", choices=sorted(_MODELS), required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_export_lp)

    p = sub.add_parser("gen", help="generate a seeded random instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--flow-density", type=float, default=1.0)
    p.add_argument("--capacity-ratio", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser(
        "reproduce-note",
        help="re-run the published 9-truck/6-dock counterexample analysis",
    )
    p.add_argument("--capacity", type=_capacity_arg, default=_FIXTURE_CAPACITY)
    p.add_argument(
        "--time-limit",
        type=float,
        default=600.0,
        help="budget per exact solve in seconds (default 600)",
    )
    p.set_defaults(func=_cmd_reproduce_note)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, InvalidInstanceError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except exact.InstanceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
