"""Command-line interface.

Subcommands: ``solve`` (run the ant colony on an instance), ``oracle``
(exhaustive optimum for small instances), ``experiment`` (multi-run batches
from a manifest), ``gen`` (write a random instance), ``validate`` (check an
instance file). Diagnostics go to stderr; result data goes to files, plus a
single documented line on stdout (``best_cost=...`` for solve, the optimum
for oracle).

Exit codes: 0 success, 2 no feasible solution, 1 any input or usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .engine import AcoParams, run_aco
from .harness import load_manifest, run_batch, write_convergence_csv, write_summary_csv
from .instance import (GeneratorSettings, InstanceError, generate_instance,
                       parse_instance, serialize_instance, validate_instance)
from .oracle import OracleBudgetExceeded, solve_exact
from .schedule import parse_schedule, validate_schedule_range
from .structure import serialize_solution, to_dot


class CliError(Exception):
    pass


def _bool_flag(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _read_instance(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read instance: {e}") from None
    return parse_instance(text)


def _checked_schedule(text: str, role: str, n_max: int):
    expr = parse_schedule(text)
    bad = validate_schedule_range(expr, n_max, role)
    if bad:
        raise CliError(str(bad[0]))
    return expr


def _write(path: str, content: str) -> None:
    try:
        Path(path).write_text(content, encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot write {path}: {e}") from None


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _read_instance(args.instance)
    params = AcoParams(
        n_ants=args.ants, n_iterations=args.iterations,
        alpha=_checked_schedule(args.alpha, "alpha", args.iterations),
        beta=_checked_schedule(args.beta, "beta", args.iterations),
        rho=_checked_schedule(args.rho, "rho", args.iterations),
        seed=args.seed, local_search=args.local_search)
    result = run_aco(inst, params)

    if args.out_trace:
        lines = ["iteration,best_so_far,iteration_best,feasible_ants"]
        for rec in result.trace:
            lines.append(f"{rec.iteration},{rec.best_so_far!r},"
                         f"{rec.iteration_best!r},{rec.feasible_ants}")
        _write(args.out_trace, "\n".join(lines) + "\n")

    if result.best_solution is None:
        print("no feasible solution found", file=sys.stderr)
        return 2
    if args.out_solution:
        _write(args.out_solution, serialize_solution(result.best_solution) + "\n")
    if args.out_tree:
        _write(args.out_tree, to_dot(result.best_solution, inst))
    print(f"best_cost={result.best_cost!r}")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    inst = _read_instance(args.instance)
    try:
        res = solve_exact(inst, max_nodes=args.max_nodes, time_budget_s=args.time_budget_s)
    except OracleBudgetExceeded as e:
        raise CliError(str(e)) from None
    if res.solution is None:
        print("infeasible")
        print(f"enumerated {res.enumerated} structures without a feasible placement",
              file=sys.stderr)
        return 2
    if args.out_solution:
        _write(args.out_solution, serialize_solution(res.solution) + "\n")
    print(f"optimum={res.cost!r}")
    print(f"enumerated {res.enumerated} structures", file=sys.stderr)
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    try:
        text = Path(args.manifest).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read manifest: {e}") from None
    try:
        spec = load_manifest(text, base_dir=Path(args.manifest).parent)
        spec.validate()
    except (InstanceError, ValueError) as e:
        raise CliError(str(e)) from None
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_batch(spec)
    write_summary_csv(result, out_dir / "summary.csv")
    write_convergence_csv(result, out_dir / "convergence.csv")
    print(f"wrote {out_dir / 'summary.csv'} and {out_dir / 'convergence.csv'}",
          file=sys.stderr)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    n_types = args.u if args.u is not None else (2 if args.profile == "plc-io" else 5)
    settings = GeneratorSettings(n_types=n_types, n_loops=args.a, levels=args.s,
                                 profile=args.profile, seed=args.seed)
    inst = generate_instance(settings)
    text = serialize_instance(inst) + "\n"
    if args.out:
        _write(args.out, text)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        print(text, end="")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        text = Path(args.instance).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read instance: {e}") from None
    try:
        inst = parse_instance(text)
    except InstanceError as e:
        print(f"invalid: {e}", file=sys.stderr)
        return 1
    violations = validate_instance(inst)
    for v in violations:
        print(str(v), file=sys.stderr)
    return 1 if violations else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcssp",
        description="Minimum-cost hierarchical control-system structure synthesis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the ant colony solver on an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--ants", type=int, default=20)
    p.add_argument("--alpha", default="2.0")
    p.add_argument("--beta", default="1.0")
    p.add_argument("--rho", default="0.25")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--local-search", type=_bool_flag, default=True, metavar="BOOL")
    p.add_argument("--out-tree", help="write the best tree as DOT")
    p.add_argument("--out-solution", help="write the best solution as JSON")
    p.add_argument("--out-trace", help="write the convergence trace as CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exhaustive optimum for a small instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--max-nodes", type=int, required=True)
    p.add_argument("--time-budget-s", type=float, default=60.0)
    p.add_argument("--out-solution", help="write the optimal solution as JSON")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="run a manifest of parameter sets")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("gen", help="generate an instance file")
    p.add_argument("--profile", choices=("plc-io", "random"), default="random")
    p.add_argument("--u", type=int, default=None, help="number of device types")
    p.add_argument("--a", type=int, required=True, help="number of control loops")
    p.add_argument("--s", type=int, required=True, help="number of hierarchy levels")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="validate an instance file")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (CliError, InstanceError, ValueError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
