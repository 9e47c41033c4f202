"""Command-line entry point: ``robustcover VERB [options]``.

Exit codes: 0 success, 2 bound violation, 3 infeasible output, 4 parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from ..framework import EnumerationCapError, RobustInstance
from ..oracle import exact_robust_opt
from ..pipeline import problem_label, solve_maxmin, solve_robust
from .experiment import ExperimentConfig, check_feasible, run_experiment
from .generate import KINDS, GeneratorSpec, generate_instance
from .io import InstanceParseError, format_instance, parse_instance

EXIT_OK, EXIT_BOUND, EXIT_INFEASIBLE, EXIT_PARSE = 0, 2, 3, 4


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for generation and randomized rounding")
    common.add_argument("--epsilon", type=_fraction, default=None, help="grid spacing (default 1/10)")
    common.add_argument("--k", type=int, default=None, help="override the scenario size")
    common.add_argument("--lambda", dest="lam", type=_fraction, default=None, help="override the inflation factor")
    common.add_argument("--format", choices=("text", "tsv", "json"), default="text")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustcover", description="Two-stage k-robust covering solvers.")
    common = _common()
    verbs = parser.add_subparsers(dest="verb", required=True)
    for verb, text in (
        ("solve-robust", "solve a robust instance"),
        ("solve-maxmin", "find an expensive k-set (lambda is forced to 1)"),
        ("oracle", "exact robust optimum by enumeration"),
    ):
        sub = verbs.add_parser(verb, parents=[common], help=text)
        sub.add_argument("instance", help="instance file")
    gen = verbs.add_parser("gen", parents=[common], help="write a random instance")
    bench = verbs.add_parser("bench", parents=[common], help="batch ratios against the oracle")
    for sub in (gen, bench):
        sub.add_argument("--problem", choices=KINDS, default="setcover")
        sub.add_argument("--n", type=int, default=6, help="elements (set cover) or vertices")
        sub.add_argument("--m", type=int, default=5, help="sets (set cover)")
        sub.add_argument("--density", type=float, default=0.4)
        sub.add_argument("--max-cost", type=int, default=10)
        sub.add_argument("--terminals", type=int, default=3)
        sub.add_argument("--pairs", type=int, default=3)
        sub.add_argument("--max-edges", type=int, default=None)
    gen.add_argument("-o", "--output", default=None, help="output path (default stdout)")
    bench.add_argument("instances", nargs="*", help="instance files (default: generate)")
    bench.add_argument("--count", type=int, default=10, help="generated instances, seeds seed..seed+count-1")
    bench.add_argument("--maxmin", action="store_true", help="benchmark the max-min pipeline")
    bench.add_argument("--no-oracle", action="store_true")
    bench.add_argument("--output", default=None, help="also write the report here")
    return parser


def _spec(args) -> GeneratorSpec:
    return GeneratorSpec(
        kind=args.problem, n=args.n, m=args.m, density=args.density, max_cost=args.max_cost,
        terminals=args.terminals, pairs=args.pairs, max_edges=args.max_edges,
        k=args.k or 1, lam=args.lam or 1, **({"epsilon": args.epsilon} if args.epsilon else {}),
    )


def _load(args) -> RobustInstance:
    inst = parse_instance(args.instance, args.epsilon)
    changes = {}
    if args.k is not None:
        changes["k"] = args.k
    if args.lam is not None:
        changes["lam"] = args.lam
    return inst.with_params(**changes) if changes else inst


def _plain(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (frozenset, set, tuple, list)):
        return [_plain(v) for v in sorted(value)]
    return value


def _emit(record: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps({k: _plain(v) for k, v in record.items()}, sort_keys=True) + "\n")
    elif fmt == "tsv":
        out.write("# " + "\t".join(record) + "\n")
        out.write("\t".join(str(_plain(v)) for v in record.values()) + "\n")
    else:
        width = max(len(k) for k in record)
        for key, value in record.items():
            out.write(f"{key.ljust(width)}  {_plain(value)}\n")


def _solve_robust(args, out) -> int:
    inst = _load(args)
    p = inst.problem
    sol = solve_robust(inst)
    feasible = check_feasible(sol, inst)
    record = {
        "problem": problem_label(p),
        "k": inst.k,
        "lambda": inst.lam,
        "algorithm": sol.label,
        "chosen_T": p.unscale(sol.chosen_T) if sol.chosen_T is not None else None,
        "first_stage": sorted(sol.first_stage),
        "first_stage_cost": p.unscale(p.first_stage_cost(sol.first_stage)),
        "objective_bound": p.unscale(sol.objective_upper),
        "objective_exact": p.unscale(sol.objective_exact) if sol.objective_exact is not None else None,
        "feasible": feasible,
    }
    _emit(record, args.format, out)
    return EXIT_INFEASIBLE if feasible is False else EXIT_OK


def _solve_maxmin(args, out) -> int:
    inst = _load(args).with_params(lam=1)
    p = inst.problem
    result = solve_maxmin(inst, args.seed)
    if hasattr(result, "certified_lower"):
        record = {
            "problem": problem_label(p),
            "k": inst.k,
            "witness": list(result.witness),
            "certified_lower": p.unscale(result.certified_lower),
            "universal_upper": p.unscale(result.universal_upper),
            "achieved_upper": p.unscale(result.achieved_upper),
            "rounded": result.rounded,
        }
    else:
        record = {"problem": problem_label(p), "k": inst.k, "witness": list(result.requirements), "value": p.unscale(result.value)}
    _emit(record, args.format, out)
    return EXIT_OK


def _oracle(args, out) -> int:
    inst = _load(args)
    p = inst.problem
    try:
        report = exact_robust_opt(inst)
    except EnumerationCapError as err:
        print(f"oracle refused: {err}", file=sys.stderr)
        return EXIT_PARSE
    if args.format == "json":
        _emit(
            {
                "robust_opt": p.unscale(report.robust_opt),
                "first_stage": sorted(report.first_stage),
                "phi_star": p.unscale(report.phi_star),
                "t_star": p.unscale(report.t_star),
                "maxmin_value": p.unscale(report.maxmin_value),
                "maxmin_argmax": list(report.maxmin_argmax),
            },
            "json",
            out,
        )
        return EXIT_OK
    lines = [
        f"robust_opt\t{p.unscale(report.robust_opt)}",
        f"first_stage\t{','.join(map(str, sorted(report.first_stage))) or '{}'}",
        f"phi_star\t{p.unscale(report.phi_star)}",
        f"t_star\t{p.unscale(report.t_star)}",
        f"maxmin_value\t{p.unscale(report.maxmin_value)}",
        f"maxmin_argmax\t{','.join(map(str, report.maxmin_argmax))}",
    ]
    for scenario in sorted(report.scenario_costs):
        lines.append(f"scenario\t{','.join(map(str, scenario))}\t{p.unscale(report.scenario_costs[scenario])}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _gen(args, out) -> int:
    text = format_instance(generate_instance(_spec(args), args.seed))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def _bench(args, out) -> int:
    config = ExperimentConfig(
        mode="maxmin" if args.maxmin else "robust",
        generator=None if args.instances else _spec(args),
        seeds=tuple(range(args.seed, args.seed + args.count)),
        paths=tuple(args.instances),
        k=args.k,
        lam=args.lam,
        epsilon=args.epsilon,
        oracle=not args.no_oracle,
        solver_seed=args.seed,
    )
    report = run_experiment(config)
    if args.format == "json":
        for row in report.rows:
            _emit(row, "json", out)
    else:
        text = report.to_tsv()
        out.write(text)
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
    return report.exit_code()


HANDLERS = {
    "solve-robust": _solve_robust,
    "solve-maxmin": _solve_maxmin,
    "oracle": _oracle,
    "gen": _gen,
    "bench": _bench,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.verb](args, out)
    except InstanceParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
