"""Command-line interface.

Exit codes: 0 when a command completed (a "no" answer to the target
question is still 0), 2 for input errors, 3 when an engine limit is hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from homnc import __version__
from homnc.bench import load_config, run_bench, summarize
from homnc.errors import EngineLimitError, InstanceError
from homnc.generate import GenParams, generate
from homnc.model import (
    allocation_from_dict,
    allocation_value,
    check_feasible,
    instance_to_dict,
    parse_instance,
    serialize_instance,
)
from homnc.pipeline import ENGINES, SolveOptions, solve_instance
from homnc.reductions import REDUCTION_PLANS, reduce_instance

EXIT_OK, EXIT_INPUT, EXIT_ENGINE = 0, 2, 3


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc.strerror}") from None


def _emit(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out and out != "-":
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fraction(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    return q


def cmd_solve(args) -> int:
    inst = parse_instance(_read(args.input))
    trace = (lambda line: print(line, file=sys.stderr)) if args.trace else None
    opts = SolveOptions(
        engine=args.engine,
        reduce=args.reduce,
        delta_state=args.delta_state,
        delta_slack=args.delta_slack,
        scale=args.scale,
        trace=trace,
    )
    report = solve_instance(inst, opts)
    doc = report.to_dict()
    doc["config"]["input"] = args.input
    _emit(doc, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = parse_instance(_read(args.input))
    try:
        alloc = allocation_from_dict(json.loads(_read(args.alloc)))
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed allocation JSON: {exc}") from None
    feas = check_feasible(inst, alloc)
    value = allocation_value(inst, alloc)
    _emit(
        {
            "tool": "homnc",
            "version": __version__,
            "config": {"input": args.input, "alloc": args.alloc},
            "seed": None,
            "feasible": feas.feasible,
            "violations": [
                {"cache": c, "load": feas.loads[c][0], "capacity": str(feas.loads[c][1])}
                for c in feas.violations
            ],
            "value": str(value),
            "meets_target": feas.feasible and value >= inst.target,
            "verdict": feas.describe(),
        },
        args.out,
    )
    return EXIT_OK


def cmd_reduce(args) -> int:
    inst = parse_instance(_read(args.input))
    trail = reduce_instance(inst, args.mode)
    _emit(
        {
            "tool": "homnc",
            "version": __version__,
            "config": {"input": args.input, "mode": args.mode},
            "seed": None,
            "instance": instance_to_dict(trail.instance),
            "reductions": trail.report,
        },
        args.out,
    )
    return EXIT_OK


def cmd_gen(args) -> int:
    params = GenParams(
        caches=args.caches,
        users=args.users,
        contents=args.contents,
        max_cap=args.max_cap,
        edge_p=args.edge_p,
        zipf=args.zipf,
        weight_min=args.weight_min,
        weight_max=args.weight_max,
        weight_den=args.weight_den,
        support=args.support,
        target=args.target,
    )
    try:
        inst = generate(params, args.seed)
    except ValueError as exc:
        raise InstanceError(str(exc)) from None
    text = serialize_instance(inst)
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        config = load_config(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"bad bench config: {exc}") from None
    try:
        result = run_bench(config)
    except ValueError as exc:
        raise InstanceError(str(exc)) from None
    _emit(result, args.out)
    print(summarize(result), file=sys.stderr if not args.out or args.out == "-" else sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homnc", description="Exact homogeneous network caching solver")
    parser.add_argument("--version", action="version", version=f"homnc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute an optimal allocation")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--engine", choices=ENGINES, default="nfold")
    p.add_argument("--reduce", choices=sorted(REDUCTION_PLANS), default="all")
    p.add_argument("--delta-state", type=int, default=None, help="DP prefix radius (default 2*C)")
    p.add_argument("--delta-slack", type=int, default=2)
    p.add_argument("--scale", choices=("product", "lcm"), default="product")
    p.add_argument("--trace", action="store_true", help="per-iteration lines on stderr")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="re-evaluate an allocation")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--alloc", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce", help="apply reductions and print the reduced instance")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=sorted(REDUCTION_PLANS), default="all")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("gen", help="generate a seeded random instance")
    p.add_argument("--caches", type=int, default=2)
    p.add_argument("--users", type=int, default=3)
    p.add_argument("--contents", type=int, default=4)
    p.add_argument("--max-cap", type=int, default=2)
    p.add_argument("--edge-p", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--zipf", type=_fraction, default=Fraction(1))
    p.add_argument("--weight-min", type=int, default=1)
    p.add_argument("--weight-max", type=int, default=5)
    p.add_argument("--weight-den", type=int, default=1)
    p.add_argument("--support", type=int, default=None)
    p.add_argument("--target", type=_fraction, default=Fraction(0))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:  # InstanceError and bad option values
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EngineLimitError as exc:
        print(f"engine limit: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
