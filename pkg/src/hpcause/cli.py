"""Command line front end: ``hpcause check|bench|generate``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import bench
from .checker import CausalityResult, Strategy, check_cause
from .dsl import (
    QueryDocument,
    parse_bindings,
    parse_model,
    parse_query_document,
    resolve_query,
    serialize_model,
)
from .errors import CheckTimeout, HpCauseError
from .generators import generate_abt, generate_binary_tree

EXIT_CAUSE, EXIT_NOT_CAUSE, EXIT_ERROR = 0, 1, 2

GENERATORS = {"binary-tree": generate_binary_tree, "abt": generate_abt}


def _fmt_assignment(a) -> str:
    return "{" + ", ".join(f"{k}={int(v)}" for k, v in a.items()) + "}"


def format_result(result: CausalityResult, model_name: str) -> str:
    lines = [f"model {model_name}, strategy {result.strategy.value}"]
    lines.append("AC1: " + ("holds" if result.ac1 else "violated"))
    if result.ac2:
        note = "minimal" if result.w_minimal else "not necessarily minimal"
        lines.append(f"AC2: holds, W = {_fmt_assignment(result.w)} ({note})")
    else:
        lines.append("AC2: violated")
    lines.append("AC3: " + ("holds" if result.ac3 else "AC3 violated"))
    if result.diagnosis is not None:
        d = result.diagnosis
        for o in d.offenders:
            lines.append(f"  non-minimal: {o.var}={int(o.value)} ({o.condition})")
        lines.append(f"  smaller cause: {_fmt_assignment(d.witness)}")
    lines.append("verdict: " + ("actual cause" if result.is_cause else "not an actual cause"))
    return "\n".join(lines)


def exit_status(result: CausalityResult) -> int:
    return EXIT_CAUSE if result.is_cause else EXIT_NOT_CAUSE


def _resolve_timeout(value):
    return bench.default_timeout() if value is None else value


def cmd_check(args) -> int:
    model = parse_model(Path(args.model).read_text(encoding="utf-8"))
    doc = QueryDocument()
    if args.query:
        doc = parse_query_document(Path(args.query).read_text(encoding="utf-8"))
    if args.context is not None:
        doc.context, doc.context_default = parse_bindings(args.context, "context", allow_default=True)
    if args.cause is not None:
        doc.cause, _ = parse_bindings(args.cause, "cause")
    if args.phi is not None:
        doc.phi = args.phi
    if args.strategy is not None:
        doc.strategy = args.strategy
    query = resolve_query(doc, model)
    timeout = _resolve_timeout(args.timeout)
    result = check_cause(query, diagnose=args.diagnose, deadline=time.monotonic() + timeout)
    if args.output == "json":
        payload = result.to_dict()
        payload["model"] = model.name
        print(json.dumps(payload, indent=2))
    else:
        print(format_result(result, model.name))
    return exit_status(result)


def cmd_bench(args) -> int:
    strategies = [Strategy.parse(s) for s in args.strategies.split(",") if s.strip()]
    records = bench.run_bench(
        args.scenarios,
        strategies,
        warmup=args.warmup,
        measure=args.measure,
        timeout=_resolve_timeout(args.timeout),
        jobs=args.jobs,
    )
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            bench.write_csv(records, fh)
    else:
        bench.write_csv(records, sys.stdout)
    return 0


def cmd_generate(args) -> int:
    try:
        model = GENERATORS[args.family](args.height)
    except ValueError as e:
        raise HpCauseError(str(e)) from None
    text = serialize_model(model)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"{model.name}: {len(model.endogenous)} endogenous, {len(model.exogenous)} exogenous variables")
    else:
        sys.stdout.write(text)
        print(f"{model.name}: {len(model.endogenous)} endogenous, {len(model.exogenous)} exogenous variables",
              file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hpcause", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check one causal query")
    p.add_argument("model", help="model file")
    p.add_argument("query", nargs="?", help="query file (flags below override its entries)")
    p.add_argument("--context", help="e.g. 'ST_exo=1,BT_exo=1' or '*=1'")
    p.add_argument("--cause", help="e.g. 'ST=1,BT=1'")
    p.add_argument("--phi", help="effect, e.g. 'BS=1'")
    p.add_argument("--strategy", help="brute_force, sat, sat_minimal or sat_combined")
    p.add_argument("--output", choices=("text", "json"), default="text")
    p.add_argument("--no-diagnose", dest="diagnose", action="store_false",
                   help="skip the non-minimality diagnosis when AC3 fails")
    p.add_argument("--timeout", type=float, help=f"seconds (default ${bench.TIMEOUT_ENV} or 300)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="benchmark scenarios, CSV on stdout")
    p.add_argument("scenarios", nargs="+", help="scenario (query) files")
    p.add_argument("--strategies", default="brute_force,sat,sat_minimal,sat_combined")
    p.add_argument("--warmup", type=int, default=bench.DEFAULT_WARMUP)
    p.add_argument("--measure", type=int, default=bench.DEFAULT_MEASURE)
    p.add_argument("--timeout", type=float, help=f"seconds per check (default ${bench.TIMEOUT_ENV} or 300)")
    p.add_argument("--jobs", type=int, default=1, help="scenarios run in parallel")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", help="write a generated model")
    p.add_argument("family", choices=sorted(GENERATORS))
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="hpcause: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CheckTimeout:
        print("hpcause: timeout", file=sys.stderr)
        return EXIT_ERROR
    except (HpCauseError, OSError, ValueError) as e:
        print(f"hpcause: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
