# main_pcfr.py

import sys
import json
import logging
import argparse
from typing import List, Optional, Sequence

from pydantic import ValidationError

from src.ad_transform import AdMode, ad_env, ad_term, gradient, jacobian_rows
from src.config import (
    CORPUS_DIR, DEFAULT_FIX_BOUND, DEFAULT_PROBES, DEFAULT_RADIUS, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_STRATEGY,
    LOG_FORMAT, LOG_LEVEL, resolve_default_fuel,
)
from src.corpus import SourceProgram, list_corpus, load_file, run_entry
from src.errors import MissingPartials, ParseError, PcfError
from src.evaluator import FuelExhausted, NormalForm, PrimDomainFailure, Strategy, decode_values
from src.models import EvalConfig, OracleConfig, Verdict
from src.oracle import compare_at, diff_probe
from src.parser import print_term
from src.report_writer import ReportWriter
from src.trace_lab import branch_trace, pretrace_diagnose, run_scan, stability_probe
from src.typecheck import TypingEnv, infer

logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)

EXIT_OK = 0
EXIT_FAIL = 1  # check verdict Fail
EXIT_USAGE = 2  # usage, parse and type errors
EXIT_DIVERGENCE = 3  # no value under the fuel budget

GUARD_NOTE = "Note: `if P then M else N` takes M when P <= 0, e.g. ReLU is `\\x:R. if x then 0 else x`."


def format_real(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def format_vector(values: Sequence[float]) -> str:
    return " ".join(format_real(v) for v in values)


def eval_config(args: argparse.Namespace) -> EvalConfig:
    return EvalConfig(fuel=args.fuel, fix_cap=getattr(args, "fix_cap", None))


def oracle_config(args: argparse.Namespace) -> OracleConfig:
    settings = dict(eval_config=eval_config(args), strategy=args.strategy)
    if getattr(args, "rtol", None) is not None:
        settings["rtol"] = args.rtol
    if getattr(args, "atol", None) is not None:
        settings["atol"] = args.atol
    return OracleConfig(**settings)


# --- subcommands ---

def cmd_eval(args: argparse.Namespace) -> int:
    source = load_file(args.file)
    outcome = source.program().run(args.args, Strategy.parse(args.strategy), eval_config(args))
    if isinstance(outcome, NormalForm):
        values = decode_values(outcome.term)
        print(format_vector(values) if values is not None else print_term(outcome.term))
        logging.debug(f"Normal form after {outcome.steps} steps.")
        return EXIT_OK
    if isinstance(outcome, FuelExhausted):
        print(f"diverged: fuel exhausted after {outcome.steps} steps")
    elif isinstance(outcome, PrimDomainFailure):
        print(f"undefined: {outcome.symbol} is undefined at {format_vector(outcome.args)}")
    else:
        print(f"stuck: {print_term(outcome.term)}")
    return EXIT_DIVERGENCE


def cmd_transform(args: argparse.Namespace) -> int:
    source = load_file(args.file)
    mode = AdMode.parse(args.mode)
    transformed = ad_term(source.term, mode, args.n)
    print(print_term(transformed))
    if args.print_type:
        env = ad_env(TypingEnv.ground(source.params), mode, args.n)
        print(f"type: {infer(env, transformed)}")
    return EXIT_OK


def cmd_grad(args: argparse.Namespace) -> int:
    source = load_file(args.file)
    mode = AdMode.parse(args.mode)
    strategy = Strategy.parse(args.strategy)
    cfg = eval_config(args)
    if source.coarity != 1:
        rows = jacobian_rows(source.program(), mode, args.at, strategy, cfg)
        for row in rows:
            print(format_vector(row) if row is not None else "diverged")
        return EXIT_OK if all(row is not None for row in rows) else EXIT_DIVERGENCE

    grad = gradient(source.program(), mode, args.at, strategy, cfg)
    if grad is None:
        print("diverged: the gradient term has no normal form under the fuel budget")
        return EXIT_DIVERGENCE
    print(format_vector(grad))
    probe = diff_probe(source.program(), args.at, strategy=strategy, cfg=cfg)
    if probe.is_differentiable:
        config = OracleConfig()
        if any(abs(a - f) > config.atol + config.rtol * abs(f) for a, f in zip(grad, probe.grad)):
            logging.warning(f"Finite differences disagree at {format_vector(args.at)}: "
                            f"AD gives {format_vector(grad)}, differences give {format_vector(probe.grad)}.")
    elif probe.kind == "NotDifferentiable":
        logging.warning(f"The program does not look differentiable at {format_vector(args.at)} "
                        f"(axis {probe.axis}: slopes {probe.left_slope} and {probe.right_slope}).")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    source = load_file(args.file)
    cfg = oracle_config(args)
    program = source.program()
    report = compare_at(program, args.at, cfg)
    print(json.dumps(report.to_json_dict(), indent=2))
    if args.json:
        ReportWriter().write_json(report, args.json)
    if report.verdict == Verdict.FAIL:
        return EXIT_FAIL
    if report.ad_forward is None or report.ad_reverse is None:
        logging.warning(f"An AD gradient has no value at {format_vector(args.at)} under the fuel budget.")
        return EXIT_DIVERGENCE
    if report.fd_grad.kind == "Undefined" and program(args.at, Strategy.parse(cfg.strategy), cfg.eval_config) is None:
        logging.warning(f"The program has no value at {format_vector(args.at)}.")
        return EXIT_DIVERGENCE
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    source = load_file(args.file)
    if len(args.box) % 2:
        raise ValueError("--box expects LO HI pairs")
    box = [(args.box[i], args.box[i + 1]) for i in range(0, len(args.box), 2)]
    report, records = run_scan(source.program(), box, args.samples, args.seed, oracle_config(args), args.workers)
    print(json.dumps(report.to_json_dict(), indent=2))
    writer = ReportWriter()
    if args.json:
        writer.write_json(report, args.json)
    if args.csv:
        writer.write_scan_csv(records, args.csv, source.arity)
    return EXIT_DIVERGENCE if report.divergent else EXIT_OK


def cmd_stability(args: argparse.Namespace) -> int:
    source = load_file(args.file)
    verdict = stability_probe(source.program(), args.at, args.radius, args.probes, args.seed, eval_config(args))
    print(json.dumps(verdict.to_json_dict(), indent=2))
    if args.json:
        ReportWriter().write_json(verdict, args.json)
    return EXIT_DIVERGENCE if verdict.kind == "Inconclusive" else EXIT_OK


def cmd_trace(args: argparse.Namespace) -> int:
    source = load_file(args.file)
    trace = branch_trace(source.program(), args.at, eval_config(args))
    for event in trace.events:
        print(event)
    print(trace.outcome)
    return EXIT_DIVERGENCE if trace.outcome == "FuelExhausted" else EXIT_OK


def cmd_pretrace(args: argparse.Namespace) -> int:
    simple = load_file(args.simple_file)
    target = load_file(args.file)
    result = pretrace_diagnose(simple.term, target.term, args.fix_bound)
    print("yes" if result.holds else "no" + (" (fix bound hit)" if result.bound_hit else ""))
    return EXIT_OK


def _describe(source: SourceProgram) -> str:
    params = " ".join(source.params) or "-"
    return f"{source.name:<16} args: {params:<6} coarity: {source.coarity}  {source.description}"


def cmd_corpus(args: argparse.Namespace) -> int:
    programs, failures = list_corpus(args.dir)
    if args.action == "list":
        for source in programs:
            print(_describe(source))
    else:
        cfg = oracle_config(args)
        for source in programs:
            record = run_entry(source, cfg)
            print(f"== {source.name}")
            if record.error:
                print(f"   error: {record.error}")
            for evaluation in record.evaluations:
                value = evaluation["value"]
                print(f"   value at ({format_vector(evaluation['point'])}): "
                      f"{format_vector(value) if value is not None else 'diverged'}")
            for report in record.reports:
                ad = report.ad_forward if report.ad_forward is not None else report.ad_reverse
                print(f"   grad at ({format_vector(report.point)}): "
                      f"{format_vector(ad) if ad is not None else 'diverged'}  -> {report.verdict.value}")
    for path, message in failures.items():
        print(f"could not load {path}: {message}", file=sys.stderr)
    return EXIT_USAGE if failures else EXIT_OK


# --- argument parsing ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcfr",
        description="PCF_R interpreter with forward/reverse AD and a lab for where AD goes wrong. " + GUARD_NOTE,
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log debug detail")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Only log warnings and errors")

    evaluation = argparse.ArgumentParser(add_help=False)
    evaluation.add_argument("--strategy", choices=[s.value for s in Strategy], default=DEFAULT_STRATEGY,
                            help="Reduction strategy (default: head)")
    evaluation.add_argument("--fuel", type=int, default=resolve_default_fuel(),
                            help="Maximum reduction steps (default 1e6, or PCFR_FUEL)")

    tolerances = argparse.ArgumentParser(add_help=False)
    tolerances.add_argument("--rtol", type=float, default=None, help="Relative tolerance of the AD/FD comparison")
    tolerances.add_argument("--atol", type=float, default=None, help="Absolute tolerance of the AD/FD comparison")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[evaluation], help="Evaluate a program", epilog=GUARD_NOTE)
    p.add_argument("file")
    p.add_argument("--args", type=float, nargs="*", default=[], help="Program arguments")
    p.add_argument("--fix-cap", type=int, default=None, help="Replace fixpoints by their K-th approximant")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("transform", help="Print the AD transform of a program")
    p.add_argument("file")
    p.add_argument("--mode", choices=["fwd", "rev"], required=True)
    p.add_argument("-n", type=int, required=True, help="Number of input directions")
    p.add_argument("--print-type", action="store_true")
    p.set_defaults(handler=cmd_transform)

    p = sub.add_parser("grad", parents=[evaluation], help="Gradient of a program by AD")
    p.add_argument("file")
    p.add_argument("--mode", choices=["fwd", "rev"], required=True)
    p.add_argument("--at", type=float, nargs="*", default=[], required=True)
    p.set_defaults(handler=cmd_grad)

    p = sub.add_parser("check", parents=[evaluation, tolerances], help="Compare AD with finite differences")
    p.add_argument("file")
    p.add_argument("--at", type=float, nargs="*", default=[], required=True)
    p.add_argument("--json", default=None, help="Also write the report to this file")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("scan", parents=[evaluation, tolerances], help="Monte-Carlo search for AD failures")
    p.add_argument("file")
    p.add_argument("--box", type=float, nargs="+", required=True, help="LO HI per input")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser("stability", parents=[evaluation], help="Empirical stability of a point")
    p.add_argument("file")
    p.add_argument("--at", type=float, nargs="*", default=[], required=True)
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--probes", type=int, default=DEFAULT_PROBES)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--json", default=None)
    p.set_defaults(handler=cmd_stability)

    p = sub.add_parser("trace", parents=[evaluation], help="Branch decisions of head reduction")
    p.add_argument("file")
    p.add_argument("--at", type=float, nargs="*", default=[], required=True)
    p.set_defaults(handler=cmd_trace)

    p = sub.add_parser("pretrace", help="Decide whether a simple term pre-traces a program")
    p.add_argument("simple_file")
    p.add_argument("file")
    p.add_argument("--fix-bound", type=int, default=DEFAULT_FIX_BOUND)
    p.set_defaults(handler=cmd_pretrace)

    p = sub.add_parser("corpus", parents=[evaluation, tolerances], help="List or run the shipped examples")
    p.add_argument("action", choices=["list", "run"])
    p.add_argument("--dir", default=CORPUS_DIR)
    p.set_defaults(handler=cmd_corpus)

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.quiet:
        logging.getLogger().setLevel(logging.WARNING)

    try:
        return args.handler(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MissingPartials as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (PcfError, ValidationError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        logging.error(f"I/O error: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
