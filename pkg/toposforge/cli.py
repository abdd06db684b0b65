"""Command-line front end.

    toposforge eval --space sierpinski --formula "~~U"
    toposforge eval --ring zmod12 --formula "forall s:O. (~inv(s)) => nilp(s)"
    toposforge translate --nucleus negneg "exists x:F. p(x)=y"
    toposforge verify box-theorem --max-points 5 --max-depth 3
"""
import argparse
import sys
from typing import Optional, Sequence

from pydantic import BaseModel

from toposforge.core.config import settings
from toposforge.core.errors import ConfigError, FormulaSyntaxError, ToposforgeError
from toposforge.core.logging_setup import configure_logging
from toposforge.core.loaders import Session
from toposforge.models.schemas import EvalResponse, Report, SheafifyResponse, SpecResponse
from toposforge.services.verify import SUITES, SuiteConfig
from toposforge.services.workbench import Workbench


def _pairs(items: Optional[Sequence[str]], separator: str, what: str) -> dict[str, str]:
    pairs = {}
    for item in items or ():
        name, found, value = item.partition(separator)
        if not found or not name.strip() or not value.strip():
            raise ConfigError(f"expected {what}, got {item!r}")
        pairs[name.strip()] = value.strip()
    return pairs


def _add_context(parser: argparse.ArgumentParser, formula: bool = True) -> None:
    where = parser.add_mutually_exclusive_group(required=True)
    where.add_argument("--space", help="Built-in space name or space file")
    where.add_argument("--ring", help="Ring spec (zmod 12) or ring file; evaluates over its spectrum")
    parser.add_argument("--load", "--sheaf", action="append", dest="load", default=[], metavar="FILE",
                        help="Sheaf, module, ring or space file (repeatable)")
    if formula:
        parser.add_argument("--formula", required=True, help="Formula in concrete syntax")
        parser.add_argument("--declare", action="append", metavar="x:SORT", help="Free variable and its sort")
        parser.add_argument("--bind", action="append", metavar="x=LABEL", help="Global section for a free variable")


def _verdict(response: EvalResponse) -> str:
    word = "FORCED" if response.forced else "NOT-FORCED"
    return f"{word} on {response.open}; truth-value = {response.truth_value}"


def _render_spec(response: SpecResponse) -> str:
    lines = [f"ring: {response.ring} ({response.size} elements)", f"frame: {len(response.frame)} elements"]
    lines += [f"  {label}" for label in response.frame]
    lines.append(f"points: {len(response.points)}")
    lines += [f"  {point}" for point in response.points]
    lines.append("sections of O:")
    lines += [f"  {U}: {count}" for U, count in response.sections.items()]
    return "\n".join(lines)


def _render_sheafify(response: SheafifyResponse) -> str:
    lines = [f"{response.sheaf} along {response.nucleus}"]
    lines += [f"  {U}: {' '.join(labels) or '(none)'}" for U, labels in response.sections.items()]
    lines.append(f"separated: {'yes' if response.separated else 'no'}")
    lines.append(f"sheaf: {'yes' if response.is_sheaf else 'no'}")
    lines.append(f"unit injective: {'yes' if response.unit_injective else 'no'}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toposforge", description="Forcing over sheaves on finite spaces")
    parser.add_argument("--format", choices=("text", "json"), default=None, help="Output format")
    parser.add_argument("--log-level", default=None, help="Logging level for stderr")
    parser.add_argument("--schema-bound", type=int, default=None, help="Bound for bigvee[n=0..] schemas")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    eval_parser = subparsers.add_parser("eval", help="Decide whether a formula is forced on an open")
    _add_context(eval_parser)
    eval_parser.add_argument("--open", default=None, help="Open to evaluate on (default: the whole space)")

    truth_parser = subparsers.add_parser("truth", help="Largest open on which a formula holds")
    _add_context(truth_parser)

    translate_parser = subparsers.add_parser("translate", help="Box translation of a formula")
    translate_parser.add_argument("formula", help="Formula in concrete syntax")
    translate_parser.add_argument("--nucleus", default="j", help="Modal operator name")
    translate_parser.add_argument("--elide-gray", action="store_true", help="Omit boxes that do not change the meaning")

    sheafify_parser = subparsers.add_parser("sheafify", help="Sheafify a loaded sheaf along a nucleus")
    sheafify_parser.add_argument("sheaf", help="Name of a sheaf from a --load file")
    sheafify_parser.add_argument("--space", required=True, help="Built-in space name or space file")
    sheafify_parser.add_argument("--load", "--sheaf-file", action="append", dest="load", default=[], metavar="FILE")
    sheafify_parser.add_argument("--nucleus", default="negneg", help="negneg, id, open_U, closed_U or point_x")
    sheafify_parser.add_argument("--plus-only", action="store_true", help="Apply the plus construction once")

    spec_parser = subparsers.add_parser("spec", help="Spectrum of a finite ring")
    spec_parser.add_argument("--ring", required=True, help="Ring spec (zmod 12) or ring file")

    verify_parser = subparsers.add_parser("verify", help="Run a verification suite")
    verify_parser.add_argument("suite", choices=sorted(SUITES), help="Suite name")
    verify_parser.add_argument("--space", default=None, help="Run on this space only")
    verify_parser.add_argument("--ring", default=None, help="Run on this ring only")
    verify_parser.add_argument("--seed", type=int, default=None, help="Corpus seed")
    verify_parser.add_argument("--count", type=int, default=None, help="Random instances per suite")
    verify_parser.add_argument("--max-points", type=int, default=None, help="Largest random space")
    verify_parser.add_argument("--max-depth", type=int, default=None, help="Deepest random formula")
    return parser


def _suite_config(args: argparse.Namespace, bench: Workbench) -> SuiteConfig:
    config = SuiteConfig()
    if args.seed is not None:
        config.seed = args.seed
    if args.count is not None:
        config.count = args.count
    if args.max_points is not None:
        config.max_points = args.max_points
    if args.max_depth is not None:
        config.max_depth = args.max_depth
    if args.space is not None:
        config.spaces = [bench.session.space(args.space)]
    if args.ring is not None:
        config.rings = [bench.session.ring(args.ring)]
    return config


def _emit(output: str | BaseModel, fmt: str) -> None:
    if isinstance(output, BaseModel):
        print(output.model_dump_json(indent=2) if fmt == "json" else str(output))
    else:
        print(output)


def run(args: argparse.Namespace) -> int:
    fmt = args.format or settings.OUTPUT_FORMAT
    session = Session()
    if args.schema_bound is not None:
        session.schema_bound = args.schema_bound
    for path in getattr(args, "load", []):
        session.load(path)
    bench = Workbench(session)
    bench.initialize()

    match args.command:
        case "eval":
            response = bench.evaluate(
                args.formula, space=args.space, ring=args.ring, open=args.open,
                declare=_pairs(args.declare, ":", "x:SORT"), bind=_pairs(args.bind, "=", "x=LABEL"),
                schema_bound=args.schema_bound,
            )
            _emit(response if fmt == "json" else _verdict(response), fmt)

        case "truth":
            response = bench.truth(
                args.formula, space=args.space, ring=args.ring,
                declare=_pairs(args.declare, ":", "x:SORT"), bind=_pairs(args.bind, "=", "x=LABEL"),
            )
            _emit(response if fmt == "json" else f"truth-value = {response.truth_value}", fmt)

        case "translate":
            response = bench.translate(args.formula, args.nucleus, args.elide_gray)
            _emit(response if fmt == "json" else response.translated, fmt)

        case "sheafify":
            response = bench.sheafify(args.space, args.sheaf, args.nucleus, args.plus_only)
            _emit(response if fmt == "json" else _render_sheafify(response), fmt)

        case "spec":
            response = bench.spec(args.ring)
            _emit(response if fmt == "json" else _render_spec(response), fmt)

        case "verify":
            report: Report = bench.verify(args.suite, _suite_config(args, bench))
            _emit(report if fmt == "json" else report.render_text(), fmt)
            return 0 if report.ok else 1

        case _:
            build_parser().print_help()
            return 3
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings.validate()
        configure_logging(args.log_level or settings.LOG_LEVEL)
        return run(args)
    except FormulaSyntaxError as e:
        print(f"error: {e}", file=sys.stderr)
        if e.text:
            print(f"  {e.text}\n  {' ' * e.position}^", file=sys.stderr)
        return e.exit_code
    except ToposforgeError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
