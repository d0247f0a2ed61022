import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from config import settings
from models import Report
from services.bimodule import check_bimodule, format_bim_element
from services.calculus import check_calculus, diff, diff_generators, ensure_valid, spans_check
from services.cartan import (
    RightCartanPair,
    action_apply,
    calculus_from_pair,
    check_left_axioms,
    check_reconstruction,
    check_right_axioms,
    ensure_rule_compatible,
    faithful_bounded,
    left_pair_from_calculus,
    mirror,
    pair_from_calculus,
    roundtrip_calculus,
    roundtrip_pair,
)
from services.duality import dual_basis, pair
from services.errors import InvalidModelError, NcError, ParseError, PresentationError
from services.ncalg import check_presentation, format_element
from services.specfile import ModelFile, emit, mirror_model, parse, parse_dual_expr, parse_expr, parse_module_expr

logger = logging.getLogger("NC_CLI")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def setup_logging(verbose: bool = False) -> None:
    # stdout carries results only; logs go to stderr
    logging.basicConfig(
        level=logging.INFO if verbose else settings.log_level,
        format='%(asctime)s | %(name)s | %(levelname)s | %(message)s',
        datefmt='%H:%M:%S',
        stream=sys.stderr,
    )


def load_model(path: str) -> ModelFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise PresentationError(f"cannot read {path}: {e.strerror}") from e
    return parse(text)


def model_pair(m: ModelFile, validate: bool = True) -> RightCartanPair:
    """The file's own rho when given, else the partial derivatives of its calculus."""
    if m.action is None:
        return pair_from_calculus(m.calculus())
    rho = m.cartan_pair()
    if validate:
        ensure_rule_compatible(rho)
    return rho


def print_report(report: Report, args) -> int:
    if args.json:
        print(report.model_dump_json(indent=2))
    else:
        print(emit(report, machine=args.machine))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_check(args) -> int:
    m = load_model(args.file)
    reports = [check_presentation(m.algebra)]
    if m.bimodule is not None:
        reports.append(check_bimodule(m.bimodule))
    if m.differential is not None:
        reports.append(check_calculus(m.calculus()))
    return print_report(Report.merge(args.file, reports), args)


def cmd_d(args) -> int:
    C = load_model(args.file).calculus()
    ensure_valid(C)
    print(format_bim_element(diff(parse_expr(args.expr, C.algebra), C), C.bimodule))
    return EXIT_OK


def cmd_partial(args) -> int:
    m = load_model(args.file)
    rho = model_pair(m)
    i = rho.bimodule.basis_index(args.basis)
    value = action_apply(rho, dual_basis(i), parse_expr(args.expr, rho.algebra))
    print(format_element(value, rho.algebra.generator_names))
    return EXIT_OK


def cmd_pair_eval(args) -> int:
    M = load_model(args.file).require_bimodule()
    value = pair(parse_dual_expr(args.dual, M), parse_module_expr(args.element, M), M)
    print(format_element(value, M.algebra.generator_names))
    return EXIT_OK


def cmd_cartan_check(args) -> int:
    rho = model_pair(load_model(args.file), validate=False)
    return print_report(check_right_axioms(rho, args.trials, args.degree, args.seed), args)


def cmd_left_check(args) -> int:
    m = load_model(args.file)
    left = mirror(m.cartan_pair()) if m.action is not None else left_pair_from_calculus(m.calculus())
    return print_report(check_left_axioms(left, args.trials, args.degree, args.seed), args)


def cmd_from_pair(args) -> int:
    rho = load_model(args.file).cartan_pair()
    C = calculus_from_pair(rho)
    report = check_reconstruction(rho, args.trials, args.degree, args.seed)
    if report.passed and not (args.machine or args.json):
        for name, value in diff_generators(C).items():
            print(f"d: {name} = {format_bim_element(value, C.bimodule)}")
        return EXIT_OK
    return print_report(report, args)


def cmd_roundtrip(args) -> int:
    m = load_model(args.file)
    reports = []
    if m.differential is not None:
        reports.append(roundtrip_calculus(m.calculus(), args.trials, args.degree, args.seed))
    if m.action is not None:
        reports.append(roundtrip_pair(m.cartan_pair(), args.trials, args.degree, args.seed))
    if not reports:
        raise PresentationError("roundtrip needs a 'd:' or 'rho:' section")
    return print_report(Report.merge(args.file, reports), args)


def cmd_faithful(args) -> int:
    rho = model_pair(load_model(args.file))
    return print_report(faithful_bounded(rho, args.degree).to_report(rho), args)


def cmd_spans(args) -> int:
    C = load_model(args.file).calculus()
    ensure_valid(C)
    return print_report(spans_check(C, args.bound).to_report(C), args)


def cmd_mirror(args) -> int:
    print(emit(mirror_model(load_model(args.file))), end="")
    return EXIT_OK


def cmd_emit(args) -> int:
    print(emit(load_model(args.file)), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nc", description="Exact checks for noncommutative calculi and Cartan pairs")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="presentation file (*.nc)")
    common.add_argument("--trials", type=int, default=settings.trials)
    common.add_argument("--degree", type=int, default=settings.degree)
    common.add_argument("--seed", type=int, default=settings.seed)
    common.add_argument("--bound", type=int, default=settings.span_bound, help="degree bound for spans")
    out = common.add_mutually_exclusive_group()
    out.add_argument("--machine", action="store_true", help="tab-separated key/status/detail lines")
    out.add_argument("--json", action="store_true", help="report as JSON")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="confluence, bimodule and calculus consistency").set_defaults(func=cmd_check)

    p = sub.add_parser("d", parents=[common], help="differential of an element")
    p.add_argument("expr")
    p.set_defaults(func=cmd_d)

    p = sub.add_parser("partial", parents=[common], help="action of a dual basis element")
    p.add_argument("basis")
    p.add_argument("expr")
    p.set_defaults(func=cmd_partial)

    p = sub.add_parser("pair-eval", parents=[common], help="pairing <X, x>")
    p.add_argument("dual", help="dual element, e.g. '( 2 ).dx'")
    p.add_argument("element", help="module element, e.g. 'dx.( x )'")
    p.set_defaults(func=cmd_pair_eval)

    sub.add_parser("cartan-check", parents=[common], help="right Cartan pair axioms").set_defaults(func=cmd_cartan_check)
    sub.add_parser("left-check", parents=[common], help="left Cartan pair axioms").set_defaults(func=cmd_left_check)
    sub.add_parser("from-pair", parents=[common], help="calculus reconstructed from rho").set_defaults(func=cmd_from_pair)
    sub.add_parser("roundtrip", parents=[common], help="calculus <-> pair round trips").set_defaults(func=cmd_roundtrip)
    sub.add_parser("faithful", parents=[common], help="bounded faithfulness of the action").set_defaults(func=cmd_faithful)
    sub.add_parser("spans", parents=[common], help="bounded test of M = A.dA").set_defaults(func=cmd_spans)
    sub.add_parser("mirror", parents=[common], help="opposite presentation").set_defaults(func=cmd_mirror)
    sub.add_parser("emit", parents=[common], help="canonical form of a file").set_defaults(func=cmd_emit)
    return parser


def cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    setup_logging(args.verbose)
    logger.info(f"nc {args.command} {args.file}")

    try:
        return args.func(args)
    except InvalidModelError as e:
        logger.warning(f"Invalid model: {e}")
        print(f"error: {e}", file=sys.stderr)
        if e.report is not None:
            print_report(e.report, args)
        return EXIT_FAIL
    except (ParseError, PresentationError) as e:
        logger.warning(f"Rejected input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NcError as e:
        logger.error(f"Unexpected engine error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(cli())


if __name__ == "__main__":
    main()
