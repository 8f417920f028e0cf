"""Command-line entry point.

Exit statuses: 0 success, 1 type error, 2 parse error, 3 runtime error,
4 property failure, 5 usage error.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .evaluator import (
    ArityMismatch,
    BoxV,
    EvalError,
    IntV,
    StarV,
    UnknownMain,
    eval_program,
    format_value,
    parameter_types,
)
from .parser import ParseError, parse_program
from .syntax import TBox, TInt, TStar
from .typechecker import TypeCheckError, check_program
from . import verify

OK, TYPE_ERROR, PARSE_ERROR, RUNTIME_ERROR, PROPERTY_FAILURE, USAGE_ERROR = range(6)


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="gradedflow", description="Check, run and fuzz graded-modal programs.")
    sub = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)

    check = sub.add_parser("check", help="parse and type check files")
    check.add_argument("files", nargs="+", metavar="FILE")

    run = sub.add_parser("run", help="evaluate a function")
    run.add_argument("file", metavar="FILE")
    run.add_argument("--main", required=True, metavar="NAME")
    run.add_argument("--arg", type=int, action="append", default=[], metavar="INT")

    fuzz = sub.add_parser("fuzz-ni", help="fuzz noninterference of one function")
    fuzz.add_argument("file", metavar="FILE")
    fuzz.add_argument("--fn", required=True, metavar="NAME")
    fuzz.add_argument("--mode", required=True, choices=["conf", "integ"])
    fuzz.add_argument("--trials", type=int, default=100)
    fuzz.add_argument("--seed", type=int, default=0)

    laws = sub.add_parser("laws", help="check the relative-monad laws")
    laws.add_argument("--trials", type=int, default=200)
    laws.add_argument("--seed", type=int, default=0)
    return parser


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_program(text, path)


def _load_checked(path: str, out, err) -> tuple[Optional[object], int]:
    try:
        program = _load(path)
        check_program(program)
    except ParseError as exc:
        print(exc.diagnostic(), file=err)
        return None, PARSE_ERROR
    except TypeCheckError as exc:
        print(exc.diagnostic(), file=err)
        return None, TYPE_ERROR
    return program, OK


def _cmd_check(args, out, err) -> int:
    status = OK
    for path in args.files:
        program, code = _load_checked(path, out, err)
        if program is not None:
            print(f"OK {path}", file=out)
        status = max(status, code)
    return status


def _wrap(value: int, ty):
    match ty:
        case TInt():
            return IntV(value)
        case TBox(_, TInt()):
            return BoxV(IntV(value))
        case TStar(TInt()):
            return StarV(IntV(value))
    raise UsageError(f"--arg cannot supply a parameter of type {ty}")


def _cmd_run(args, out, err) -> int:
    program, code = _load_checked(args.file, out, err)
    if program is None:
        return code
    decl = program.function(args.main)
    try:
        if decl is None:
            raise UnknownMain(f"no function named '{args.main}'")
        params = parameter_types(decl.signature)
        if len(args.arg) != len(params):
            raise ArityMismatch(f"'{args.main}' takes {len(params)} arguments, given {len(args.arg)}")
        result = eval_program(program, args.main, [_wrap(a, ty) for a, ty in zip(args.arg, params)])
    except (EvalError, RecursionError) as exc:
        print(f"{args.file}: runtime error: {type(exc).__name__}: {exc}", file=err)
        return RUNTIME_ERROR
    print(format_value(result), file=out)
    return OK


def _print_report(report: verify.Report, out) -> int:
    print(report.to_text(), file=out)
    print(f"summary: {report.to_json()}", file=out)
    return OK if report.passed else PROPERTY_FAILURE


def _cmd_fuzz(args, out, err) -> int:
    program, code = _load_checked(args.file, out, err)
    if program is None:
        return code
    fuzz = verify.fuzz_confidentiality if args.mode == "conf" else verify.fuzz_integrity
    try:
        report = fuzz(program, args.fn, args.trials, args.seed)
    except verify.SignatureMismatch as exc:
        raise UsageError(str(exc)) from None
    return _print_report(report, out)


def _cmd_laws(args, out, err) -> int:
    return _print_report(verify.check_monad_laws(args.trials, args.seed), out)


COMMANDS = {"check": _cmd_check, "run": _cmd_run, "fuzz-ni": _cmd_fuzz, "laws": _cmd_laws}


def run_cli(argv: Sequence[str], out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
        if args.command is None:
            raise UsageError(parser.format_usage().rstrip())
        if getattr(args, "trials", 0) < 0:
            raise UsageError("--trials must be non-negative")
        return COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        print(str(exc).rstrip(), file=err)
        return USAGE_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run_cli(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
