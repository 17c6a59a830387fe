"""Command line: ``triosc run``, ``triosc verify`` and ``triosc oracle-check``.

Exit codes: 0 success, 1 validation error, 2 numerical-tolerance failure,
3 I/O error.  The TRIOSC_SEED environment variable is reserved; nothing in
the tool is random, so it is currently ignored.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import (
    ConvergenceError,
    InvalidInputError,
    NMaxTooSmallError,
    TruncationError,
    UndefinedValueError,
    UnsupportedRegimeError,
)
from .scenario import AnalysisError, Scenario, ToleranceFailure, load_scenario, run_scenario

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_TOLERANCE = 2
EXIT_IO = 3

_TOLERANCE_ERRORS = (ConvergenceError, TruncationError, NMaxTooSmallError, ToleranceFailure)
_VALIDATION_ERRORS = (InvalidInputError, UnsupportedRegimeError, UndefinedValueError)


def _exit_code(exc):
    cause = exc.cause if isinstance(exc, AnalysisError) else exc
    if isinstance(cause, _TOLERANCE_ERRORS):
        return EXIT_TOLERANCE
    if isinstance(cause, _VALIDATION_ERRORS):
        return EXIT_VALIDATION
    return EXIT_TOLERANCE


def _load(path):
    try:
        return load_scenario(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO) from exc
    except InvalidInputError as exc:
        print(f"error: invalid scenario {path}:", file=sys.stderr)
        for line in str(exc).splitlines():
            print(f"  {line}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION) from exc


def _execute(scenario, out, threads):
    try:
        paths = run_scenario(scenario, out, threads=threads)
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in paths:
        print(path)
    return EXIT_OK


def cmd_run(args):
    scenario = _load(args.config)
    return _execute(scenario, args.out, args.threads)


def cmd_oracle_check(args):
    scenario = _load(args.config)
    raw = scenario.model_dump(mode="json")
    checks = [a for a in raw["analyses"] if a["kind"] == "oracle-check"]
    # without explicit checks, test the scenario's own couplings, state and time grid
    raw["analyses"] = checks or [{"kind": "oracle-check"}]
    return _execute(Scenario.model_validate(raw), args.out, args.threads)


def cmd_verify(args):
    from .verify import run_checks

    failures = 0
    for result in run_checks():
        status = "PASS" if result.passed else "FAIL"
        failures += not result.passed
        print(f"{status}  {result.name}: {result.detail} ({result.seconds:.2f} s)")
    return EXIT_OK if failures == 0 else EXIT_TOLERANCE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are validation errors, not tolerance failures
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="triosc",
        description="Three coupled bosonic modes: squeezing, photon statistics and phase-space functions.",
        epilog="TRIOSC_SEED is reserved and currently unused (the tool is deterministic).",
    )
    parser.add_argument("--version", action="version", version=f"triosc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="evaluate every analysis of a scenario file")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None, help="output directory (default: scenario output_dir or .)")
    run.add_argument("--threads", type=int, default=1, help="analyses evaluated concurrently")
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="run the invariant suite")
    verify.set_defaults(func=cmd_verify)

    oracle = sub.add_parser("oracle-check", help="compare engine moments with truncated Fock-space propagation")
    oracle.add_argument("config", type=Path)
    oracle.add_argument("--out", type=Path, default=None)
    oracle.add_argument("--threads", type=int, default=1)
    oracle.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
