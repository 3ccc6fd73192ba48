#!/usr/bin/env python3
"""
Command-line front end: generate, verify and report on Euler-quotient threshold sequences.

    python cli.py generate -p 3 -r 2 -n 54 --format ascii --out e.txt
    python cli.py verify -p 3 -r 2 --all
    python cli.py report -p 5 -r 2 --out report.json
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

import utilities as util
from app import RunConfig, build_report, run_verification
from errors import EulerSeqError, OutputError, ParameterError, WieferichError
from sequences import generate_threshold

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_IO = 3

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

logger = logging.getLogger("eulerseq")


def status(message: str) -> None:
    print(message, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eulerseq", description="Euler-quotient binary threshold sequences over GF(2^N)"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-p", type=int, required=True, help="odd prime p")
    common.add_argument("-r", type=int, required=True, dest="r_frak", help="level r >= 1")
    common.add_argument("--out", help="output file (stdout when omitted)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")

    sub = parser.add_subparsers(dest="command", required=True)

    generate = sub.add_parser("generate", parents=[common], help="write the sequence as an ESEQ1 file")
    generate.add_argument("-n", "--count", type=int, help="number of bits (one period by default)")
    generate.add_argument("--format", choices=["ascii", "bin", "json"], default="ascii")

    for name, text in (("verify", "run the verification suite"), ("report", "write the analysis document")):
        command = sub.add_parser(name, parents=[common], help=text)
        command.add_argument("--max-degree", type=int, help="ceiling on the ambient field degree")
        command.add_argument("--no-timing", action="store_true", help="zero timings, omit resource figures")
        command.add_argument("--extended", action="store_true", help="allow the r=1 trace representation")
        if name == "verify":
            command.add_argument("--all", action="store_true", help="every check group (default)")
            for group in ("lemmas", "defining", "trace", "lincomp"):
                command.add_argument(f"--{group}", action="store_true", help=f"{group} checks")
    return parser


def configure_logging(verbose: int) -> None:
    level = os.getenv("EULERSEQ_LOG_LEVEL", "WARNING").upper()
    if verbose == 1:
        level = "INFO"
    elif verbose >= 2:
        level = "DEBUG"
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def to_config(args: argparse.Namespace) -> RunConfig:
    fields = {"command": args.command, "p": args.p, "r_frak": args.r_frak, "out": args.out}
    if args.command == "generate":
        fields.update(count=args.count, format=args.format)
    else:
        fields.update(timing=not args.no_timing, extended=args.extended)
        if args.max_degree is not None:
            fields["max_degree"] = args.max_degree
        if args.command == "verify" and not args.all:
            for group in ("lemmas", "defining", "trace", "lincomp"):
                fields[group] = getattr(args, group)
    return RunConfig(**fields)


def emit(config: RunConfig, payload) -> None:
    if config.out:
        util.write_to_file(config.out, payload)
        status(f"✅ Wrote {config.out}")
    elif isinstance(payload, bytes):
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    else:
        sys.stdout.write(payload)


def cmd_generate(config: RunConfig) -> int:
    seq = generate_threshold(config.params, config.count)
    emit(config, util.encode_sequence(seq, config.format))
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    report = run_verification(config)
    emit(config, util.dump_json(report.model_dump(mode="json", exclude_none=True)))
    for warning in report.warnings:
        status(f"⚠️ {warning}")
    failed = [result.check for result in report.checks if result.passed is False]
    if failed:
        status(f"❌ {len(failed)} check(s) failed: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    ran = sum(1 for result in report.checks if result.passed)
    status(f"✅ {ran} check(s) passed, {len(report.checks) - ran} skipped")
    return EXIT_OK


def cmd_report(config: RunConfig) -> int:
    report = build_report(config)
    emit(config, util.dump_json(report.model_dump(mode="json", exclude_none=True)))
    lc = report.linear_complexity
    marker = "✅" if lc.agree else "❌"
    status(f"{marker} Linear complexity: bm={lc.bm_value} closed_form={lc.closed_form_value} weight={lc.weight_value}")
    return EXIT_OK if lc.agree else EXIT_CHECK_FAILED


COMMANDS = {"generate": cmd_generate, "verify": cmd_verify, "report": cmd_report}


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = to_config(args)
        if config.command == "generate" and config.count is None and config.params.period > config.max_count:
            raise ParameterError(f"period {config.params.period} exceeds ceiling {config.max_count}; pass -n")
        return COMMANDS[config.command](config)
    except ValidationError as e:
        for error in e.errors():
            status(f"❌ {error['msg'].removeprefix('Value error, ')}")
        return EXIT_INVALID
    except WieferichError as e:
        status(f"⚠️ {e}")
        return EXIT_INVALID
    except ParameterError as e:
        status(f"❌ {e}")
        return EXIT_INVALID
    except OutputError as e:
        status(f"❌ {e}")
        return EXIT_IO
    except EulerSeqError as e:
        logger.exception("Unexpected failure")
        status(f"❌ {e}")
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
