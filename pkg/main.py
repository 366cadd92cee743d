#!/usr/bin/env python3
"""
twf - exact checks for the canonically Z2-twisted fermionic module
Runs identity suites, dumps vertex-operator coefficients and evaluates correlators.

Examples:
    python main.py suite crt
    python main.py suite all --max-weight 4 --jobs 4 --out results.jsonl
    python main.py coeff "e1(-1/2)" "u0" --window=-3,3
    python main.py correlate "e1(-1/2)" "eb1(-1/2)" u0 u0 --z1 2 --z2 1 -p 0
"""

import argparse
import asyncio
import logging
import os
import signal
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

# Add current directory to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.analysis import RegionError, correlator_values
from src.config.schemas import CorrelatorRecord, SuiteConfig, SuiteName
from src.config.settings import DEFAULT_CUTOFF, LOG_FILE, LOG_FORMAT, LOG_LEVEL
from src.series import WindowUnderflowError, make_window
from src.suite_runner import EXIT_ERROR, EXIT_PASS, EXIT_UNDERFLOW, SuiteRunner
from src.suites import build_cases
from src.utils.config_loader import load_suite_config
from src.utils.safe_output import emit_json_line
from src.utils.word_parser import WordParseError, parse_v_word, parse_w_element, parse_w_word
from src.vertex_ops import actual_yw, naive_yw

logger = logging.getLogger(__name__)

EXIT_USAGE = 64
EXIT_REGION = 65


class UsageError(Exception):
    pass


class CliParser(argparse.ArgumentParser):
    """argparse that reports usage errors to the caller instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(message)


def configure_logging(verbose: bool = False):
    # stdout carries JSON lines
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, LOG_LEVEL),
        format=LOG_FORMAT,
        handlers=[
            logging.StreamHandler(sys.stderr),
            logging.FileHandler(LOG_FILE),
        ],
        force=True,
    )


def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("--M", type=int, dest="M", help="half-rank of h = C^{2M}")
    common.add_argument("--max-weight", dest="max_weight", help="largest total weight of generated words")
    common.add_argument("--window", help="exponent window 'lo,hi' (use --window=-8,8)")
    common.add_argument("--seed", type=int, help="seed for random tables and sampled points")
    common.add_argument("--jobs", type=int, help="cases evaluated concurrently")
    common.add_argument("--out", dest="output", help="write JSON lines here instead of stdout")
    common.add_argument("--strict", action="store_true", default=None, help="region violations are errors")
    common.add_argument("--max-cases", type=int, dest="max_cases", help="stop each suite after this many cases")
    common.add_argument("--config", dest="config_file", help="YAML file with suite defaults")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = CliParser(prog="twf", description="Exact checks for the twisted fermionic module")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    suite = commands.add_parser("suite", parents=[common], help="run an identity suite")
    suite.add_argument("name", choices=[s.value for s in SuiteName])

    coeff = commands.add_parser("coeff", parents=[common], help="dump Y_W(v, x)w on the window")
    coeff.add_argument("v", help="V word, e.g. e1(-1/2)eb1(-3/2)1")
    coeff.add_argument("w", help="W word, e.g. eb1(-1)e1(0)u0")
    coeff.add_argument("--naive", action="store_true", help="naive operator without exp(Delta)")

    correlate = commands.add_parser("correlate", parents=[common], help="evaluate <w', Y(v1,z1)Y(v2,z2)w>")
    correlate.add_argument("v1")
    correlate.add_argument("v2")
    correlate.add_argument("w")
    correlate.add_argument("wprime")
    correlate.add_argument("--z1", type=complex, required=True, help="complex point, e.g. 2 or 1+0.5j")
    correlate.add_argument("--z2", type=complex, required=True)
    correlate.add_argument("-p", type=int, default=0, help="branch index")
    correlate.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF, help="initial series cutoff")
    return parser


def config_from_args(args: argparse.Namespace) -> SuiteConfig:
    flags = {
        name: getattr(args, name)
        for name in ("M", "max_weight", "window", "seed", "jobs", "output", "strict", "max_cases")
    }
    return load_suite_config(flags, args.config_file)


def setup_signal_handlers(runner: SuiteRunner):
    """Setup signal handlers for graceful shutdown."""

    def signal_handler(signum, frame):
        logger.info(f"Received signal {signum}, initiating shutdown...")
        runner.request_shutdown()

    # Handle SIGINT (Ctrl+C) and SIGTERM
    signal.signal(signal.SIGINT, signal_handler)
    signal.signal(signal.SIGTERM, signal_handler)


async def cmd_suite(name: str, config: SuiteConfig) -> int:
    cases = build_cases(SuiteName(name), config)
    runner = SuiteRunner(config)
    setup_signal_handlers(runner)
    return await runner.run(cases)


def cmd_coeff(v_text: str, w_text: str, config: SuiteConfig, naive: bool = False) -> int:
    v, w = parse_v_word(v_text), parse_w_element(w_text)
    window = make_window(*config.window)
    series = (naive_yw if naive else actual_yw)(v, w, window)
    emit_json_line(
        {
            "v": str(v),
            "w": w.to_json_terms(),
            "operator": "naive" if naive else "actual",
            "series": series.to_json(),
        }
    )
    return EXIT_PASS


def cmd_correlate(args: argparse.Namespace, config: SuiteConfig) -> int:
    v1, v2 = parse_v_word(args.v1), parse_v_word(args.v2)
    w, wprime = parse_w_word(args.w), parse_w_word(args.wprime)
    values = correlator_values(v1, v2, w, wprime, args.z1, args.z2, args.p, args.cutoff, strict=config.strict)
    record = CorrelatorRecord(**values)
    emit_json_line(record)
    if record.branch_mismatch:
        logger.warning("⚠️  iterate series converged off the principal branch")
    return EXIT_PASS


async def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, build the run configuration and dispatch the subcommand."""

    # Load environment variables
    load_dotenv()

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        configure_logging()
        logger.error(f"❌ {e}")
        return EXIT_USAGE

    configure_logging(args.verbose)
    try:
        config = config_from_args(args)
    except (ValidationError, FileNotFoundError, ValueError) as e:
        logger.error(f"❌ Invalid configuration: {e}")
        return EXIT_USAGE

    logger.info(f"🚀 twf {args.command}: M={config.M}, max_weight={config.max_weight}, window={list(config.window)}")

    try:
        if args.command == "suite":
            return await cmd_suite(args.name, config)
        if args.command == "coeff":
            return cmd_coeff(args.v, args.w, config, naive=args.naive)
        return cmd_correlate(args, config)

    except WordParseError as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE
    except RegionError as e:
        logger.error(f"❌ Region error: {e}")
        return EXIT_REGION
    except WindowUnderflowError as e:
        logger.error(f"⚠️  Window underflow: {e}")
        return EXIT_UNDERFLOW
    except Exception as e:
        logger.error(f"❌ twf {args.command} failed: {e}")
        return EXIT_ERROR


def print_startup_banner():
    """Print startup banner to stderr; stdout is reserved for records."""
    banner = """
╔══════════════════════════════════════════════════════════════════════════════╗
║                 twf - twisted fermionic module, exact checks                 ║
╠══════════════════════════════════════════════════════════════════════════════╣
║  🧮 Suites: wick, assoc, shuffle, crt, axioms, dcomm, all                    ║
║  📐 Coefficients: Y_W(v, x)w on a finite exponent window                     ║
║  📈 Correlators: product / iterate / algebraic closed form                   ║
╚══════════════════════════════════════════════════════════════════════════════╝
    """
    print(banner, file=sys.stderr)


if __name__ == "__main__":
    # Print startup banner
    print_startup_banner()

    try:
        exit_code = asyncio.run(main())
        sys.exit(exit_code)

    except KeyboardInterrupt:
        logger.info("🛑 Interrupted by user")
        sys.exit(130)
