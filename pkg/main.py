import argparse
import logging
import sys
from typing import List, Optional

from config import Config
from handlers import register_all
from utils.errors import UsageError

# Configure logging; stdout is reserved for CSV/JSON artifacts
logging.basicConfig(
    level=getattr(logging, str(Config.LOG_LEVEL).upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(sys.stderr)
    ]
)
logger = logging.getLogger(__name__)


class CommandParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so run() owns the exit code"""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> CommandParser:
    parser = CommandParser(
        prog="fdcalc",
        description="Finite-difference calculus from finite spectral triples",
    )
    subparsers = parser.add_subparsers(dest="command", parser_class=CommandParser)
    register_all(subparsers)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Dispatch one subcommand; 0 ok, 1 bad input, 2 failed computation"""
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        logger.error(f"❌ {e}")
        return 1
    if getattr(args, "handler", None) is None:
        parser.print_usage(sys.stderr)
        return 1

    logger.info(f"🔄 Running {args.command}")
    code = args.handler(args)
    if code == 0:
        logger.info(f"✅ {args.command} finished")
    return code


if __name__ == "__main__":
    sys.exit(run())
