import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

load_dotenv()

from app import __version__  # noqa: E402
from app.commands import preset, run, validate  # noqa: E402
from app.config import settings  # noqa: E402
from app.exceptions import OMNetError  # noqa: E402

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

EXIT_FAILURE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="om-net",
        description="Steady-state entanglement of optomechanical networks with all-optical feedback",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Register commands
    run.register(subparsers)
    preset.register(subparsers)
    validate.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return asyncio.run(args.handler(args))
    except OMNetError as e:
        logger.error(f"{args.command} failed: {e.detail}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
