import argparse
import logging

from app.commands.run import add_output_arguments, execute
from app.presets import PRESETS, preset

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("preset", help="regenerate a figure dataset")
    parser.add_argument("name", choices=sorted(PRESETS), help="figure preset")
    add_output_arguments(parser)
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace) -> int:
    return await execute(preset(args.name), args)
