import argparse
import logging
from pathlib import Path

from app.config import settings
from app.export import write_csv
from app.models.run import RunConfig
from app.sweeps import load_config, run_async

logger = logging.getLogger(__name__)


def add_output_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help=f"output directory (default: {settings.output_dir})")
    parser.add_argument("--workers", type=int, default=None, help="worker processes (default: OM_NET_WORKERS or cores)")
    parser.add_argument("--reproducible", action="store_true", help="omit the timestamp so repeated runs are byte-identical")


def register(subparsers) -> None:
    parser = subparsers.add_parser("run", help="run a sweep described by a JSON config")
    parser.add_argument("config", help="path to the run configuration")
    add_output_arguments(parser)
    parser.set_defaults(handler=handle)


async def execute(config: RunConfig, args: argparse.Namespace) -> int:
    """Run a validated config and write its CSV and metadata to the output directory"""
    result = await run_async(config, workers=args.workers)
    out_dir = Path(args.out or settings.output_dir)
    path = await write_csv(result, out_dir / f"{config.name}.csv", reproducible=args.reproducible)
    print(path)
    return 0


async def handle(args: argparse.Namespace) -> int:
    return await execute(load_config(args.config), args)

