import argparse
import json
import logging

from app.exceptions import ConfigError
from app.models.run import RunConfig
from app.sweeps import load_config, plan_sweep

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("validate", help="check a run configuration without solving anything")
    parser.add_argument("config", nargs="?", help="path to the run configuration")
    parser.add_argument("--schema", action="store_true", help="print the JSON schema of run configurations")
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace) -> int:
    if args.schema:
        print(json.dumps(RunConfig.model_json_schema(), indent=2))
        return 0
    if not args.config:
        raise ConfigError("a config path is required unless --schema is given")

    config = load_config(args.config)
    points, tasks = plan_sweep(config)
    print(f"OK: {config.name} ({config.model.value}, {len(points)} grid points, {config.expected_rows} rows)")
    return 0
