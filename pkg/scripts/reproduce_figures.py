#!/usr/bin/env python3
"""
Regenerate every figure dataset into one output folder.

Usage: python scripts/reproduce_figures.py [out_dir] [--reproducible]
Presets run one after another; each fans out over OM_NET_WORKERS processes.
"""

import asyncio
import logging
import sys
from pathlib import Path

import dotenv

sys.path.insert(0, str(Path(__file__).parent.parent))

# Load environment variables from .env file before app.config builds its settings
dotenv.load_dotenv(Path(__file__).parent.parent / ".env")

from app.exceptions import OMNetError  # noqa: E402
from app.export import write_csv  # noqa: E402
from app.presets import PRESETS, preset  # noqa: E402
from app.sweeps import run_async  # noqa: E402

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


async def reproduce_figures(out_dir: Path, reproducible: bool) -> int:
    """Run all presets, continuing past failures; returns the number of failed presets."""
    failed = 0
    for name in PRESETS:
        try:
            config = preset(name)
            result = await run_async(config)
            await write_csv(result, out_dir / f"{name}.csv", reproducible=reproducible)
        except OMNetError as e:
            failed += 1
            logger.error(f"Preset {name} failed: {e.detail}")
    logger.info(f"Finished {len(PRESETS) - failed} of {len(PRESETS)} presets into {out_dir}")
    return failed


if __name__ == "__main__":
    args = [a for a in sys.argv[1:] if not a.startswith("--")]
    out = Path(args[0]) if args else Path("figures")
    sys.exit(1 if asyncio.run(reproduce_figures(out, "--reproducible" in sys.argv)) else 0)
