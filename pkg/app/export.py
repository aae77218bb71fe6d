import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import aiofiles

from app.config import settings
from app.exceptions import IoError
from app.models.run import SweepResult

logger = logging.getLogger(__name__)

TIMESTAMP_PREFIX = "# generated_at: "


def format_value(value: Optional[float], digits: Optional[int] = None) -> str:
    if value is None:
        return ""
    digits = settings.csv_significant_digits if digits is None else digits
    return format(float(value), f".{digits}g")


def render_csv(result: SweepResult, reproducible: bool = False) -> str:
    buffer = io.StringIO()
    if not reproducible and result.metadata.generated_at:
        buffer.write(f"{TIMESTAMP_PREFIX}{result.metadata.generated_at}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(result.metadata.swept + ["observable", "feedback", "value", "error"])
    for row in result.rows:
        writer.writerow(
            [format_value(row.point[name]) for name in result.metadata.swept]
            + [row.observable, "on" if row.feedback else "off", format_value(row.value), row.error]
        )
    return buffer.getvalue()


def render_metadata(result: SweepResult, reproducible: bool = False) -> str:
    exclude = {"generated_at"} if reproducible else set()
    return json.dumps(result.metadata.model_dump(mode="json", exclude=exclude), indent=2, sort_keys=True) + "\n"


async def write_csv(result: SweepResult, path: Union[str, Path], reproducible: bool = False) -> Path:
    """Write the CSV table and its sidecar JSON metadata next to it"""
    path = Path(path)
    sidecar = path.with_suffix(".json")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        async with aiofiles.open(path, "w", encoding="utf-8", newline="") as f:
            await f.write(render_csv(result, reproducible))
        async with aiofiles.open(sidecar, "w", encoding="utf-8", newline="") as f:
            await f.write(render_metadata(result, reproducible))
    except OSError as e:
        raise IoError(f"Could not write {path}: {e}") from e
    logger.info(f"Wrote {len(result.rows)} rows to {path} (metadata: {sidecar.name})")
    return path


def read_csv(path: Union[str, Path]) -> List[Dict[str, Any]]:
    """Parse a CSV emitted by write_csv back into typed rows"""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            lines = [line for line in f if not line.startswith("#")]
    except OSError as e:
        raise IoError(f"Could not read {path}: {e}") from e

    reader = csv.DictReader(lines)
    fixed = {"observable", "feedback", "value", "error"}
    rows = []
    for raw in reader:
        rows.append({
            "point": {k: float(v) for k, v in raw.items() if k not in fixed},
            "observable": raw["observable"],
            "feedback": raw["feedback"] == "on",
            "value": float(raw["value"]) if raw["value"] else None,
            "error": raw["error"],
        })
    return rows
