import csv
import io
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from loguru import logger
from pydantic import BaseModel

from src import __version__
from src.errors import NumericalFault

SCHEMA_VERSION = 1
SWEEP_COLUMNS = ("omega_mhz", "e_se", "e_bl", "e_tr", "e_total")

class ResultRecord(BaseModel):
    schema_version: int = SCHEMA_VERSION
    command: str
    config: Optional[dict] = None
    payload: dict
    software_version: str = __version__
    wall_time_s: float

def ensure_finite(value: Any, path: str = "payload") -> None:
    """Raise NumericalFault on the first NaN or infinity inside a payload."""
    if isinstance(value, dict):
        for key, item in value.items():
            ensure_finite(item, f"{path}.{key}")
    elif isinstance(value, (list, tuple)):
        for index, item in enumerate(value):
            ensure_finite(item, f"{path}[{index}]")
    elif isinstance(value, float) and not math.isfinite(value):
        raise NumericalFault(f"Non-finite value {value!r} at {path}")

def build_record(command: str, payload: dict, wall_time_s: float, config: Optional[dict] = None) -> ResultRecord:
    ensure_finite(payload)
    return ResultRecord(command=command, config=config, payload=payload, wall_time_s=wall_time_s)

def render_json(record: ResultRecord) -> str:
    return record.model_dump_json(indent=2) + "\n"

def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(value) if isinstance(value, float) else value for value in row])
    return buffer.getvalue()

def render_payload_csv(payload: dict) -> str:
    """Flat key,value view of a scalar payload; nested sections get dotted keys."""
    rows = []

    def walk(prefix: str, value: Any) -> None:
        if isinstance(value, dict):
            for key, item in value.items():
                walk(f"{prefix}.{key}" if prefix else key, item)
        elif not isinstance(value, (list, tuple)):
            rows.append((prefix, value))

    walk("", payload)
    return render_csv(("key", "value"), rows)

def emit(text: str, path: Optional[str] = None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {len(text)} bytes to {path}")
    else:
        sys.stdout.write(text)
