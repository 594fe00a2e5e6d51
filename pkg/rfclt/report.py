"""Report files: report.json plus optional CSV side files"""

import csv
import json
import logging
import os

from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence

_LOG = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1

REPORT_FILE = "report.json"
SAMPLES_FILE = "samples.csv"

# Excluded when comparing reports for determinism
TIMESTAMP_FIELD = "timestamp"


def build_report(command: str, passed: bool, results: dict, config: Optional[dict] = None) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": command,
        TIMESTAMP_FIELD: datetime.now(timezone.utc).isoformat(),
        "passed": bool(passed),
        "config": config,
        "results": results,
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"


def without_timestamp(report: dict) -> dict:
    return {key: value for key, value in report.items() if key != TIMESTAMP_FIELD}


def write_report(out_dir: str, report: dict) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, REPORT_FILE)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps_report(report))
    _LOG.info("Report written to %s", path)
    return path


def write_csv(
    out_dir: str, header: Sequence[str], rows: Iterable[Sequence], name: str = SAMPLES_FILE
) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    _LOG.info("CSV written to %s", path)
    return path


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return str(value)

