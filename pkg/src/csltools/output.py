"""
Machine-readable result files.

CSV files start with '# ' comment lines carrying the schema version, the
full run configuration as JSON and optionally a JSON summary, followed by
one header row and the records. Floats are written with 17 significant
digits so they read back exactly.

JSON files hold {"schema_version", "config", "summary"?, "records"}.
Both parsers return a dict of that same shape. Non-finite floats inside
JSON are written as the strings "inf", "-inf" and "nan".
"""

import csv
import io
import json
import math
from typing import Any, Dict, List, Optional, Sequence, TextIO

SCHEMA_VERSION = 1
VERSION_PREFIX = "# schema_version: "
CONFIG_PREFIX = "# config: "
SUMMARY_PREFIX = "# summary: "


def _strict(value: Any) -> Any:
    """Copy of a JSON-able value with non-finite floats replaced by strings."""
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {key: _strict(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_strict(item) for item in value]
    return value


def _dumps(value: Any, **kwargs) -> str:
    return json.dumps(_strict(value), allow_nan=False, **kwargs)


def _format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        text = f"{value:.17g}"
        # keep integral floats distinguishable from ints
        return text if any(c in text for c in ".enai") else text + ".0"
    if value is None:
        return ""
    return str(value)


def _parse_cell(text: str) -> Any:
    if text == "":
        return None
    for convert in (int, float):
        try:
            return convert(text)
        except ValueError:
            pass
    if text in ("true", "false"):
        return text == "true"
    return text


def render_csv(
    records: Sequence[Dict[str, Any]],
    config: Dict[str, Any],
    summary: Optional[Dict[str, Any]] = None,
) -> str:
    """
    Render records as CSV text with the configuration in comment lines.

    Args:
        records: Rows sharing the same keys, in column order
        config: JSON-serializable run configuration
        summary: Optional JSON-serializable run summary

    Returns:
        CSV text ending in a newline
    """
    buffer = io.StringIO()
    buffer.write(f"{VERSION_PREFIX}{SCHEMA_VERSION}\n")
    buffer.write(f"{CONFIG_PREFIX}{_dumps(config, sort_keys=True)}\n")
    if summary:
        buffer.write(f"{SUMMARY_PREFIX}{_dumps(summary, sort_keys=True)}\n")
    columns = list(records[0].keys()) if records else []
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow([_format_cell(record[col]) for col in columns])
    return buffer.getvalue()


def render_json(
    records: Sequence[Dict[str, Any]],
    config: Dict[str, Any],
    extra: Optional[Dict[str, Any]] = None,
) -> str:
    """Render records as an indented JSON document with schema version and config."""
    document = {"schema_version": SCHEMA_VERSION, "config": config}
    if extra:
        document.update(extra)
    document["records"] = list(records)
    return _dumps(document, indent=2) + "\n"


def parse_csv(text: str) -> Dict[str, Any]:
    """Inverse of render_csv."""
    document: Dict[str, Any] = {"schema_version": None, "config": {}}
    body = []
    for line in text.splitlines():
        if line.startswith(VERSION_PREFIX):
            document["schema_version"] = int(line[len(VERSION_PREFIX):])
        elif line.startswith(CONFIG_PREFIX):
            document["config"] = json.loads(line[len(CONFIG_PREFIX):])
        elif line.startswith(SUMMARY_PREFIX):
            document["summary"] = json.loads(line[len(SUMMARY_PREFIX):])
        elif not line.startswith("#"):
            body.append(line)
    reader = csv.reader(body)
    records: List[Dict[str, Any]] = []
    columns = next(reader, None)
    if columns:
        records = [{col: _parse_cell(cell) for col, cell in zip(columns, row)} for row in reader]
    document["records"] = records
    return document


def parse_json(text: str) -> Dict[str, Any]:
    return json.loads(text)


def write_output(text: str, path: Optional[str], stream: TextIO) -> None:
    """Write rendered output to path, or to stream when no path is given."""
    if path is None or path == "-":
        stream.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
