"""CSV emission and re-reading with 15 significant digits."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.15g}"
    return str(v)


def parse_cell(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_csv(rows: list[dict], columns: list[str], target=None) -> str:
    """Write ``rows`` to ``target`` (path or text stream); returns the CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(c)) for c in columns])
    text = buf.getvalue()
    if isinstance(target, (str, Path)):
        Path(target).write_text(text)
    elif target is not None:
        target.write(text)
    return text


def read_csv(source) -> list[dict]:
    """Parse a CSV produced by :func:`write_csv` back into typed rows.

    ``source`` is a path, an open text stream, or the CSV text itself.
    """
    if source == "":
        return []
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text()
    elif hasattr(source, "read"):
        text = source.read()
    else:
        text = str(source)
    reader = csv.DictReader(io.StringIO(text))
    return [{k: parse_cell(v) for k, v in row.items()} for row in reader]
