# mirror_mass/utils/series_io.py

from __future__ import annotations

import csv
import io
import json
from typing import Any, Dict, Iterable, List, Mapping, Sequence

COLUMNS = ("tau", "mu", "mu_dot", "flux_plus", "flux_minus", "alpha", "err")


def format_float(x: float) -> str:
    """17 significant digits: parses back to the same double."""
    return "%.17g" % float(x)


def rows_to_csv(rows: Iterable[Mapping[str, float]], columns: Sequence[str] = COLUMNS) -> str:
    """Header row plus one line per row, '.' decimals, LF line endings."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: format_float(row[c]) for c in columns})
    return buf.getvalue()


def csv_to_rows(text: str, columns: Sequence[str] = COLUMNS) -> List[Dict[str, float]]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or list(reader.fieldnames) != list(columns):
        raise ValueError(f"CSV header must be {','.join(columns)}")
    return [{c: float(row[c]) for c in columns} for row in reader]


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and value != value:
        return None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def rows_to_json(rows: Iterable[Mapping[str, float]], metadata: Mapping[str, Any], columns: Sequence[str] = COLUMNS) -> str:
    """{"metadata": ..., "samples": [...]} with sorted keys; no timestamps, so equal runs give equal bytes."""
    payload = {
        "metadata": _jsonable(dict(metadata)),
        "samples": [{c: float(row[c]) for c in columns} for row in rows],
    }
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n"


def json_to_rows(text: str) -> List[Dict[str, float]]:
    data = json.loads(text)
    if not isinstance(data, dict) or "samples" not in data:
        raise ValueError("JSON output must hold a 'samples' list")
    return [{k: float(v) for k, v in row.items()} for row in data["samples"]]
