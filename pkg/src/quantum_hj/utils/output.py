"""
Table and summary writers.

CSV rows are written with a fixed header, '\\n' line endings and floats in
scientific notation with 17 significant digits, so identical runs produce
byte-identical files on any platform or locale. JSON documents carry a
top-level schema version and sorted keys.
"""

import csv
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, TextIO, Union

SCHEMA_VERSION = 1


def format_value(value: Any) -> str:
    """
    Render one CSV cell.

    Returns:
        '%.16e' for floats ('nan', 'inf', '-inf' for non-finite values),
        'true'/'false' for booleans, str() otherwise.

        # 0.1 -> '1.0000000000000001e-01'
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.16e}"
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Replace non-finite floats with None and tuples with lists, recursively."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


@contextmanager
def open_output(path: Optional[Union[str, Path]]) -> Iterator[TextIO]:
    """Yield a text stream for path, or stdout when path is None."""
    if path is None:
        yield sys.stdout
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as stream:
        yield stream


def write_csv(stream: TextIO, columns: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> None:
    """Write a header row and one row per mapping, in column order."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[column]) for column in columns])


def write_json(stream: TextIO, document: Dict[str, Any]) -> None:
    """Write a JSON document with sorted keys and a trailing newline."""
    json.dump(to_jsonable(document), stream, indent=2, sort_keys=True, allow_nan=False)
    stream.write("\n")


def build_document(
    command: str,
    run_config: Dict[str, Any],
    settings: Dict[str, Any],
    summary: Dict[str, Any],
    columns: Optional[Sequence[str]] = None,
    rows: Optional[List[Mapping[str, Any]]] = None,
) -> Dict[str, Any]:
    """
    Assemble the versioned JSON document of one run.

    Returns:
        {"schema": 1, "command", "config", "settings", "summary"} plus
        "columns" and "rows" when the table is embedded.
    """
    document: Dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": run_config,
        "settings": settings,
        "summary": summary,
    }
    if rows is not None:
        document["columns"] = list(columns or [])
        document["rows"] = [{column: row[column] for column in document["columns"]} for row in rows]
    return document


def summary_path(out: Union[str, Path]) -> Path:
    """Sidecar summary path next to a CSV output: <out>.summary.json."""
    out = Path(out)
    return out.with_name(out.name + ".summary.json")
