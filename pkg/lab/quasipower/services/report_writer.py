"""
Report Writer Service
Renders study rows as deterministic CSV or JSON artifacts with a metadata header.
"""
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from quasipower.schemas import RunConfig


def format_value(value: Any) -> str:
    """
    CSV cell text: shortest round-trip floats, full-decimal integers,
    lowercase booleans, JSON for nested values.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, separators=(",", ":"), sort_keys=True)
    return str(value)


def render_csv(run: RunConfig, columns: Sequence[str], rows: List[Dict[str, Any]]) -> str:
    """
    '# key=value' metadata lines, then the header row, then one line per row.

    Raises:
        KeyError: If a row lacks one of the columns.
    """
    buffer = io.StringIO()
    metadata = run.metadata()
    for key in ("artifact", "version", "command"):
        buffer.write(f"# {key}={metadata[key]}\n")
    for key, value in metadata["parameters"].items():
        buffer.write(f"# param.{key}={format_value(value)}\n")
    for key, value in metadata.get("notes", {}).items():
        buffer.write(f"# note.{key}={format_value(value)}\n")
    writer = csv.writer(buffer, delimiter=",", lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[column]) for column in columns])
    return buffer.getvalue()


def render_json(run: RunConfig, rows: List[Dict[str, Any]]) -> str:
    """{"metadata": ..., "rows": [...]} with sorted keys."""
    return json.dumps({"metadata": run.metadata(), "rows": rows}, indent=2, sort_keys=True) + "\n"


def write_report(run: RunConfig, columns: Sequence[str], csv_rows: List[Dict[str, Any]],
                 json_rows: Optional[List[Dict[str, Any]]] = None) -> str:
    """
    Renders the report and writes it to run.output_path (stdout when unset).

    Args:
        run: Invocation echo; selects the format and destination.
        columns: CSV columns, in order.
        csv_rows: Flat rows keyed by column.
        json_rows: Full rows for JSON output; csv_rows are used when omitted.

    Returns:
        The rendered text.
    """
    if run.output_format == "json":
        text = render_json(run, json_rows if json_rows is not None else csv_rows)
    else:
        text = render_csv(run, columns, csv_rows)

    if run.output_path:
        print(f"[Publisher] Writing {run.output_format.upper()} to {run.output_path}...", file=sys.stderr)
        path = Path(run.output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")
        print("[Publisher] Done! File saved.", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return text
