"""Delimited-table, JSON and Excel output of report rows.

Rows are plain dicts sharing their keys; numbers are printed with 4 decimals
in tables and at full precision in JSON.
"""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any

from Enums import OutputFormat
from Exceptions import PreconditionError

DECIMALS = 4


def _format_cell(value: Any, parenthesise: bool = False) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        text = 'nan' if math.isnan(value) else f"{value:.{DECIMALS}f}"
        return f"({text})" if parenthesise else text
    return str(value)


def _headers(rows: list[dict[str, Any]]) -> list[str]:
    headers: list[str] = []
    for row in rows:
        headers.extend(key for key in row if key not in headers)
    return headers


def format_table(rows: list[dict[str, Any]], delimiter: str = ',') -> str:
    """Header line plus one line per row; numeric cells of Gaussian benchmark rows are parenthesised."""
    if not rows:
        return ''
    headers = _headers(rows)
    lines = [delimiter.join(headers)]
    for row in rows:
        benchmark = row.get('method') == 'gaussian'
        lines.append(delimiter.join(_format_cell(row.get(h), benchmark and h.startswith('h=')) for h in headers))
    return '\n'.join(lines) + '\n'


def format_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + '\n'


def _sanitize_cell(value: Any) -> Any:
    if value is None or isinstance(value, (str, int, float, bool)):
        return value
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, ensure_ascii=False)
    return str(value)


def _autofit_sheet_columns(ws: Any, *, min_width: int = 10, max_width: int = 60, padding: int = 2) -> None:
    from openpyxl.utils import get_column_letter

    ws.freeze_panes = "A2"
    for col_cells in ws.columns:
        first = next(iter(col_cells), None)
        if first is None:
            continue
        max_len = max((len(str(cell.value)) for cell in col_cells if cell.value is not None), default=0)
        ws.column_dimensions[get_column_letter(first.column)].width = min(max(min_width, max_len + padding), max_width)


def write_xlsx(sheets: dict[str, list[dict[str, Any]]], out_path: Path) -> Path:
    from openpyxl import Workbook

    wb = Workbook()
    wb.remove(wb.active)
    for sheet_name, rows in sheets.items():
        ws = wb.create_sheet(title=sheet_name[:31])
        headers = _headers(rows)
        if headers:
            ws.append(headers)
            for row in rows:
                ws.append([_sanitize_cell(row.get(h)) for h in headers])
        else:
            ws.append(["info"])
            ws.append(["no rows"])
        _autofit_sheet_columns(ws)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    wb.save(out_path)
    return out_path


def emit(sheets: dict[str, list[dict[str, Any]]], payload: Any, output_format: OutputFormat,
         out: Path | None = None) -> str:
    """Render the report in the requested format, write it to `out` if given, and return the text shown.

    `sheets` are the table sections (title -> rows); `payload` is the JSON document.
    """
    output_format = OutputFormat(output_format)
    if output_format == OutputFormat.XLSX:
        if out is None:
            raise PreconditionError("xlsx output needs an --out path")
        write_xlsx(sheets, out)
        logging.info("Wrote Excel report to %s", out)
        return f"Wrote Excel report to {out}\n"

    if output_format == OutputFormat.JSON:
        text = format_json(payload)
    else:
        parts = []
        for title, rows in sheets.items():
            parts.append(f"# {title}\n{format_table(rows)}")
        text = '\n'.join(parts)

    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding='utf-8')
        logging.info("Wrote %s report to %s", output_format.value, out)
    return text
