"""Plain-text and CSV rendering of pivot grids."""

from __future__ import annotations

import csv
import io

from .cube import PivotResult
from .money import format_minor

CORNER = "row\\col"
TOTAL = "TOTAL"
ALL = "ALL"


def _label(header: tuple[str, ...]) -> str:
    return " / ".join(header) if header else ALL


def _cell(value) -> str:
    return "" if value is None else format_minor(value)


def result_rows(result: PivotResult) -> list[list[str]]:
    """The grid as rows of strings: header row, one row per row header,
    then the totals row. Shared by the CSV and table renderers."""
    head = [CORNER, *(_label(h) for h in result.col_headers), TOTAL]
    rows = [head]
    for i, header in enumerate(result.row_headers):
        rows.append([
            _label(header),
            *(_cell(v) for v in result.cells[i]),
            _cell(result.row_totals[i]),
        ])
    rows.append([TOTAL, *(_cell(v) for v in result.col_totals), _cell(result.grand_total)])
    return rows


def result_to_csv(result: PivotResult) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerows(result_rows(result))
    return out.getvalue()


def result_to_table(result: PivotResult) -> str:
    """Monospace table with right-aligned amounts, for terminal output."""
    rows = result_rows(result)
    widths = [max(len(row[c]) for row in rows) for c in range(len(rows[0]))]
    lines = []
    for r, row in enumerate(rows):
        cells = [row[0].ljust(widths[0])]
        cells += [cell.rjust(widths[c + 1]) for c, cell in enumerate(row[1:])]
        lines.append("  ".join(cells).rstrip())
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    meta = f"{result.measure} {result.aggregator} by {result.time_grain}"
    if result.currency_code:
        meta += f" [{result.currency_code}]"
    return meta + "\n" + "\n".join(lines) + "\n"
