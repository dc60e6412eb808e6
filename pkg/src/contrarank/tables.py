"""Report tables: a small grid model with markdown and CSV round-tripping.

Numeric cells are printed with two decimals; undefined cells print "n/a".
CSV output parses back into an equal table, so emitted reports can be
consumed programmatically.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

Cell = str | float | None


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list[Cell]]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Table):
            return NotImplemented
        return (
            self.name == other.name
            and self.columns == other.columns
            and [[format_cell(c) for c in row] for row in self.rows]
            == [[format_cell(c) for c in row] for row in other.rows]
        )


def format_cell(cell: Cell) -> str:
    if cell is None:
        return "n/a"
    if isinstance(cell, float):
        return f"{cell:.2f}"
    return str(cell)


def _parse_cell(text: str) -> Cell:
    if text == "n/a":
        return None
    try:
        return float(text)
    except ValueError:
        return text


def to_markdown(table: Table) -> str:
    lines = [f"## {table.name}", ""]
    lines.append("| " + " | ".join(table.columns) + " |")
    lines.append("|" + "|".join(" --- " for _ in table.columns) + "|")
    for row in table.rows:
        lines.append("| " + " | ".join(format_cell(c) for c in row) + " |")
    return "\n".join(lines) + "\n"


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["#table", table.name])
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(c) for c in row])
    return buf.getvalue()


def from_csv(text: str) -> Table:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if len(rows) < 2 or rows[0][:1] != ["#table"]:
        raise ValueError("not a table CSV: missing #table header")
    name = rows[0][1] if len(rows[0]) > 1 else ""
    columns = rows[1]
    data = [[_parse_cell(cell) for cell in row] for row in rows[2:]]
    return Table(name=name, columns=columns, rows=data)


def render(table: Table, fmt: str) -> str:
    if fmt == "markdown":
        return to_markdown(table)
    if fmt == "csv":
        return to_csv(table)
    raise ValueError(f"unknown table format {fmt!r}")
