"""Plain tabular output shared by every report: CSV and Markdown renderings."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence


@dataclass
class Table:
    columns: list[str]
    rows: list[list[str]] = field(default_factory=list)
    title: str | None = None

    def add_row(self, cells: Sequence[object]) -> None:
        if len(cells) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} cells, got {len(cells)}")
        self.rows.append(["" if c is None else str(c) for c in cells])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, title: str | None = None) -> "Table":
        reader = csv.reader(io.StringIO(text))
        header, *rows = list(reader)
        return cls(list(header), [list(r) for r in rows], title)

    def to_markdown(self) -> str:
        lines = []
        if self.title:
            lines += [f"**{self.title}**", ""]
        lines.append("| " + " | ".join(self.columns) + " |")
        lines.append("|" + "|".join("---" for _ in self.columns) + "|")
        for row in self.rows:
            lines.append("| " + " | ".join(c.replace("|", "\\|") for c in row) + " |")
        return "\n".join(lines) + "\n"

    def write(self, directory: Path, stem: str, markdown: bool = True) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / f"{stem}.csv").write_text(self.to_csv(), encoding="utf-8")
        if markdown:
            (directory / f"{stem}.md").write_text(self.to_markdown(), encoding="utf-8")


def fmt_percent(fraction: float, decimals: int = 2) -> str:
    return f"{fraction * 100:.{decimals}f}%"


def fmt_float(value: float | None, decimals: int = 3) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NA"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = f"{value:.{decimals}f}"
    # a value that rounds to zero prints unsigned
    return text[1:] if text.startswith("-") and not text.strip("-0.") else text


def full(value: float | None) -> str:
    """Shortest round-tripping representation, for full-precision CSVs."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value))


def stars(p: float | None, levels: Sequence[tuple[float, str]] = ((0.001, "***"), (0.05, "*"))) -> str:
    if p is None or math.isnan(p):
        return ""
    for threshold, mark in levels:
        if p < threshold:
            return mark
    return ""


# actor-level tables follow the two-tailed .01/.05 convention
ACTOR_LEVELS = ((0.01, "**"), (0.05, "*"))
