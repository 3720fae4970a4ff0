"""
Result tables and their canonical CSV rendering.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path


def format_value(v) -> str:
    """Shortest round-trip text, so identical numbers give identical bytes."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ";".join(format_value(x) for x in v)
    return str(v)


@dataclass
class ResultTable:
    """Named columns with units, ordered rows and '#' provenance lines."""

    columns: list[tuple[str, str]]
    rows: list[tuple] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)

    @property
    def names(self) -> list[str]:
        return [c for c, _ in self.columns]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no column {name!r}; have {', '.join(self.names)}") from None

    def column(self, name: str) -> list:
        i = self.index(name)
        return [r[i] for r in self.rows]

    def select(self, names) -> "ResultTable":
        idx = [self.index(n) for n in names]
        return ResultTable([self.columns[i] for i in idx],
                           [tuple(r[i] for i in idx) for r in self.rows],
                           list(self.provenance))

    def to_csv(self) -> str:
        buf = io.StringIO()
        for line in self.provenance:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"{n}:{u}" for n, u in self.columns])
        for r in self.rows:
            w.writerow([format_value(v) for v in r])
        return buf.getvalue()

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_csv().encode("utf-8"))
        return path


def read_csv(path) -> ResultTable:
    """Parse a CSV written by :meth:`ResultTable.to_csv`; values stay strings."""
    prov, body = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            prov.append(line[2:] if line.startswith("# ") else line[1:])
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    columns = [tuple(h.rsplit(":", 1)) if ":" in h else (h, "") for h in header]
    return ResultTable(columns, [tuple(r) for r in reader], prov)
