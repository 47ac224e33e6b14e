"""Sweep tables and their bit-stable CSV/JSON serialization.

CSV layout::

    # provenance: {"command": ..., ...}
    col1,col2,...
    1.23456789012,...

JSON layout::

    {"provenance": {...}, "schema": [...], "rows": [{"col1": ..., ...}, ...]}

Floats carry 12 significant digits in CSV and 17 in JSON; ints and strings
are written verbatim.  Lines end with LF and no timestamps or host data are
recorded, so output bytes depend only on the command and its inputs.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import BadSpec

CSV_DIGITS = 12
JSON_DIGITS = 17
PROVENANCE_PREFIX = "# provenance: "
_INT_RE = re.compile(r"^[+-]?\d+$")


def _fmt(v: Any, digits: int) -> str:
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        out = format(v, f".{digits}g")
        # keep float cells recognisable as floats when re-parsed
        if not any(ch in out for ch in ".en"):
            out += ".0"
        return out
    return str(v)


def _parse_cell(s: str) -> Any:
    if _INT_RE.match(s):
        return int(s)
    try:
        return float(s)
    except ValueError:
        return s


def _canonical(v: Any) -> Any:
    # numpy scalars become plain Python values; flags are stored as 0/1
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, (str, int, float)) or v is None:
        return v
    raise BadSpec(f"unsupported cell type {type(v).__name__}")


def _json_value(v: Any) -> str:
    if isinstance(v, float):
        if not math.isfinite(v):
            return json.dumps(_fmt(v, JSON_DIGITS))
        return _fmt(v, JSON_DIGITS)
    if v is None:
        return "null"
    if isinstance(v, int):
        return str(v)
    return json.dumps(v)


def _json_parse_value(v: Any) -> Any:
    if isinstance(v, str) and v in ("nan", "inf", "-inf"):
        return float(v)
    return v


@dataclass
class SweepTable:
    """Rows of scalars with a fixed column schema and provenance record."""

    schema: tuple
    rows: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.schema = tuple(str(c) for c in self.schema)
        if len(set(self.schema)) != len(self.schema):
            raise BadSpec("duplicate column names")
        rows = []
        for r in self.rows:
            if isinstance(r, dict):
                r = [r[c] for c in self.schema]
            r = tuple(_canonical(v) for v in r)
            if len(r) != len(self.schema):
                raise BadSpec(f"row of length {len(r)} for {len(self.schema)} columns")
            rows.append(r)
        self.rows = rows
        self.provenance = dict(self.provenance)

    def append(self, row) -> None:
        if isinstance(row, dict):
            row = [row[c] for c in self.schema]
        row = tuple(_canonical(v) for v in row)
        if len(row) != len(self.schema):
            raise BadSpec(f"row of length {len(row)} for {len(self.schema)} columns")
        self.rows.append(row)

    def column(self, name: str) -> list:
        i = self.schema.index(name)
        return [r[i] for r in self.rows]

    def records(self) -> list[dict]:
        return [dict(zip(self.schema, r)) for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SweepTable):
            return NotImplemented
        return (self.schema == other.schema and self.provenance == other.provenance
                and len(self.rows) == len(other.rows)
                and all(_row_eq(a, b) for a, b in zip(self.rows, other.rows)))

    # -- emission ----------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(PROVENANCE_PREFIX + json.dumps(self.provenance, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.schema)
        for r in self.rows:
            w.writerow([_fmt(v, CSV_DIGITS) for v in r])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for r in self.rows:
            items = ", ".join(f"{json.dumps(c)}: {_json_value(v)}" for c, v in zip(self.schema, r))
            rows.append("{" + items + "}")
        body = ",\n  ".join(rows)
        return ("{\"provenance\": " + json.dumps(self.provenance, sort_keys=True)
                + ",\n \"schema\": " + json.dumps(list(self.schema))
                + ",\n \"rows\": [\n  " + body + "\n ]}\n")

    def emit(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise BadSpec(f"unknown format {fmt!r}")

    # -- parsing -----------------------------------------------------------
    @classmethod
    def from_csv(cls, text: str) -> "SweepTable":
        lines = text.split("\n")
        prov = {}
        if lines and lines[0].startswith(PROVENANCE_PREFIX):
            prov = json.loads(lines[0][len(PROVENANCE_PREFIX):])
            lines = lines[1:]
        reader = csv.reader(io.StringIO("\n".join(lines)))
        try:
            schema = next(reader)
        except StopIteration:
            raise BadSpec("missing header row") from None
        rows = [[_parse_cell(c) for c in r] for r in reader if r]
        return cls(tuple(schema), rows, prov)

    @classmethod
    def from_json(cls, text: str) -> "SweepTable":
        obj = json.loads(text)
        schema = tuple(obj["schema"])
        rows = [[_json_parse_value(r[c]) for c in schema] for r in obj["rows"]]
        return cls(schema, rows, obj.get("provenance", {}))


def _row_eq(a: Sequence, b: Sequence) -> bool:
    for x, y in zip(a, b):
        if isinstance(x, float) and isinstance(y, float) and math.isnan(x) and math.isnan(y):
            continue
        if x != y:
            return False
    return True


def emit(table: SweepTable, fmt: str = "csv") -> str:
    return table.emit(fmt)


def parse(text: str, fmt: str | None = None) -> SweepTable:
    """Parse emitted text; the format is sniffed when ``fmt`` is omitted."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "csv"
    if fmt == "csv":
        return SweepTable.from_csv(text)
    if fmt == "json":
        return SweepTable.from_json(text)
    raise BadSpec(f"unknown format {fmt!r}")


def write_table(table: SweepTable, path: str, fmt: str = "csv") -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(table.emit(fmt))


def read_config(path: str) -> dict:
    """Flat ``key = value`` config; ``#`` starts a comment, values stay strings."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise BadSpec(f"{path}:{n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def fit_loglog_slope(x: Iterable[float], y: Iterable[float]) -> float:
    """Least-squares slope of ``log|y|`` against ``log x``."""
    lx = np.log(np.asarray(list(x), dtype=float))
    ly = np.log(np.abs(np.asarray(list(y), dtype=float)))
    return float(np.polyfit(lx, ly, 1)[0])
