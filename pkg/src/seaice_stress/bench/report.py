"""CSV output for benchmark records."""
from __future__ import annotations

import csv
import io
import os
from dataclasses import astuple

from .harness import CSV_COLUMNS, BenchRecord


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)  # shortest round-trip decimal
    return str(value)


def format_csv(records: list[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([_cell(v) for v in astuple(rec)])
    return buf.getvalue()


def emit_csv(records: list[BenchRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_csv(records))


def read_csv(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
