"""
CSV ingestion and emission of count data.

Fringe files use the columns theta_b_deg,count; count-table files use
theta_a_deg,theta_b_deg,n_pp,n_pm,n_mp,n_mm where p and m stand for the
outcome values +1 and -1.
"""

import csv
import io
from pathlib import Path
from typing import Iterable, List, TextIO, Union

import numpy as np

from simulation import CountTable

from .interfaces import FringeCurve, IncompleteDataError

FRINGE_COLUMNS = ["theta_b_deg", "count"]
TABLE_COLUMNS = ["theta_a_deg", "theta_b_deg", "n_pp", "n_pm", "n_mp", "n_mm"]

PathOrStream = Union[str, Path, TextIO]


def format_real(value: float) -> str:
    """Reals are written with six significant digits."""
    return f"{value:.6g}"


def _rows(source: PathOrStream, columns: List[str]) -> List[dict]:
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as handle:
            return _rows(handle, columns)
    reader = csv.DictReader(source)
    missing = [c for c in columns if c not in (reader.fieldnames or [])]
    if missing:
        raise IncompleteDataError(f"CSV is missing columns: {', '.join(missing)}")
    return list(reader)


def _write(target: PathOrStream, columns: List[str], rows: Iterable[List[str]]) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as handle:
            _write(handle, columns, rows)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)


def read_fringe_csv(source: PathOrStream, basis: str) -> FringeCurve:
    """Read a theta_b_deg,count CSV into a FringeCurve."""
    rows = _rows(source, FRINGE_COLUMNS)
    return FringeCurve(basis, tuple((float(r["theta_b_deg"]), int(r["count"])) for r in rows))


def write_fringe_csv(curve: FringeCurve, target: PathOrStream) -> None:
    _write(target, FRINGE_COLUMNS, ([format_real(theta), str(count)] for theta, count in curve.points))


def read_count_table_csv(source: PathOrStream) -> CountTable:
    """Read a six-column count-table CSV."""
    counts = {}
    for row in _rows(source, TABLE_COLUMNS):
        key = (float(row["theta_a_deg"]), float(row["theta_b_deg"]))
        matrix = np.array([[int(row["n_pp"]), int(row["n_pm"])], [int(row["n_mp"]), int(row["n_mm"])]])
        counts[key] = counts.get(key, 0) + matrix
    return CountTable(counts)


def write_count_table_csv(table: CountTable, target: PathOrStream) -> None:
    rows = (
        [format_real(theta_a), format_real(theta_b)] + [str(int(n)) for n in matrix.reshape(-1)]
        for (theta_a, theta_b), matrix in table.items()
    )
    _write(target, TABLE_COLUMNS, rows)


def fringe_csv_text(curve: FringeCurve) -> str:
    buffer = io.StringIO()
    write_fringe_csv(curve, buffer)
    return buffer.getvalue()
