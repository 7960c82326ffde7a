"""
Tests for CSV ingestion and emission.
"""

import io

import pytest

from analysis import (
    FringeCurve,
    IncompleteDataError,
    fringe_csv_text,
    read_count_table_csv,
    read_fringe_csv,
    write_count_table_csv,
)
from simulation import CountTable


def test_read_fringe_csv():
    source = io.StringIO("theta_b_deg,count\n0,120\n45,60\n90,3\n")
    curve = read_fringe_csv(source, "z")
    assert curve.basis == "Z"
    assert curve.points == ((0.0, 120), (45.0, 60), (90.0, 3))


def test_fringe_csv_text_has_header_and_six_digit_reals():
    curve = FringeCurve("X", ((22.5, 10), (1 / 3, 4)))
    assert fringe_csv_text(curve) == "theta_b_deg,count\n0.333333,4\n22.5,10\n"


def test_read_count_table_sums_duplicate_rows():
    source = io.StringIO(
        "theta_a_deg,theta_b_deg,n_pp,n_pm,n_mp,n_mm\n"
        "0,22.5,40,5,6,49\n"
        "0,22.5,1,1,1,1\n"
        "45,67.5,10,0,0,10\n"
    )
    table = read_count_table_csv(source)
    assert table[(0.0, 22.5)].tolist() == [[41, 6], [7, 50]]
    assert table.total() == 124


def test_missing_columns_rejected():
    with pytest.raises(IncompleteDataError):
        read_count_table_csv(io.StringIO("theta_a_deg,n_pp\n0,1\n"))


def test_write_count_table(tmp_path):
    path = tmp_path / "table.csv"
    write_count_table_csv(CountTable({(45.0, 22.5): [[1, 2], [3, 4]]}), path)
    assert path.read_text() == "theta_a_deg,theta_b_deg,n_pp,n_pm,n_mp,n_mm\n45,22.5,1,2,3,4\n"
