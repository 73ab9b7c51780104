import csv
import math
import random

import pytest

from offload_figures.schema import (
    COLUMNS,
    POLICIES,
    EmptyCsvError,
    SchemaMismatch,
    read_rows,
    series,
)


def _write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _sample_row():
    return ["200", "ibba", "0", "7.68726", "11.2234", "10", "273.172", "1", "optimal"]


def test_reads_intensity_sweep(s1_csv):
    rows = read_rows(s1_csv)
    assert len(rows) == 36
    for policy in POLICIES:
        xs, ys = series(rows, policy, "avg_energy_j")
        assert len(xs) == 9
        assert xs == sorted(xs)
    assert rows[0].sweep == 200.0
    assert rows[0].policy == "ibba"
    assert rows[0].status == "optimal"


def test_reads_deadline_sweep(s2_csv):
    rows = read_rows(s2_csv)
    assert len(rows) == 16
    assert {r.policy for r in rows} == set(POLICIES)
    assert sorted({r.sweep for r in rows}) == [30.0, 40.0, 50.0, 60.0]


def test_missing_column_is_named(tmp_path):
    keep = [c for c in COLUMNS if c != "policy"]
    row = [v for c, v in zip(COLUMNS, _sample_row()) if c != "policy"]
    path = _write(tmp_path / "bad.csv", keep, [row])
    with pytest.raises(SchemaMismatch, match="'policy'"):
        read_rows(path)


def test_unknown_column_is_named(tmp_path):
    path = _write(
        tmp_path / "bad.csv", list(COLUMNS) + ["comment"], [_sample_row() + ["x"]]
    )
    with pytest.raises(SchemaMismatch, match="'comment'"):
        read_rows(path)


def test_duplicated_column_rejected(tmp_path):
    path = _write(
        tmp_path / "bad.csv", list(COLUMNS) + ["sweep"], [_sample_row() + ["200"]]
    )
    with pytest.raises(SchemaMismatch, match="duplicated"):
        read_rows(path)


def test_header_only_raises_empty(tmp_path):
    path = _write(tmp_path / "empty.csv", COLUMNS, [])
    with pytest.raises(EmptyCsvError, match="no sweep rows"):
        read_rows(path)


def test_blank_file_is_schema_mismatch(tmp_path):
    path = tmp_path / "blank.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(SchemaMismatch, match="no header"):
        read_rows(path)


def test_non_numeric_cell_is_located(tmp_path):
    row = _sample_row()
    row[3] = "lots"
    path = _write(tmp_path / "bad.csv", COLUMNS, [_sample_row(), row])
    with pytest.raises(SchemaMismatch, match=r"line 3.*'avg_energy_j'.*'lots'"):
        read_rows(path)


def test_ragged_row_rejected(tmp_path):
    path = _write(tmp_path / "bad.csv", COLUMNS, [_sample_row()[:-1]])
    with pytest.raises(SchemaMismatch, match="8 cells"):
        read_rows(path)


def test_nan_energy_parses(tmp_path):
    row = _sample_row()
    row[3] = "nan"
    row[8] = "infeasible"
    path = _write(tmp_path / "gap.csv", COLUMNS, [row])
    (parsed,) = read_rows(path)
    assert math.isnan(parsed.avg_energy_j)
    assert parsed.status == "infeasible"


def test_column_order_does_not_matter(s1_csv, tmp_path):
    reference = read_rows(s1_csv)
    with open(s1_csv, newline="", encoding="utf-8") as handle:
        header, *records = list(csv.reader(handle))
    for seed in range(5):
        order = list(range(len(header)))
        random.Random(seed).shuffle(order)
        shuffled = _write(
            tmp_path / f"shuffled{seed}.csv",
            [header[k] for k in order],
            [[rec[k] for k in order] for rec in records],
        )
        assert read_rows(shuffled) == reference
