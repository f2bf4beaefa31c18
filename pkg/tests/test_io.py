import json

import numpy as np
import pytest

from scripts.fts.core import FunctionalTimeSeries
from scripts.fts.io import (
    ManifestEntry, load_collection, load_csv, load_manifest, manifest_labels, save_csv, write_manifest,
)
from scripts.utils.errors import ParseError


def test_csv_round_trip(tmp_path):
    X = FunctionalTimeSeries(np.array([[0.1, 2.0], [1e-7, -3.25], [4.0, 5.5]]), series_id="a")
    path = save_csv(X, tmp_path / "a.csv")
    Y = load_csv(path)
    assert Y.series_id == "a"
    assert np.array_equal(X.values, Y.values)


def test_ragged_row_reports_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2,3\n4,5\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_csv(path)
    assert info.value.row == 2


def test_non_numeric_cell_reports_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,x\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_csv(path)
    assert (info.value.row, info.value.column) == (2, 2)


def test_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(ParseError, match="没有数据行"):
        load_csv(path)


def test_header_is_skipped(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("u0,u1\n1,2\n3,4\n", encoding="utf-8")
    assert load_csv(path, header=True).T == 2


def test_manifest_relative_paths(tmp_path):
    data = tmp_path / "data"
    entries = []
    for i in range(3):
        X = FunctionalTimeSeries(np.full((4, 3), float(i)), series_id=f"s{i}")
        entries.append(ManifestEntry(X.series_id, save_csv(X, data / f"s{i}.csv"), "A" if i < 2 else "B"))
    manifest = write_manifest(entries, data / "manifest.json")

    doc = json.loads(manifest.read_text(encoding="utf-8"))
    assert doc["series"][0]["path"] == "s0.csv"
    assert [e.series_id for e in load_manifest(manifest)] == ["s0", "s1", "s2"]
    assert manifest_labels(manifest) == {"s0": "A", "s1": "A", "s2": "B"}
    assert [X.values[0, 0] for X in load_collection(manifest)] == [0.0, 1.0, 2.0]


def test_manifest_invalid_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{\"series\": [", encoding="utf-8")
    with pytest.raises(ParseError):
        load_manifest(path)


def test_manifest_requires_series(tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{\"series\": []}", encoding="utf-8")
    with pytest.raises(ParseError):
        load_manifest(path)
