import json
import pickle

import numpy as np
import pytest

from scripts import __version__
from scripts.config.settings import DEFAULTS, load_config, merge_config
from scripts.utils.errors import DegenerateMarginal, DomainError, FqaClusteringError, PairwiseError, ParseError
from scripts.utils.response import dumps, read_json, standard_report, write_json


# ------------------------
# 配置
# ------------------------
def test_merge_config_is_recursive_and_does_not_mutate():
    merged = merge_config(DEFAULTS, {"solver": {"C": 4}, "fqa": {"lags": [1, 2]}})
    assert merged["solver"]["C"] == 4
    assert merged["solver"]["m"] == DEFAULTS["solver"]["m"]
    assert merged["fqa"]["lags"] == [1, 2]
    assert DEFAULTS["solver"]["C"] == 2


def test_load_config_fills_defaults(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("solver:\n  n_starts: 10\nevaluate:\n  threshold: 0.8\n", encoding="utf-8")
    cfg = load_config(path)
    assert cfg["solver"]["n_starts"] == 10
    assert cfg["solver"]["C"] == DEFAULTS["solver"]["C"]
    assert cfg["evaluate"]["threshold"] == 0.8
    assert cfg["selection"] == DEFAULTS["selection"]


def test_load_config_empty_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("", encoding="utf-8")
    assert load_config(path) == DEFAULTS


def test_explicit_missing_config_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "absent.yaml")


# ------------------------
# 标准输出
# ------------------------
def test_standard_report_envelope():
    report = standard_report(data={"x": 1}, config={"solver": {"C": 2}})
    assert list(report) == ["code", "message", "version", "config", "data"]
    assert report["code"] == 0 and report["version"] == __version__


def test_dumps_converts_numpy():
    text = dumps({"a": np.arange(3), "b": np.float64(0.5), "c": np.bool_(True)})
    assert json.loads(text) == {"a": [0, 1, 2], "b": 0.5, "c": True}
    assert text.endswith("\n")


def test_write_json_round_trip(tmp_path):
    payload = standard_report(data={"ids": ["a", "b"], "values": np.eye(2)})
    path = write_json(tmp_path / "nested" / "out.json", payload)
    assert read_json(path)["data"]["values"] == [[1.0, 0.0], [0.0, 1.0]]
    assert path.read_bytes() == write_json(tmp_path / "again.json", payload).read_bytes()


def test_dumps_rejects_unknown_objects():
    with pytest.raises(TypeError):
        dumps({"x": object()})


# ------------------------
# 异常
# ------------------------
def test_errors_share_a_base():
    assert issubclass(DomainError, FqaClusteringError)
    assert issubclass(DomainError, ValueError)


@pytest.mark.parametrize("error", [
    ParseError("坏值", row=3, column=2),
    DegenerateMarginal(0.1, 0.5, 1, 0.1, 0.5, series_id="s"),
    PairwiseError("DegenerateVariance: 常数序列", "x1", (1, 0)),
    PairwiseError("DegenerateVariance: 常数序列", "x1", index=1),
])
def test_errors_survive_pickling(error):
    restored = pickle.loads(pickle.dumps(error))
    assert type(restored) is type(error)
    assert str(restored) == str(error)


def test_parse_error_location():
    assert "第 3 行" in str(ParseError("坏值", row=3))
