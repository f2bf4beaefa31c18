import numpy as np
import pytest

from scripts.cli.cli import main
from scripts.cli.runner import replicate_once
from scripts.clustering.fuzzy import SolverConfig, fuzzy_c_means
from scripts.config.settings import DEFAULTS, merge_config
from scripts.evaluate.indices import crisp_scores
from scripts.fqa.dissimilarity import FeatureOptions, Metric, collection_features
from scripts.fqa.fqa import FqaParams
from scripts.fts.core import FunctionalTimeSeries
from scripts.fts.io import ManifestEntry, load_collection, save_csv, write_manifest
from scripts.simulate.scenarios import make_scenario
from scripts.utils.response import read_json

FAST = ["--starts", "2", "--degenerate-zero", "--lags", "1,2"]


@pytest.fixture(scope="module")
def scenario1(tmp_path_factory):
    out = tmp_path_factory.mktemp("s1")
    assert main(["simulate", "--scenario", "1", "-T", "40", "--seed", "7", "--out", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def clustered(scenario1, tmp_path_factory):
    out = tmp_path_factory.mktemp("s1_fqa")
    code = main(["cluster", str(scenario1 / "manifest.json"), "-C", "4", "-m", "1.5", "--out", str(out), *FAST])
    assert code == 0
    return out


def _data(path):
    return read_json(path)["data"]


# ------------------------
# 用法错误
# ------------------------
def test_unknown_scenario_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--scenario", "7", "--out", str(tmp_path)])
    assert info.value.code == 2


def test_invalid_fuzzifier_is_a_usage_error(scenario1, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["cluster", str(scenario1 / "manifest.json"), "-m", "1.0", "--out", str(tmp_path)])
    assert info.value.code == 2


def test_empty_grid_is_a_usage_error(scenario1, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["select", str(scenario1 / "manifest.json"), "--C-grid", "", "--out", str(tmp_path)])
    assert info.value.code == 2


def test_missing_config_file_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--scenario", "1", "--config", str(tmp_path / "absent.yaml")])
    assert info.value.code == 2


# ------------------------
# simulate
# ------------------------
def test_simulate_writes_dataset(scenario1):
    collection = load_collection(scenario1 / "manifest.json")
    assert len(collection) == 20
    assert all(X.values.shape == (40, 100) for X in collection)
    assert len(list(scenario1.glob("s1_*.csv"))) == 20


def test_simulate_rerun_is_byte_identical(scenario1, tmp_path):
    assert main(["simulate", "--scenario", "1", "-T", "40", "--seed", "7", "--out", str(tmp_path)]) == 0
    for name in ("s1_01.csv", "s1_20.csv"):
        assert (tmp_path / name).read_bytes() == (scenario1 / name).read_bytes()
    assert _data(tmp_path / "labels.json") == _data(scenario1 / "labels.json")


def test_simulate_labels_use_the_standard_envelope(scenario1):
    report = read_json(scenario1 / "labels.json")
    assert set(report) == {"code", "message", "version", "config", "data"}
    assert report["config"]["simulate"]["T"] == 40
    assert len(report["data"]["labels"]) == 20


# ------------------------
# cluster
# ------------------------
def test_cluster_artifacts(clustered):
    data = _data(clustered / "partition.json")
    U = np.asarray(data["memberships"])
    assert U.shape == (20, 4)
    assert np.allclose(U.sum(axis=1), 1.0)
    assert len(data["medoid_ids"]) == 4
    assert (clustered / "distances.csv").exists()
    assert _data(clustered / "run_log.json")["stage"] == "cluster"
    report = read_json(clustered / "partition.json")
    assert set(report) == {"code", "message", "version", "config", "data"}
    assert report["config"]["solver"]["n_starts"] == 2


def test_cluster_rerun_is_byte_identical(scenario1, clustered):
    again = clustered.parent / (clustered.name + "_again")
    main(["cluster", str(scenario1 / "manifest.json"), "-C", "4", "-m", "1.5", "--out", str(again), *FAST])
    assert (again / "distances.csv").read_bytes() == (clustered / "distances.csv").read_bytes()
    first = _data(clustered / "partition.json")
    second = _data(again / "partition.json")
    assert first == second


def test_cluster_with_c_means(scenario1, tmp_path):
    code = main(["cluster", str(scenario1 / "manifest.json"), "--algorithm", "c_means", "-C", "4",
                 "--out", str(tmp_path), *FAST])
    assert code == 0
    data = _data(tmp_path / "partition.json")
    assert data["kind"] == "centroids"
    assert "medoid_ids" not in data


def test_degenerate_series_is_a_computation_error(tmp_path):
    rng = np.random.default_rng(0)
    series = [FunctionalTimeSeries(rng.standard_normal((30, 6))), FunctionalTimeSeries(np.ones((30, 6)))]
    entries = [ManifestEntry(f"x{i}", save_csv(X, tmp_path / f"x{i}.csv")) for i, X in enumerate(series)]
    manifest = write_manifest(entries, tmp_path / "manifest.json")
    code = main(["cluster", str(manifest), "--metric", "FACF", "--starts", "2", "--out", str(tmp_path / "out")])
    assert code == 1


# ------------------------
# features / select
# ------------------------
def test_features(scenario1, tmp_path):
    assert main(["features", str(scenario1 / "manifest.json"), "--out", str(tmp_path), *FAST[2:]]) == 0
    data = _data(tmp_path / "features.json")
    assert np.asarray(data["values"]).shape == (20, 18)
    assert data["order"][0] == [1, 0.1, 0.1, 0.1, 0.1]


def test_select_reports_corrected_level(scenario1, tmp_path):
    code = main(["select", str(scenario1 / "manifest.json"), "--L-max", "2", "--C-grid", "2,3",
                 "--m-grid", "1.5", "--out", str(tmp_path), "--starts", "2", "--degenerate-zero"])
    assert code == 0
    data = _data(tmp_path / "selection.json")
    assert data["alpha_corrected"] == pytest.approx(0.05 / (20 * 2))
    assert data["C"] in (2, 3)
    assert len(data["xbi_table"]) == 2


# ------------------------
# evaluate / mds / summarize
# ------------------------
def test_evaluate_crisp(scenario1, clustered, tmp_path):
    code = main(["evaluate", "--partition", str(clustered / "partition.json"),
                 "--labels", str(scenario1 / "labels.json"), "--out", str(tmp_path)])
    assert code == 0
    data = _data(tmp_path / "evaluation.json")
    assert {"ARIF", "JIF", "ARI", "JI"} <= set(data)
    assert -1.0 <= data["ARIF"] <= 1.0


def test_evaluate_accepts_manifest_labels(scenario1, clustered, tmp_path):
    by_labels = tmp_path / "labels"
    by_manifest = tmp_path / "manifest"
    main(["evaluate", "--partition", str(clustered / "partition.json"),
          "--labels", str(scenario1 / "labels.json"), "--out", str(by_labels)])
    code = main(["evaluate", "--partition", str(clustered / "partition.json"),
                 "--labels", str(scenario1 / "manifest.json"), "--out", str(by_manifest)])
    assert code == 0
    assert _data(by_manifest / "evaluation.json") == _data(by_labels / "evaluation.json")


def test_evaluate_uncertain(tmp_path):
    sim = tmp_path / "s3"
    assert main(["simulate", "--scenario", "3", "-T", "40", "-p", "20", "--out", str(sim)]) == 0
    part = tmp_path / "part"
    assert main(["cluster", str(sim / "manifest.json"), "-C", "2", "-m", "1.3", "--out", str(part), *FAST]) == 0
    code = main(["evaluate", "--partition", str(part / "partition.json"), "--labels", str(sim / "labels.json"),
                 "--mode", "uncertain", "--out", str(tmp_path / "eval")])
    assert code == 0
    data = _data(tmp_path / "eval" / "evaluation.json")
    assert isinstance(data["success"], bool)
    assert len(data["memberships"]) == 11


def test_mds(clustered, tmp_path):
    code = main(["mds", "--distances", str(clustered / "distances.csv"), "--permutations", "99",
                 "--out", str(tmp_path)])
    assert code == 0
    data = _data(tmp_path / "mds.json")
    assert 0.0 < data["p_value"] <= 1.0
    assert data["n_permutations"] == 99
    assert np.asarray(data["coords"]).shape == (20, 2)
    assert (tmp_path / "coords.csv").read_text(encoding="utf-8").startswith("x,y")


def test_summarize(scenario1, clustered, tmp_path):
    code = main(["summarize", "--partition", str(clustered / "partition.json"),
                 "--manifest", str(scenario1 / "manifest.json"), "--out", str(tmp_path), *FAST[2:]])
    assert code == 0
    data = _data(tmp_path / "summary.json")
    assert np.asarray(data["cluster_means"]).shape == (4, 18)


# ------------------------
# replicate
# ------------------------
def test_replicate(tmp_path):
    code = main(["replicate", "--scenario", "1", "-T", "40", "-p", "20", "--replicates", "2",
                 "--metrics", "FQA,FACF", "--m-grid", "1.5", "--out", str(tmp_path), *FAST])
    assert code == 0
    data = _data(tmp_path / "replicate.json")
    assert len(data["records"]) == 4
    assert {r["method"] for r in data["summary"]} == {"FQA", "FACF"}
    assert data["comparison"]["reference"] == "FQA"


def test_replicate_uncertain_reports_success(tmp_path):
    code = main(["replicate", "--scenario", "4", "-T", "40", "-p", "20", "--replicates", "2",
                 "--m-grid", "1.2,1.4", "--out", str(tmp_path), *FAST])
    assert code == 0
    [row] = _data(tmp_path / "replicate.json")["summary"]
    assert row["method"] == "FQA"
    assert len(row["success_rate"]) == 2


def test_replicate_honours_the_algorithm(tmp_path):
    code = main(["replicate", "--scenario", "1", "-T", "40", "-p", "20", "--replicates", "2",
                 "--m-grid", "1.5", "--algorithm", "c_means", "--out", str(tmp_path), *FAST])
    assert code == 0
    data = _data(tmp_path / "replicate.json")
    assert data["algorithm"] == "c_means"
    assert {r["algorithm"] for r in data["records"]} == {"c_means"}


def test_replicate_once_with_c_means_clusters_features():
    config = merge_config(DEFAULTS, {
        "fqa": {"lags": [1, 2], "on_degenerate": "zero"},
        "solver": {"algorithm": "c_means", "n_starts": 2},
        "simulate": {"T": 40, "p": 20},
    })
    [record] = replicate_once(config, 1, 3, [Metric.FQA], [1.5])

    dataset = make_scenario(1, T=40, p=20, seed=3)
    V = collection_features(dataset.series, Metric.FQA, FqaParams.from_dict(config["fqa"]),
                            FeatureOptions.from_config(config))
    cfg = SolverConfig.from_config(config["solver"]).replace(C=4, m=1.5, seed=3, n_jobs=1)
    expected = crisp_scores(dataset.labels, fuzzy_c_means(V, cfg, dataset.ids).memberships)
    assert record["algorithm"] == "c_means"
    assert record["ARIF"] == pytest.approx(expected["ARIF"])
    assert record["JIF"] == pytest.approx(expected["JIF"])
