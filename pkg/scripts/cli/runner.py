#!/usr/bin/env python3
"""
实验运行器（各流水线阶段 + 产物写出 + rich 摘要表格）
每个阶段把结果写入输出目录，所有 JSON 都带完整配置与版本号，且不含时间戳，
相同配置与相同输入重复运行得到逐位相同的产物
"""

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from joblib import Parallel, delayed
from rich.table import Table

from scripts.clustering.fuzzy import FuzzyPartition, SolverConfig, fuzzy_c_means, fuzzy_c_medoids
from scripts.clustering.selection import select_C_m, select_lags
from scripts.evaluate.indices import cluster_summary, crisp_scores, uncertain_success
from scripts.evaluate.mds import mds_2d, mds_permutation_test
from scripts.evaluate.report import (
    aggregate_scores, comparison_table, paired_comparison, score_table, success_summary, success_table,
)
from scripts.fqa.dissimilarity import (
    DissimilarityMatrix, FeatureOptions, Metric, collection_features, pairwise_matrix,
)
from scripts.fqa.fqa import FqaParams
from scripts.fts.core import FunctionalTimeSeries
from scripts.fts.io import load_collection, manifest_labels, save_matrix_csv
from scripts.log.log import log
from scripts.simulate.scenarios import ISOLATED, make_scenario
from scripts.utils.errors import DomainError, ParseError
from scripts.utils.response import read_json, standard_report, write_json

PathLike = Union[str, Path]
ALGORITHMS = ("c_medoids", "c_means")
MODES = ("crisp", "uncertain")


def _envelope_data(doc: dict) -> dict:
    """兼容带信封与不带信封的 JSON"""
    if isinstance(doc, dict) and {"code", "data"} <= set(doc):
        return doc["data"]
    return doc


def solver_algorithm(config: dict) -> str:
    algorithm = config["solver"].get("algorithm", "c_medoids")
    if algorithm not in ALGORITHMS:
        raise DomainError(f"未知的聚类算法: {algorithm}")
    return algorithm


class ExperimentRunner:
    """流水线各阶段的执行与产物写出"""

    def __init__(self, config: dict, out_dir: Optional[PathLike] = None):
        self.config = config
        self.out_dir = Path(out_dir or config.get("output", {}).get("out_dir", "runs"))
        self.out_dir.mkdir(parents=True, exist_ok=True)
        log.info(f"输出目录: {self.out_dir}")

    # ------------------------
    # 由配置解析出的参数
    # ------------------------
    @property
    def params(self) -> FqaParams:
        return FqaParams.from_dict(self.config["fqa"])

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig.from_config(self.config["solver"])

    @property
    def options(self) -> FeatureOptions:
        return FeatureOptions.from_config(self.config)

    @property
    def algorithm(self) -> str:
        return solver_algorithm(self.config)

    # ------------------------
    # 产物写出
    # ------------------------
    def write(self, name: str, data: dict, message: str = "success") -> Path:
        path = write_json(self.out_dir / name, standard_report(0, message, data, self.config))
        log.debug(f"写出 {path}")
        return path

    def write_run_log(self, stage: str, inputs: Dict[str, str], artifacts: Sequence[Path]) -> Path:
        return self.write("run_log.json", {
            "stage": stage,
            "inputs": inputs,
            "artifacts": [Path(a).name for a in artifacts],
        })

    def _summary(self, title: str, rows: Dict[str, object]):
        table = Table(title=title)
        table.add_column("项目")
        table.add_column("值")
        for key, value in rows.items():
            table.add_row(str(key), str(value))
        log.rich(table)

    # ------------------------
    # simulate
    # ------------------------
    def simulate(self, scenario: int, unequal_lengths: bool = False) -> Path:
        sim = self.config["simulate"]
        noise = sim.get("noise_scale", "auto")
        dataset = make_scenario(
            scenario, T=int(sim["T"]), p=int(sim["p"]), seed=int(self.config["solver"]["seed"]),
            burn_in=int(sim["burn_in"]), noise_scale=None if noise in (None, "auto") else float(noise),
            isolated_scale=float(sim["isolated_scale"]), unequal_lengths=unequal_lengths,
            lengths=sim.get("lengths", (200, 300, 400, 500, 600)),
        )
        manifest = dataset.write(self.out_dir, self.config)
        self.write_run_log("simulate", {"scenario": str(scenario)},
                           [manifest, self.out_dir / "labels.json"])
        self._summary(f"场景 {scenario}", {
            "序列数": len(dataset.series),
            "长度 T": dataset.T,
            "网格点数 p": dataset.p,
            "类别": ", ".join(sorted(set(dataset.labels))),
        })
        return manifest

    # ------------------------
    # features
    # ------------------------
    def features(self, manifest: PathLike, metric: Union[Metric, str]) -> Path:
        metric = Metric(metric)
        collection = load_collection(manifest)
        V = collection_features(collection, metric, self.params, self.options, self.solver.n_jobs)
        order = [list(c) for c in self.params.coordinates()] if metric is Metric.FQA else None
        csv_path = save_matrix_csv(V, self.out_dir / "features.csv")
        path = self.write("features.json", {
            "metric": metric.value,
            "ids": [X.label for X in collection],
            "order": order,
            "values": V,
        })
        self.write_run_log("features", {"manifest": str(manifest)}, [path, csv_path])
        log.info(f"{metric.value} 特征矩阵: {V.shape[0]}×{V.shape[1]}")
        return path

    # ------------------------
    # cluster
    # ------------------------
    def _partition(self, collection: Sequence[FunctionalTimeSeries], metric: Metric, cfg: SolverConfig,
                   D: DissimilarityMatrix) -> FuzzyPartition:
        if self.algorithm == "c_medoids":
            return fuzzy_c_medoids(D, cfg)
        V = collection_features(collection, metric, self.params, self.options, cfg.n_jobs)
        return fuzzy_c_means(V, cfg, D.ids)

    def cluster(self, manifest: PathLike, metric: Union[Metric, str]) -> Path:
        metric = Metric(metric)
        collection = load_collection(manifest)
        cfg = self.solver
        D = pairwise_matrix(collection, self.params, metric, self.options, cfg.n_jobs)
        partition = self._partition(collection, metric, cfg, D)
        data = {"metric": metric.value, "algorithm": self.algorithm}
        data.update(partition.to_dict())
        if partition.kind == "medoids":
            data["medoid_ids"] = [D.ids[int(j)] for j in partition.prototypes]
        dist_path = D.to_csv(self.out_dir / "distances.csv")
        path = self.write("partition.json", data)
        self.write_run_log("cluster", {"manifest": str(manifest)}, [path, dist_path])

        table = Table(title=f"模糊划分 ({metric.value}, {self.algorithm}, C={cfg.C}, m={cfg.m:g})")
        table.add_column("序列")
        for c in range(partition.C):
            table.add_column(f"类 {c}")
        for sid, row in zip(D.ids, partition.memberships):
            table.add_row(sid, *[f"{u:.3f}" for u in row])
        log.rich(table)
        log.info(f"目标函数 {partition.objective:.6g}，最优初始化 #{partition.best_start}")
        return path

    # ------------------------
    # select
    # ------------------------
    def select(self, manifest: PathLike, metric: Union[Metric, str]) -> Path:
        metric = Metric(metric)
        sel = self.config["selection"]
        collection = load_collection(manifest)
        cfg = self.solver
        lag_report = select_lags(collection, float(sel["alpha"]), int(sel["L_max"]), sel.get("test", "t"),
                                 int(sel.get("n_permutations", 999)), cfg.seed)
        params = FqaParams(lag_report.lags, self.params.levels, self.params.thresholds)
        V = collection_features(collection, metric, params, self.options, cfg.n_jobs)
        D = None
        if self.algorithm == "c_medoids":
            D = pairwise_matrix(collection, params, metric, self.options, cfg.n_jobs)
        cm = select_C_m(V, sel["C_grid"], sel["m_grid"], cfg, self.algorithm, D)
        path = self.write("selection.json", {
            "metric": metric.value,
            "algorithm": self.algorithm,
            "lags": lag_report.to_dict(),
            "alpha_corrected": lag_report.alpha_corrected,
            "C": cm.C,
            "m": cm.m,
            "xbi": cm.xbi,
            "xbi_table": cm.table,
        })
        self.write_run_log("select", {"manifest": str(manifest)}, [path])
        return path

    # ------------------------
    # evaluate
    # ------------------------
    def _aligned_labels(self, ids: Sequence[str], labels_path: PathLike) -> List[str]:
        """按划分中的序列标识对齐参考标签；标签文件可以是 labels.json 或带 label 字段的清单"""
        doc = _envelope_data(read_json(labels_path))
        if "series" in doc:
            lookup = {sid: label for sid, label in manifest_labels(labels_path).items() if label is not None}
        else:
            labels = [str(l) for l in doc["labels"]]
            label_ids = [str(i) for i in doc.get("ids", ids)]
            if len(label_ids) != len(labels):
                raise ParseError(f"{Path(labels_path).name}: ids 与 labels 长度不一致")
            lookup = dict(zip(label_ids, labels))
        missing = [sid for sid in ids if sid not in lookup]
        if missing:
            raise ParseError(f"{Path(labels_path).name}: 缺少序列 {missing[0]} 的标签")
        return [lookup[sid] for sid in ids]

    def evaluate(self, partition_path: PathLike, labels_path: PathLike, mode: str = "crisp") -> Path:
        if mode not in MODES:
            raise DomainError(f"未知的评价模式: {mode}")
        doc = _envelope_data(read_json(partition_path))
        partition = FuzzyPartition.from_dict(doc)
        ids = partition.ids or [str(i) for i in range(partition.n)]
        labels = self._aligned_labels(ids, labels_path)
        ev = self.config["evaluate"]
        if mode == "crisp":
            data = {"mode": mode, **crisp_scores(labels, partition.memberships)}
            self._summary("聚类评价", {k: f"{v:.4f}" for k, v in data.items() if k != "mode"})
        else:
            threshold = float(ev["threshold"])
            success = uncertain_success(partition.memberships, labels, threshold, ev["isolated_label"])
            data = {
                "mode": mode,
                "threshold": threshold,
                "success": success,
                "memberships": {sid: row for sid, row in zip(ids, partition.memberships.tolist())},
            }
            self._summary("不确定场景评价", {"阈值": threshold, "成功": success})
        path = self.write("evaluation.json", data)
        self.write_run_log("evaluate", {"partition": str(partition_path), "labels": str(labels_path)}, [path])
        return path

    # ------------------------
    # mds
    # ------------------------
    def mds(self, distances_path: PathLike) -> Path:
        D = DissimilarityMatrix.from_csv(distances_path)
        coords, stress_value = mds_2d(D)
        n_perms = int(self.config["evaluate"]["mds_permutations"])
        p_value = mds_permutation_test(D, n_perms, self.solver.seed, self.solver.n_jobs)
        coords_path = save_matrix_csv(coords, self.out_dir / "coords.csv", header=["x", "y"])
        path = self.write("mds.json", {
            "ids": D.ids,
            "coords": coords,
            "stress": stress_value,
            "p_value": p_value,
            "n_permutations": n_perms,
        })
        self.write_run_log("mds", {"distances": str(distances_path)}, [path, coords_path])
        self._summary("二维标度", {"stress": f"{stress_value:.4%}", "置换检验 p 值": f"{p_value:.4f}"})
        return path

    # ------------------------
    # summarize
    # ------------------------
    def summarize(self, partition_path: PathLike, manifest: PathLike, metric: Union[Metric, str]) -> Path:
        metric = Metric(metric)
        partition = FuzzyPartition.from_dict(_envelope_data(read_json(partition_path)))
        collection = load_collection(manifest)
        if partition.ids and partition.ids != [X.label for X in collection]:
            raise DomainError("划分中的序列标识与清单不一致")
        V = collection_features(collection, metric, self.params, self.options, self.solver.n_jobs)
        means = cluster_summary(V, partition.memberships)
        data = {
            "metric": metric.value,
            "order": [list(c) for c in self.params.coordinates()] if metric is Metric.FQA else None,
            "cluster_means": means,
        }
        if partition.kind == "medoids":
            data["medoid_ids"] = [collection[int(j)].label for j in partition.prototypes]
        path = self.write("summary.json", data)
        self.write_run_log("summarize", {"partition": str(partition_path), "manifest": str(manifest)}, [path])
        log.info(f"类特征摘要: {means.shape[0]} 类 × {means.shape[1]} 维")
        return path

    # ------------------------
    # replicate
    # ------------------------
    def replicate(self, scenario: int, n_replicates: int, metrics: Sequence[Union[Metric, str]],
                  m_grid: Sequence[float], unequal_lengths: bool = False) -> Path:
        if n_replicates < 1:
            raise DomainError(f"重复次数必须 ≥ 1，当前为 {n_replicates}")
        metrics = [Metric(x) for x in metrics]
        m_grid = sorted(float(m) for m in m_grid)
        base_seed = self.solver.seed
        n_jobs = self.solver.n_jobs
        records = Parallel(n_jobs=n_jobs)(
            delayed(replicate_once)(self.config, scenario, base_seed + r, metrics, m_grid, unequal_lengths)
            for r in range(n_replicates)
        )
        records = [rec for batch in records for rec in batch]
        uncertain = scenario in (3, 4)
        if uncertain:
            summary = success_summary(records)
            log.rich(success_table(summary))
            comparison = None
        else:
            summary = aggregate_scores(records)
            log.rich(score_table(summary))
            comparison = None
            if Metric.FQA in metrics and len(metrics) > 1 and n_replicates > 1:
                comparison = paired_comparison(records, Metric.FQA.value, "ARIF")
                log.rich(comparison_table(comparison))
        path = self.write("replicate.json", {
            "scenario": scenario,
            "algorithm": self.algorithm,
            "n_replicates": n_replicates,
            "metrics": [x.value for x in metrics],
            "m_grid": m_grid,
            "summary": summary,
            "comparison": comparison.to_dict() if comparison else None,
            "records": records,
        })
        self.write_run_log("replicate", {"scenario": str(scenario)}, [path])
        return path


def replicate_once(config: dict, scenario: int, seed: int, metrics: Sequence[Metric],
                   m_grid: Sequence[float], unequal_lengths: bool = False) -> List[dict]:
    """
    单次重复: 生成场景数据，逐度量计算相异度（或特征矩阵），再对每个 m 运行配置中的聚类算法并打分。

    场景 1、2 的类数为 4，记录 ARIF / JIF / ARI / JI；场景 3、4 的类数为 2，记录成功与否。
    """
    sim = config["simulate"]
    noise = sim.get("noise_scale", "auto")
    dataset = make_scenario(
        scenario, T=int(sim["T"]), p=int(sim["p"]), seed=seed, burn_in=int(sim["burn_in"]),
        noise_scale=None if noise in (None, "auto") else float(noise),
        isolated_scale=float(sim["isolated_scale"]), unequal_lengths=unequal_lengths,
        lengths=sim.get("lengths", (200, 300, 400, 500, 600)),
    )
    params = FqaParams.from_dict(config["fqa"])
    options = FeatureOptions.from_config(config)
    C = len({l for l in dataset.labels if l != ISOLATED})
    base = SolverConfig.from_config(config["solver"]).replace(C=C, seed=seed, n_jobs=1)
    algorithm = solver_algorithm(config)
    ev = config["evaluate"]
    records = []
    for metric in metrics:
        if algorithm == "c_medoids":
            D = pairwise_matrix(dataset.series, params, metric, options)
        else:
            V = collection_features(dataset.series, metric, params, options)
        for m in m_grid:
            if algorithm == "c_medoids":
                partition = fuzzy_c_medoids(D, base.replace(m=m))
            else:
                partition = fuzzy_c_means(V, base.replace(m=m), dataset.ids)
            record = {"seed": seed, "method": metric.value, "algorithm": algorithm, "m": m}
            if scenario in (3, 4):
                record["success"] = uncertain_success(partition.memberships, dataset.labels,
                                                      float(ev["threshold"]), ev["isolated_label"])
            else:
                record.update(crisp_scores(dataset.labels, partition.memberships))
            records.append(record)
    log.debug(f"重复 seed={seed} 完成: {len(records)} 条记录")
    return records
