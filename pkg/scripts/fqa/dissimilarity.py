#!/usr/bin/env python3
"""
相异度矩阵
每种度量（FQA / FACF / FSACF / K_m / K_i）都先计算逐序列的缩放特征向量，
特征向量之间的平方欧氏距离就是对应的相异度，因此矩阵只需 n 次特征提取。
"""

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial.distance import pdist, squareform

from scripts.competitors.acf import facf_features, fsacf_features
from scripts.competitors.kendall import Preorder, kendall_features
from scripts.fqa.fqa import FqaParams, feature_vector
from scripts.fts.core import FunctionalTimeSeries
from scripts.fts.io import save_matrix_csv
from scripts.log.log import log
from scripts.utils.errors import DimensionError, DomainError, FqaClusteringError, ParseError, PairwiseError


class Metric(str, Enum):
    FQA = "FQA"
    FACF = "FACF"
    FSACF = "FSACF"
    K_M = "K_m"
    K_I = "K_i"


@dataclass(frozen=True)
class FeatureOptions:
    """特征提取的附加选项"""

    on_degenerate: str = "raise"
    median_tol: float = 1e-8
    median_max_iter: int = 10000

    @classmethod
    def from_config(cls, cfg: dict) -> "FeatureOptions":
        median = cfg.get("spatial_median", {})
        return cls(on_degenerate=cfg.get("fqa", {}).get("on_degenerate", "raise"),
                   median_tol=float(median.get("tol", 1e-8)),
                   median_max_iter=int(median.get("max_iter", 10000)))


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    """对称、非负、对角为零的 n×n 矩阵，并记录生成它的度量"""

    values: np.ndarray
    metric: Metric
    ids: List[str] = field(default_factory=list)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise DimensionError(f"相异度矩阵必须是方阵，当前形状 {vals.shape}")
        if not np.allclose(vals, vals.T, rtol=0.0, atol=1e-12):
            raise DomainError("相异度矩阵必须对称")
        if np.any(vals < 0) or np.any(np.diag(vals) != 0):
            raise DomainError("相异度矩阵必须非负且对角为零")
        vals.setflags(write=False)
        ids = list(self.ids) if self.ids else [str(i) for i in range(vals.shape[0])]
        if len(ids) != vals.shape[0]:
            raise DimensionError(f"序列标识数 {len(ids)} 与矩阵阶数 {vals.shape[0]} 不一致")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def to_dict(self) -> dict:
        return {"metric": self.metric.value, "ids": self.ids, "values": self.values.tolist()}

    def to_csv(self, path: Union[str, Path]) -> Path:
        return save_matrix_csv(self.values, path, header=self.ids)

    @classmethod
    def from_csv(cls, path: Union[str, Path], metric: Union[Metric, str] = Metric.FQA) -> "DissimilarityMatrix":
        """读取带表头（序列标识）的矩阵 CSV"""
        path = Path(path)
        with open(path, "r", encoding="utf-8", newline="") as f:
            records = [(line_no, record) for line_no, record in enumerate(csv.reader(f), start=1)
                       if record and any(cell.strip() for cell in record)]
        if len(records) < 2:
            raise ParseError(f"{path.name}: 没有数据行")
        ids = records[0][1]
        rows = []
        for line_no, record in records[1:]:
            if len(record) != len(ids):
                raise ParseError(f"{path.name}: 行长度 {len(record)} 与表头长度 {len(ids)} 不一致", row=line_no)
            parsed = []
            for col_no, cell in enumerate(record, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ParseError(f"{path.name}: 非数值单元格 {cell!r}", row=line_no, column=col_no) from None
            rows.append(parsed)
        return cls(np.array(rows), metric, ids)


# ------------------------
# 逐序列特征
# ------------------------
def series_features(X: FunctionalTimeSeries, metric: Union[Metric, str], params: FqaParams,
                    options: FeatureOptions = FeatureOptions()) -> np.ndarray:
    """
    单条序列在给定度量下的缩放特征向量。

    竞争度量使用 params.lags 作为滞后集合，缩放常数为 1/sqrt(4L)。
    """
    metric = Metric(metric)
    if metric is Metric.FQA:
        return feature_vector(X, params, options.on_degenerate).values
    if metric is Metric.FACF:
        return facf_features(X, params.lags)
    if metric is Metric.FSACF:
        return fsacf_features(X, params.lags, options.median_tol, options.median_max_iter)
    if metric is Metric.K_M:
        return kendall_features(X, params.lags, Preorder.MAX)
    return kendall_features(X, params.lags, Preorder.INTEGRAL)


def _safe_features(X, metric, params, options):
    # 异常作为返回值带回主进程，由主进程补充序列对信息
    try:
        return series_features(X, metric, params, options)
    except FqaClusteringError as e:
        return e


def collection_features(collection: Sequence[FunctionalTimeSeries], metric: Union[Metric, str],
                        params: FqaParams, options: FeatureOptions = FeatureOptions(),
                        n_jobs: int = 1) -> np.ndarray:
    """
    整个序列集合的特征矩阵（n×d），可并行；结果与顺序计算逐位相同。
    """
    metric = Metric(metric)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_safe_features)(X, metric, params, options) for X in collection
    )
    for i, res in enumerate(results):
        if isinstance(res, Exception):
            raise PairwiseError(f"{type(res).__name__}: {res}", collection[i].label, index=i) from res
    return np.vstack(results)


def pairwise_matrix(collection: Sequence[FunctionalTimeSeries], params: FqaParams,
                    metric: Union[Metric, str] = Metric.FQA,
                    options: FeatureOptions = FeatureOptions(), n_jobs: int = 1) -> DissimilarityMatrix:
    """
    计算两两相异度矩阵。

    参数:
        - collection: 至少 2 条序列
        - params: FQA 参数（竞争度量只使用其中的滞后集合）
        - metric: FQA / FACF / FSACF / K_m / K_i
        - options: 退化坐标处理与空间中位数收敛参数
        - n_jobs: 并行进程数

    返回值:
        DissimilarityMatrix，(i, j) 元素等于 metric(X_i, X_j)
    """
    if len(collection) < 2:
        raise DomainError("相异度矩阵至少需要 2 条序列")
    metric = Metric(metric)
    features = collection_features(collection, metric, params, options, n_jobs)
    values = squareform(pdist(features, metric="sqeuclidean"))
    log.info(f"{metric.value} 相异度矩阵计算完成: n={len(collection)}, 特征维度={features.shape[1]}")
    return DissimilarityMatrix(values, metric, [X.label for X in collection])
