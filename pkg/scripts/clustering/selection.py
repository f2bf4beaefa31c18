#!/usr/bin/env python3
"""
超参数选择
- 滞后集合：逐序列对 (X_t, X_{t+l}) 做距离相关 t 检验（Bonferroni 校正），取最显著滞后的最大值
- (C, m)：在网格上运行聚类并取 Xie-Beni 指数最小者
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import dcor
import numpy as np
from rich.table import Table
from scipy.spatial.distance import pdist, squareform

from scripts.clustering.fuzzy import (
    SolverConfig, centroids_from_memberships, fuzzy_c_means, fuzzy_c_medoids,
)
from scripts.fts.core import FunctionalTimeSeries, Grid
from scripts.log.log import log
from scripts.utils.errors import DegenerateSeparation, DegenerateVariance, DomainError, SelectionError

MIN_PAIRS = 10
TESTS = ("t", "permutation")
ALGORITHMS = ("c_medoids", "c_means")


# ------------------------
# Xie-Beni 指数
# ------------------------
def xie_beni(features: np.ndarray, U: np.ndarray, centroids: np.ndarray) -> float:
    """紧致度 / 分离度，越小越好"""
    V = np.asarray(features, dtype=float)
    U = np.asarray(U, dtype=float)
    centroids = np.asarray(centroids, dtype=float)
    separation = pdist(centroids, metric="sqeuclidean").min() if len(centroids) > 1 else 0.0
    if separation <= 0.0:
        raise DegenerateSeparation("存在重合的聚类中心，Xie-Beni 指数无定义")
    dist = ((V[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    compactness = float((U ** 2 * dist).sum())
    return compactness / (V.shape[0] * float(separation))


def xie_beni_for_partition(features: np.ndarray, partition) -> float:
    """C-medoids 划分先用隶属度计算中心，再求指数"""
    V = np.asarray(features, dtype=float)
    if partition.kind == "centroids":
        centroids = partition.prototypes
    else:
        centroids = centroids_from_memberships(V, partition.memberships, partition.m)
    return xie_beni(V, partition.memberships, centroids)


# ------------------------
# 距离相关独立性检验
# ------------------------
def _l2_embed(curves: np.ndarray, grid: Optional[Grid]) -> np.ndarray:
    # 列乘以 sqrt(梯形权重)，欧氏距离即为曲线的 L2 距离
    curves = np.atleast_2d(np.asarray(curves, dtype=float))
    weights = (grid if grid is not None else Grid.uniform(curves.shape[1])).trapezoid_weights()
    return curves * np.sqrt(weights)[None, :]


def distance_correlation_test(x_pairs, y_pairs, grid: Optional[Grid] = None, method: str = "t",
                              n_permutations: int = 999, seed: int = 0):
    """
    两组成对曲线的独立性检验。

    参数:
        - x_pairs, y_pairs: n×p 曲线矩阵，第 i 行构成一对
        - grid: 曲线所在网格
        - method: "t" 为偏差校正距离相关的 t 检验（单侧，自由度 v-1, v = n(n-3)/2）；
                  "permutation" 为置换检验
        - n_permutations / seed: 置换检验的次数与随机种子

    返回值:
        (统计量, p 值)
    """
    x = _l2_embed(x_pairs, grid)
    y = _l2_embed(y_pairs, grid)
    n = x.shape[0]
    if y.shape[0] != n:
        raise DomainError(f"两组样本数不一致: {n} vs {y.shape[0]}")
    if n < MIN_PAIRS:
        raise DomainError(f"距离相关检验至少需要 {MIN_PAIRS} 对样本，当前 {n}")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateVariance("样本全部相同，距离相关无定义")
    if method not in TESTS:
        raise DomainError(f"未知的检验方法: {method}")

    if method == "permutation":
        result = dcor.independence.distance_covariance_test(
            x, y, num_resamples=n_permutations, random_state=seed)
        return float(result.statistic), float(result.pvalue)

    with np.errstate(divide="ignore", invalid="ignore"):
        result = dcor.independence.distance_correlation_t_test(x, y)
    statistic = float(result.statistic)
    # 偏差校正距离相关为 1（数值上可能略大于 1）时统计量为 inf 或 nan
    if not np.isfinite(statistic):
        return float("inf"), 0.0
    return statistic, float(result.pvalue)


# ------------------------
# 滞后选择
# ------------------------
@dataclass
class LagSelection:
    lags: tuple
    alpha: float
    alpha_corrected: float
    L_max: int
    series: List[dict] = field(default_factory=list)
    fallback: bool = False

    def to_dict(self) -> dict:
        return {"lags": list(self.lags), "alpha": self.alpha, "alpha_corrected": self.alpha_corrected,
                "L_max": self.L_max, "fallback": self.fallback, "series": self.series}


def select_lags(collection: Sequence[FunctionalTimeSeries], alpha: float = 0.05, L_max: int = 5,
                method: str = "t", n_permutations: int = 999, seed: int = 0) -> LagSelection:
    """
    逐序列检验滞后 1..L_max 的序列独立性，显著性水平做 Bonferroni 校正 alpha / (n·L_max)。

    每条序列保留被拒绝的滞后中 p 值最小的一个 L_i，返回 {1, ..., max L_i}；
    没有任何序列拒绝时返回 {1}。
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"显著性水平必须在 (0, 1) 内，当前为 {alpha}")
    if L_max < 1:
        raise DomainError(f"L_max 必须 ≥ 1，当前为 {L_max}")
    n = len(collection)
    if n < 1:
        raise DomainError("序列集合不能为空")
    for X in collection:
        if X.T <= L_max + 3 or X.T - L_max < MIN_PAIRS:
            raise DomainError(f"序列 {X.label} 长度 T={X.T} 不足以检验到滞后 {L_max}")

    alpha_corrected = alpha / (n * L_max)
    selected = []
    details = []
    for idx, X in enumerate(collection):
        p_values = []
        for lag in range(1, L_max + 1):
            _, p = distance_correlation_test(X.values[:-lag], X.values[lag:], X.grid, method,
                                             n_permutations, seed + idx * L_max + lag)
            p_values.append(p)
        rejected = [(p, lag) for lag, p in zip(range(1, L_max + 1), p_values) if p < alpha_corrected]
        best = min(rejected)[1] if rejected else None
        if best is not None:
            selected.append(best)
        details.append({"id": X.label, "selected_lag": best, "p_values": p_values})

    fallback = not selected
    lags = (1,) if fallback else tuple(range(1, max(selected) + 1))
    result = LagSelection(lags, alpha, alpha_corrected, L_max, details, fallback)

    table = Table(title=f"滞后选择 (alpha'={alpha_corrected:.3g})")
    table.add_column("序列")
    table.add_column("选中滞后")
    table.add_column("最小 p 值")
    for d in details:
        table.add_row(str(d["id"]), str(d["selected_lag"]), f"{min(d['p_values']):.3g}")
    log.rich(table)
    log.info(f"滞后集合: {list(lags)}" + (" (无显著滞后，使用默认 {1})" if fallback else ""))
    return result


# ------------------------
# (C, m) 选择
# ------------------------
@dataclass
class CmSelection:
    C: int
    m: float
    xbi: float
    table: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"C": self.C, "m": self.m, "xbi": self.xbi, "table": self.table}


def select_C_m(features: np.ndarray, C_grid: Sequence[int], m_grid: Sequence[float], cfg: SolverConfig,
               algorithm: str = "c_medoids", D: Optional[np.ndarray] = None) -> CmSelection:
    """
    在 (C, m) 网格上运行聚类，返回 Xie-Beni 指数最小的组合与完整结果表。

    相等时优先较小的 C，再优先较小的 m。C-medoids 缺省使用特征向量的平方欧氏距离矩阵。
    """
    V = np.asarray(features, dtype=float)
    n = V.shape[0]
    if not C_grid or not m_grid:
        raise DomainError("C 与 m 的候选网格不能为空")
    if algorithm not in ALGORITHMS:
        raise DomainError(f"未知的聚类算法: {algorithm}")
    for C in C_grid:
        if not 2 <= int(C) <= n - 1:
            raise DomainError(f"候选聚类数 C={C} 必须在 [2, {n - 1}] 内")
    if algorithm == "c_medoids" and D is None:
        D = squareform(pdist(V, metric="sqeuclidean"))
    D_values = getattr(D, "values", D)

    table = []
    best = None
    for C in sorted(int(c) for c in C_grid):
        for m in sorted(float(x) for x in m_grid):
            run_cfg = cfg.replace(C=C, m=m)
            if algorithm == "c_medoids":
                partition = fuzzy_c_medoids(D_values, run_cfg)
            else:
                partition = fuzzy_c_means(V, run_cfg)
            try:
                xbi = xie_beni_for_partition(V, partition)
            except DegenerateSeparation:
                xbi = None
            table.append({"C": C, "m": m, "xbi": xbi, "objective": partition.objective})
            if xbi is not None and (best is None or xbi < best[2]):
                best = (C, m, xbi)
    if best is None:
        raise SelectionError("所有 (C, m) 组合的 Xie-Beni 指数都无定义")

    grid_table = Table(title=f"Xie-Beni 指数 ({algorithm})")
    grid_table.add_column("C")
    grid_table.add_column("m")
    grid_table.add_column("XBI")
    for row in table:
        grid_table.add_row(str(row["C"]), f"{row['m']:g}", "-" if row["xbi"] is None else f"{row['xbi']:.4g}")
    log.rich(grid_table)
    log.info(f"选中 C={best[0]}, m={best[1]}, XBI={best[2]:.4g}")
    return CmSelection(best[0], best[1], best[2], table)
