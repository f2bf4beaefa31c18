#!/usr/bin/env python3
"""
模糊 C-中心点（C-medoids）与模糊 C-均值（C-means）
两者交替更新隶属度与原型，多次随机初始化后返回目标函数最小的一次
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial.distance import cdist

from scripts.fqa.dissimilarity import DissimilarityMatrix
from scripts.fqa.fqa import FqaFeatureVector
from scripts.log.log import log
from scripts.utils.errors import DegenerateCluster, DimensionError, DomainError

MEDOIDS = "medoids"
CENTROIDS = "centroids"


# ------------------------
# 配置与结果
# ------------------------
@dataclass(frozen=True)
class SolverConfig:
    C: int = 2
    m: float = 1.5
    max_iter: int = 100000
    n_starts: int = 200
    seed: int = 0
    tol: float = 1e-6
    n_jobs: int = 1

    def __post_init__(self):
        if int(self.C) < 2:
            raise DomainError(f"聚类数 C 必须 ≥ 2，当前为 {self.C}")
        if not float(self.m) > 1.0:
            raise DomainError(f"模糊参数 m 必须 > 1，当前为 {self.m}")
        if int(self.max_iter) < 1 or int(self.n_starts) < 1:
            raise DomainError("max_iter 与 n_starts 必须为正整数")
        if not float(self.tol) > 0.0:
            raise DomainError(f"停止容差必须为正，当前为 {self.tol}")
        object.__setattr__(self, "C", int(self.C))
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "max_iter", int(self.max_iter))
        object.__setattr__(self, "n_starts", int(self.n_starts))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "tol", float(self.tol))

    def replace(self, **changes) -> "SolverConfig":
        values = self.to_dict()
        values.update(changes)
        return SolverConfig(**values)

    def to_dict(self) -> dict:
        return {"C": self.C, "m": self.m, "max_iter": self.max_iter, "n_starts": self.n_starts,
                "seed": self.seed, "tol": self.tol, "n_jobs": self.n_jobs}

    @classmethod
    def from_config(cls, cfg: dict) -> "SolverConfig":
        keys = ("C", "m", "max_iter", "n_starts", "seed", "tol", "n_jobs")
        return cls(**{k: cfg[k] for k in keys if k in cfg})


@dataclass(eq=False)
class FuzzyPartition:
    """
    模糊划分结果。

    prototypes 为中心点下标（C-medoids）或中心特征向量矩阵（C-means），由 kind 区分。
    start_objectives 保存每次随机初始化的最终目标函数值。
    """

    memberships: np.ndarray
    prototypes: np.ndarray
    kind: str
    objective: float
    iterations: int
    converged: bool
    m: float
    start_objectives: List[float] = field(default_factory=list)
    best_start: int = 0
    objective_history: List[float] = field(default_factory=list)
    ids: List[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return int(self.memberships.shape[0])

    @property
    def C(self) -> int:
        return int(self.memberships.shape[1])

    def hard_labels(self) -> np.ndarray:
        """最大隶属度规则，相等时取下标最小的类"""
        return np.argmax(self.memberships, axis=1)

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "m": self.m,
            "kind": self.kind,
            "ids": list(self.ids),
            "memberships": self.memberships.tolist(),
            "prototypes": self.prototypes.tolist(),
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "best_start": self.best_start,
            "start_objectives": list(self.start_objectives),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FuzzyPartition":
        kind = doc.get("kind", MEDOIDS)
        prototypes = np.asarray(doc["prototypes"], dtype=int if kind == MEDOIDS else float)
        return cls(memberships=np.asarray(doc["memberships"], dtype=float), prototypes=prototypes,
                   kind=kind, objective=float(doc["objective"]), iterations=int(doc.get("iterations", 0)),
                   converged=bool(doc.get("converged", True)), m=float(doc["m"]),
                   start_objectives=list(doc.get("start_objectives", [])),
                   best_start=int(doc.get("best_start", 0)), ids=list(doc.get("ids", [])))


# ------------------------
# 隶属度更新
# ------------------------
def membership_from_distances(d, m: float) -> np.ndarray:
    """
    u_c = [Σ_c' (d_c / d_c')^{1/(m-1)}]^{-1}，支持单行向量或 n×C 矩阵。

    某行恰有一个零距离时该类隶属度为 1；多个零距离时在这些类之间平分。
    计算使用 (d_min / d_c)^{1/(m-1)} 的归一化形式，m 接近 1 时不会溢出。
    """
    if not m > 1.0:
        raise DomainError(f"模糊参数 m 必须 > 1，当前为 {m}")
    d = np.asarray(d, dtype=float)
    single = d.ndim == 1
    D = np.atleast_2d(d)
    if np.any(D < 0) or not np.all(np.isfinite(D)):
        raise DomainError("距离必须是非负有限值")
    U = np.empty_like(D)
    zero = D == 0.0
    has_zero = zero.any(axis=1)
    if has_zero.any():
        counts = zero[has_zero].sum(axis=1, keepdims=True)
        U[has_zero] = zero[has_zero] / counts
        ties = int(np.count_nonzero(counts > 1))
        if ties:
            log.debug(f"{ties} 个对象与多个原型距离为零，隶属度在这些类之间平分")
    rest = ~has_zero
    if rest.any():
        R = D[rest]
        W = (R.min(axis=1, keepdims=True) / R) ** (1.0 / (m - 1.0))
        U[rest] = W / W.sum(axis=1, keepdims=True)
    return U[0] if single else U


def centroids_from_memberships(features: np.ndarray, U: np.ndarray, m: float) -> np.ndarray:
    """中心 = Σ_i u_ic^m v_i / Σ_i u_ic^m"""
    W = np.asarray(U, dtype=float) ** m
    totals = W.sum(axis=0)
    if np.any(totals <= 0.0):
        raise DegenerateCluster(f"第 {int(np.argmin(totals))} 类的隶属度之和为零")
    return (W.T @ features) / totals[:, None]


def _start_rng(seed: int, start: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(start)])


def _pick_best(runs: list, kind: str, m: float, ids: Sequence[str]) -> FuzzyPartition:
    objectives = [r["objective"] for r in runs]
    best = int(np.argmin(objectives))  # 相等时取编号最小的初始化
    run = runs[best]
    return FuzzyPartition(memberships=run["U"], prototypes=run["prototypes"], kind=kind,
                          objective=run["objective"], iterations=run["iterations"],
                          converged=run["converged"], m=m, start_objectives=objectives,
                          best_start=best, objective_history=run["history"], ids=list(ids))


# ------------------------
# 模糊 C-medoids
# ------------------------
def _update_medoids(D: np.ndarray, Um: np.ndarray, current: np.ndarray) -> np.ndarray:
    """每类选使 Σ_i u_ic^m D(i, j) 最小的 j；中心点互不相同，代价相等时保留当前中心点"""
    cost = Um.T @ D
    chosen = np.empty_like(current)
    taken = np.zeros(D.shape[0], dtype=bool)
    for c in range(cost.shape[0]):
        row = np.where(taken, np.inf, cost[c])
        j = int(np.argmin(row))
        if not taken[current[c]] and row[current[c]] <= row[j]:
            j = int(current[c])
        chosen[c] = j
        taken[j] = True
    return chosen


def _medoids_run(D: np.ndarray, C: int, m: float, max_iter: int, rng: np.random.Generator) -> dict:
    n = D.shape[0]
    medoids = rng.choice(n, size=C, replace=False)
    history = []
    for it in range(1, max_iter + 1):
        dist = D[:, medoids]
        U = membership_from_distances(dist, m)
        Um = U ** m
        objective = float((Um * dist).sum())
        history.append(objective)
        new = _update_medoids(D, Um, medoids)
        if np.array_equal(new, medoids):
            return {"U": U, "prototypes": medoids, "objective": objective, "iterations": it,
                    "converged": True, "history": history}
        medoids = new
    dist = D[:, medoids]
    U = membership_from_distances(dist, m)
    objective = float(((U ** m) * dist).sum())
    history.append(objective)
    return {"U": U, "prototypes": medoids, "objective": objective, "iterations": max_iter,
            "converged": False, "history": history}


def fuzzy_c_medoids(D: Union[DissimilarityMatrix, np.ndarray], cfg: SolverConfig) -> FuzzyPartition:
    """
    基于相异度矩阵的模糊 C-medoids。

    参数:
        - D: 相异度矩阵
        - cfg: 求解器配置（C, m, 最大迭代次数, 初始化次数, 随机种子）

    返回值:
        目标函数最小的 FuzzyPartition，相同 seed 结果确定；并行与顺序执行结果一致。
    """
    ids = D.ids if isinstance(D, DissimilarityMatrix) else []
    values = np.asarray(D.values if isinstance(D, DissimilarityMatrix) else D, dtype=float)
    n = values.shape[0]
    if values.ndim != 2 or values.shape[1] != n:
        raise DimensionError(f"相异度矩阵必须是方阵，当前形状 {values.shape}")
    if cfg.C > n:
        raise DomainError(f"聚类数 C={cfg.C} 大于序列数 n={n}")
    runs = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_medoids_run)(values, cfg.C, cfg.m, cfg.max_iter, _start_rng(cfg.seed, s))
        for s in range(cfg.n_starts)
    )
    partition = _pick_best(runs, MEDOIDS, cfg.m, ids)
    if not partition.converged:
        log.warning(f"C-medoids 最优初始化在 {cfg.max_iter} 次迭代内未收敛")
    log.debug(f"C-medoids 完成: C={cfg.C}, m={cfg.m}, 目标函数={partition.objective:.6g}, "
              f"最优初始化 #{partition.best_start}")
    return partition


# ------------------------
# 模糊 C-means
# ------------------------
def _as_feature_matrix(features) -> np.ndarray:
    if isinstance(features, np.ndarray):
        V = np.asarray(features, dtype=float)
    else:
        rows = [f.values if isinstance(f, FqaFeatureVector) else np.asarray(f, dtype=float) for f in features]
        lengths = {r.size for r in rows}
        if len(lengths) > 1:
            raise DimensionError(f"特征向量长度不一致: {sorted(lengths)}")
        V = np.vstack(rows)
    if V.ndim != 2:
        raise DimensionError("特征矩阵必须是二维的")
    return V


def _means_run(V: np.ndarray, C: int, m: float, max_iter: int, tol: float,
               rng: np.random.Generator) -> dict:
    n = V.shape[0]
    U = rng.dirichlet(np.ones(C), size=n)
    history = []
    converged = False
    centroids = None
    for it in range(1, max_iter + 1):
        centroids = centroids_from_memberships(V, U, m)
        dist = cdist(V, centroids, metric="sqeuclidean")
        U_new = membership_from_distances(dist, m)
        history.append(float(((U_new ** m) * dist).sum()))
        delta = float(np.abs(U_new - U).max())
        U = U_new
        if delta < tol:
            converged = True
            break
    return {"U": U, "prototypes": centroids, "objective": history[-1], "iterations": len(history),
            "converged": converged, "history": history}


def fuzzy_c_means(features, cfg: SolverConfig, ids: Optional[Sequence[str]] = None) -> FuzzyPartition:
    """
    基于特征向量（平方欧氏距离）的模糊 C-means。

    交替更新中心（隶属度 m 次幂加权平均）与隶属度，
    直到相邻两次隶属度矩阵的最大绝对差小于 tol 或达到 max_iter。
    """
    V = _as_feature_matrix(features)
    if ids is None and not isinstance(features, np.ndarray):
        ids = [getattr(f, "series_id", None) or str(i) for i, f in enumerate(features)]
    n = V.shape[0]
    if cfg.C > n:
        raise DomainError(f"聚类数 C={cfg.C} 大于序列数 n={n}")
    runs = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_means_run)(V, cfg.C, cfg.m, cfg.max_iter, cfg.tol, _start_rng(cfg.seed, s))
        for s in range(cfg.n_starts)
    )
    partition = _pick_best(runs, CENTROIDS, cfg.m, ids or [])
    if not partition.converged:
        log.warning(f"C-means 最优初始化在 {cfg.max_iter} 次迭代内未收敛")
    log.debug(f"C-means 完成: C={cfg.C}, m={cfg.m}, 目标函数={partition.objective:.6g}, "
              f"迭代 {partition.iterations} 次")
    return partition
