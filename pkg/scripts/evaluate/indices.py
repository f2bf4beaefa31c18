#!/usr/bin/env python3
"""
聚类质量评价
- ARIF / JIF: 模糊划分与真实硬划分的成对计数比较（max-min 结合度）
- ARI / JI: 按最大隶属度硬化后的经典指标
- 不确定场景成功判定、模糊度曲线下面积、按隶属度加权的类特征均值
"""

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from sklearn.metrics import adjusted_rand_score
from sklearn.metrics.cluster import pair_confusion_matrix

from scripts.log.log import log
from scripts.utils.errors import DegenerateCluster, DimensionError, DomainError, IndexUndefinedError


@dataclass(eq=False)
class PartitionPair:
    """参考硬标签与候选隶属度矩阵"""

    reference: np.ndarray
    candidate: np.ndarray

    def __post_init__(self):
        _, codes = np.unique(np.asarray(self.reference), return_inverse=True)
        self.reference = codes.ravel()
        U = getattr(self.candidate, "memberships", self.candidate)
        self.candidate = np.atleast_2d(np.asarray(U, dtype=float))
        if self.candidate.shape[0] != self.reference.size:
            raise DimensionError(f"参考标签数 {self.reference.size} 与隶属度行数 {self.candidate.shape[0]} 不一致")
        if self.reference.size < 2:
            raise DomainError("至少需要 2 个对象")

    def check_reference(self):
        if np.unique(self.reference).size < 2:
            raise IndexUndefinedError("参考划分只有一个类别，ARI 类指标无定义")


def one_hot(labels: np.ndarray, n_classes: Optional[int] = None) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    k = int(labels.max()) + 1 if n_classes is None else n_classes
    out = np.zeros((labels.size, k))
    out[np.arange(labels.size), labels] = 1.0
    return out


def _pair_degrees(U: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """所有 i < j 对的同类程度 s 与异类程度 d"""
    i, j = np.triu_indices(U.shape[0], k=1)
    bond = np.minimum(U[i][:, :, None], U[j][:, None, :])
    C = U.shape[1]
    same = bond[:, np.arange(C), np.arange(C)].max(axis=1)
    if C > 1:
        off = bond.copy()
        off[:, np.arange(C), np.arange(C)] = -np.inf
        diff = off.reshape(off.shape[0], -1).max(axis=1)
    else:
        diff = np.zeros_like(same)
    return same, diff


def _pair_counts(reference: np.ndarray, U: np.ndarray) -> Tuple[float, float, float, float]:
    s_r, d_r = _pair_degrees(one_hot(reference))
    s_q, d_q = _pair_degrees(U)
    a = float(np.minimum(s_r, s_q).sum())
    b = float(np.minimum(s_r, d_q).sum())
    c = float(np.minimum(d_r, s_q).sum())
    d = float(np.minimum(d_r, d_q).sum())
    return a, b, c, d


def _ari_from_counts(a: float, b: float, c: float, d: float) -> float:
    if b == 0.0 and c == 0.0:
        return 1.0
    denominator = (a + b) * (b + d) + (a + c) * (c + d)
    return 2.0 * (a * d - b * c) / denominator if denominator else 0.0


def _jaccard_from_counts(a: float, b: float, c: float) -> float:
    total = a + b + c
    return a / total if total else 1.0


def arif_jif(pair: PartitionPair) -> Tuple[float, float]:
    """模糊 ARI 与模糊 Jaccard 指数；候选划分为硬划分时退化为经典指标"""
    pair.check_reference()
    a, b, c, d = _pair_counts(pair.reference, pair.candidate)
    return _ari_from_counts(a, b, c, d), _jaccard_from_counts(a, b, c)


def ari_ji(pair: PartitionPair) -> Tuple[float, float]:
    """按最大隶属度硬化（相等取下标最小）后的 ARI 与 Jaccard"""
    pair.check_reference()
    hard = np.argmax(pair.candidate, axis=1)
    ari = float(adjusted_rand_score(pair.reference, hard))
    (_, fp), (fn, tp) = pair_confusion_matrix(pair.reference, hard)
    total = tp + fp + fn
    ji = float(tp / total) if total else 1.0
    return ari, ji


# ------------------------
# 不确定场景
# ------------------------
def uncertain_success(U: np.ndarray, labels: Sequence[str], threshold: float = 0.7,
                      isolated_label: str = "isolated") -> bool:
    """
    5 + 5 + 1 结构的成功判定:
    (i)(ii) 两组序列分别以 > threshold 的隶属度落在不同的两类；
    (iii) 孤立序列两个隶属度都 ≤ threshold。
    """
    U = np.atleast_2d(np.asarray(getattr(U, "memberships", U), dtype=float))
    labels = [str(l) for l in labels]
    if U.shape[0] != len(labels):
        raise DomainError(f"隶属度行数 {U.shape[0]} 与标签数 {len(labels)} 不一致")
    if U.shape[1] != 2:
        raise DomainError(f"不确定场景要求 C=2，当前 C={U.shape[1]}")
    groups = sorted({l for l in labels if l != isolated_label})
    isolated = [i for i, l in enumerate(labels) if l == isolated_label]
    if len(groups) != 2 or len(isolated) != 1:
        raise DomainError("不确定场景需要两组序列加一条孤立序列")
    first = np.array([l == groups[0] for l in labels])
    second = np.array([l == groups[1] for l in labels])

    def block_ok(mask, c):
        return bool(np.all(U[mask, c] > threshold))

    blocks = any(block_ok(first, c) and block_ok(second, 1 - c) for c in (0, 1))
    isolated_ok = bool(np.all(U[isolated[0]] <= threshold))
    return blocks and isolated_ok


def area_under_fuzziness_curve(m_values: Sequence[float], success_rates: Sequence[float]) -> float:
    m_values = np.asarray(m_values, dtype=float)
    rates = np.asarray(success_rates, dtype=float)
    if m_values.shape != rates.shape:
        raise DomainError(f"m 值个数 {m_values.size} 与成功率个数 {rates.size} 不一致")
    if m_values.size > 1 and np.any(np.diff(m_values) <= 0):
        raise DomainError("m 值必须严格递增")
    return float(trapezoid(rates, m_values))


# ------------------------
# 类特征摘要
# ------------------------
def cluster_summary(features: np.ndarray, U: np.ndarray) -> np.ndarray:
    """
    每类的加权特征均值 Σ_i u_ic ρ_i / Σ_i u_ic，返回 C×d 矩阵。
    """
    V = np.asarray(features, dtype=float)
    U = np.asarray(getattr(U, "memberships", U), dtype=float)
    if U.shape[0] != V.shape[0]:
        raise DimensionError(f"隶属度行数 {U.shape[0]} 与特征行数 {V.shape[0]} 不一致")
    totals = U.sum(axis=0)
    empty = np.flatnonzero(totals <= 0.0)
    if empty.size:
        raise DegenerateCluster(f"第 {int(empty[0])} 类的隶属度之和为零")
    return (U.T @ V) / totals[:, None]


def crisp_scores(labels: Sequence[str], U: np.ndarray) -> Dict[str, float]:
    """ARIF / JIF / ARI / JI 汇总"""
    pair = PartitionPair(np.asarray(labels), U)
    arif, jif = arif_jif(pair)
    ari, ji = ari_ji(pair)
    log.debug(f"ARIF={arif:.4f} JIF={jif:.4f} ARI={ari:.4f} JI={ji:.4f}")
    return {"ARIF": arif, "JIF": jif, "ARI": ari, "JI": ji}
