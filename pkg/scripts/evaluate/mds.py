"""
二维度量标度（经典 MDS）与拟合诊断
stress = sqrt( Σ_{i≠j} (||x_i - x_j|| - D_ij)² / Σ_{i≠j} D_ij² )
置换检验: 打乱上三角相异度（保持对称），统计置换后 stress ≤ 观测 stress 的比例
"""

from typing import Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial.distance import pdist, squareform

from scripts.log.log import log
from scripts.utils.errors import DimensionError, DomainError

_EIG_TOL = 1e-12


def _as_matrix(D) -> np.ndarray:
    values = np.asarray(getattr(D, "values", D), dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise DimensionError(f"相异度矩阵必须是方阵，当前形状 {values.shape}")
    return values


def classical_scaling(D: np.ndarray, n_dims: int = 2) -> np.ndarray:
    """双中心化后做特征分解，取最大的 n_dims 个正特征值；不足时以 0 补齐"""
    n = D.shape[0]
    H = np.eye(n) - np.ones((n, n)) / n
    B = -H @ (D ** 2) @ H / 2.0
    evals, evecs = np.linalg.eigh((B + B.T) / 2.0)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    positive = evals > _EIG_TOL * max(1.0, abs(evals[0]))
    k = int(min(n_dims, positive.sum()))
    if k < n_dims:
        log.warning(f"正特征值只有 {k} 个，坐标以 0 补齐到 {n_dims} 维")
    coords = np.zeros((n, n_dims))
    coords[:, :k] = evecs[:, :k] * np.sqrt(evals[:k])
    coords -= coords.mean(axis=0)
    # 符号约定：每一列第一个非零坐标为正
    for col in range(n_dims):
        nz = np.flatnonzero(np.abs(coords[:, col]) > 1e-12)
        if nz.size and coords[nz[0], col] < 0:
            coords[:, col] *= -1.0
    return coords


def stress(coords: np.ndarray, D: np.ndarray) -> float:
    embedded = pdist(coords)
    target = squareform(D, checks=False)
    total = float(np.sum(target ** 2))
    if total == 0.0:
        raise DomainError("相异度全为零，stress 无定义")
    return float(np.sqrt(np.sum((embedded - target) ** 2) / total))


def mds_2d(D) -> Tuple[np.ndarray, float]:
    """经典二维标度，返回 (n×2 坐标, stress)"""
    values = _as_matrix(D)
    if values.shape[0] < 3:
        raise DomainError("二维标度至少需要 3 个对象")
    coords = classical_scaling(values, 2)
    return coords, stress(coords, values)


def _permuted_stress(upper: np.ndarray, n: int, seed: int, index: int) -> float:
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    permuted = squareform(rng.permutation(upper))
    coords = classical_scaling(permuted, 2)
    return stress(coords, permuted)


def mds_permutation_test(D, n_perms: int = 999, seed: int = 0, n_jobs: int = 1) -> float:
    """
    p = (1 + #{置换 stress ≤ 观测 stress}) / (n_perms + 1)，取值在 (0, 1]。
    """
    if n_perms < 99:
        raise DomainError(f"置换次数至少为 99，当前为 {n_perms}")
    values = _as_matrix(D)
    _, observed = mds_2d(values)
    upper = squareform(values, checks=False)
    permuted = Parallel(n_jobs=n_jobs)(
        delayed(_permuted_stress)(upper, values.shape[0], seed, k) for k in range(n_perms)
    )
    hits = int(np.sum(np.asarray(permuted) <= observed))
    p_value = (1 + hits) / (n_perms + 1)
    log.info(f"二维标度: stress={observed:.4f}, 置换检验 p={p_value:.4f} ({n_perms} 次置换)")
    return p_value
