#!/usr/bin/env python3
"""
基于函数型自相关的对照相异度
- FACF: 自协方差核的 Hilbert-Schmidt 范数除以 C_0 的迹
- FSACF: 以空间中位数为中心的球面自相关
积分统一使用网格上的复合梯形公式
"""

from typing import Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from scripts.fts.core import FunctionalTimeSeries, Grid
from scripts.log.log import log
from scripts.utils.errors import ConvergenceError, DegenerateVariance, DomainError

# 中心化曲线范数低于该值时视为与中心重合，对应项记为 0
ZERO_NORM = 1e-12


def autocovariance_kernel(X: FunctionalTimeSeries, lag: int) -> np.ndarray:
    """Ĉ_h(u, v) = (1/T) Σ_{t=1}^{T-h} (X_t(u) - X̄(u)) (X_{t+h}(v) - X̄(v))"""
    Y = X.values - X.values.mean(axis=0)
    return Y[:X.T - lag].T @ Y[lag:] / X.T


def facf(X: FunctionalTimeSeries, lag: int) -> float:
    if not 0 <= lag <= X.T - 2:
        raise DomainError(f"FACF 滞后 {lag} 超出范围 [0, {X.T - 2}]")
    u = X.grid.points
    c0 = autocovariance_kernel(X, 0)
    denominator = trapezoid(np.diag(c0), u)
    if denominator <= 0.0:
        raise DegenerateVariance(f"序列 {X.label} 为常数序列，FACF 分母为零")
    cl = c0 if lag == 0 else autocovariance_kernel(X, lag)
    numerator = np.sqrt(trapezoid(trapezoid(cl ** 2, u, axis=1), u))
    return float(numerator / denominator)


# ------------------------
# 空间中位数
# ------------------------
def _l2_norms(diff: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum((diff ** 2) @ weights, 0.0))


def spatial_median(curves, grid: Optional[Grid] = None, tol: float = 1e-8,
                   max_iter: int = 10000) -> np.ndarray:
    """
    L2 意义下的几何中位数，使用在数据点处带修正的 Weiszfeld 迭代。

    参数:
        - curves: n×p 曲线矩阵（或 p 维向量列表）
        - grid: 网格，决定梯形积分权重；缺省为等距网格
        - tol: 相邻两次迭代的 L2 距离小于 tol 时停止
        - max_iter: 最大迭代次数，超过则抛出 ConvergenceError

    两条曲线时初值（均值）即为中点，迭代保持不动，因此返回中点。
    """
    curves = np.atleast_2d(np.asarray(curves, dtype=float))
    n, p = curves.shape
    if n < 1:
        raise DomainError("空间中位数至少需要一条曲线")
    weights = (grid if grid is not None else Grid.uniform(p)).trapezoid_weights()

    y = curves.mean(axis=0)
    for it in range(1, max_iter + 1):
        dist = _l2_norms(curves - y, weights)
        nonzero = dist > 0.0
        if not nonzero.any():
            return y
        inv = 1.0 / dist[nonzero]
        target = (curves[nonzero] * inv[:, None]).sum(axis=0) / inv.sum()
        n_zero = n - int(nonzero.sum())
        if n_zero == 0:
            y_new = target
        else:
            # 当前点与某条曲线重合：按 Vardi-Zhang 方式衰减步长
            r = float(_l2_norms((target - y)[None, :] * inv.sum(), weights)[0])
            eta = n_zero / r if r > 0.0 else 1.0
            y_new = max(0.0, 1.0 - eta) * target + min(1.0, eta) * y
        step = float(_l2_norms((y_new - y)[None, :], weights)[0])
        y = y_new
        if step < tol:
            log.debug(f"空间中位数在第 {it} 次迭代收敛")
            return y
    raise ConvergenceError(f"空间中位数在 {max_iter} 次迭代内未收敛")


def fsacf(X: FunctionalTimeSeries, lag: int, center: Optional[np.ndarray] = None,
          tol: float = 1e-8, max_iter: int = 10000) -> float:
    """
    函数型球面自相关 (1/T) Σ <S(X_i - μ), S(X_{i+l} - μ)>，S(f) = f / ||f||。

    center 缺省时使用空间中位数；与中心重合的曲线贡献 0。
    """
    if not 1 <= lag <= X.T - 1:
        raise DomainError(f"FSACF 滞后 {lag} 超出范围 [1, {X.T - 1}]")
    weights = X.grid.trapezoid_weights()
    mu = spatial_median(X.values, X.grid, tol, max_iter) if center is None else np.asarray(center, float)
    Z = X.values - mu
    norms = _l2_norms(Z, weights)
    keep = norms >= ZERO_NORM
    if not keep.any():
        raise DegenerateVariance(f"序列 {X.label} 的所有曲线都与中心重合")
    S = np.zeros_like(Z)
    S[keep] = Z[keep] / norms[keep, None]
    inner = (S[:X.T - lag] * S[lag:]) @ weights
    return float(inner.sum() / X.T)


# ------------------------
# 相异度
# ------------------------
def _check_lags(lags: Sequence[int]) -> tuple:
    lags = tuple(int(l) for l in lags)
    if not lags:
        raise DomainError("滞后集合不能为空")
    return lags


def facf_features(X: FunctionalTimeSeries, lags: Sequence[int]) -> np.ndarray:
    """按 1/sqrt(4L) 缩放的 FACF 向量，平方欧氏距离即为 d_FACF"""
    lags = _check_lags(lags)
    return np.array([facf(X, l) for l in lags]) / np.sqrt(4.0 * len(lags))


def fsacf_features(X: FunctionalTimeSeries, lags: Sequence[int], tol: float = 1e-8,
                   max_iter: int = 10000) -> np.ndarray:
    lags = _check_lags(lags)
    weights = X.grid.trapezoid_weights()
    mu = spatial_median(X.values, X.grid, tol, max_iter)
    if not (_l2_norms(X.values - mu, weights) >= ZERO_NORM).any():
        raise DegenerateVariance(f"序列 {X.label} 的所有曲线都与空间中位数重合")
    return np.array([fsacf(X, l, center=mu) for l in lags]) / np.sqrt(4.0 * len(lags))


def d_facf(X1: FunctionalTimeSeries, X2: FunctionalTimeSeries, lags: Sequence[int]) -> float:
    lags = _check_lags(lags)
    r1 = np.array([facf(X1, l) for l in lags])
    r2 = np.array([facf(X2, l) for l in lags])
    return float(np.sum((r1 - r2) ** 2) / (4.0 * len(lags)))


def d_fsacf(X1: FunctionalTimeSeries, X2: FunctionalTimeSeries, lags: Sequence[int],
            tol: float = 1e-8, max_iter: int = 10000) -> float:
    lags = _check_lags(lags)
    v1 = fsacf_features(X1, lags, tol, max_iter)
    v2 = fsacf_features(X2, lags, tol, max_iter)
    return float(np.sum((v1 - v2) ** 2))
