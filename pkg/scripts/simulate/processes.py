#!/usr/bin/env python3
"""
函数型随机过程生成器
- 布朗运动曲线
- FAR(2): X_t = ∫Γ1 X_{t-1} + ∫Γ2 X_{t-2} + ε_t，Γ_k(u, v) = c exp[-c'(u² + v²)]
- 非线性 FAR(1): X_t = 0.75 G exp(G) + ε_t，G = ∫Γ1 X_{t-1}
- fGARCH(1,1): σ²_t = δ + ∫α X²_{t-1} + ∫β σ²_{t-1}，X_t = σ_t ε_t
积分算子离散为 K[j, k] = Γ(u_j, v_k) w_k（w 为梯形权重）
"""

from typing import Optional, Sequence, Union

import numpy as np

from scripts.fts.core import FunctionalTimeSeries, Grid
from scripts.utils.errors import DomainError, StabilityError

SeedLike = Union[int, Sequence[int], np.random.Generator, None]

GARCH_DELTA = 0.01
NONLINEAR_GAIN = 0.75
STABILITY_BOUND = 50.0


def as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ------------------------
# 布朗运动
# ------------------------
def brownian_curves(n: int, p: int, scale: float = 1.0, seed: SeedLike = None) -> np.ndarray:
    """n 条独立标准布朗运动在等距网格上的取值（B(0) = 0），再乘以 scale"""
    if p < 2:
        raise DomainError(f"网格点数 p 必须 ≥ 2，当前为 {p}")
    if not scale > 0:
        raise DomainError(f"scale 必须为正，当前为 {scale}")
    rng = as_rng(seed)
    du = 1.0 / (p - 1)
    increments = rng.normal(0.0, np.sqrt(du), size=(n, p - 1))
    paths = np.zeros((n, p))
    paths[:, 1:] = np.cumsum(increments, axis=1)
    return paths * scale


def brownian_curve(p: int, scale: float = 1.0, seed: SeedLike = None) -> np.ndarray:
    return brownian_curves(1, p, scale, seed)[0]


def _gaussian_kernel_operator(c: float, c2: float, grid: Grid) -> np.ndarray:
    u = grid.points
    kernel = c * np.exp(-c2 * (u[:, None] ** 2 + u[None, :] ** 2))
    return kernel * grid.trapezoid_weights()[None, :]


def _noise_scale(T: int, noise_scale: Optional[float]) -> float:
    return 1.0 / np.sqrt(T) if noise_scale is None else float(noise_scale)


# ------------------------
# FAR(2)
# ------------------------
def far2(c: Sequence[float], T: int, p: int = 100, seed: SeedLike = None, burn_in: int = 100,
         noise_scale: Optional[float] = None, series_id: Optional[str] = None) -> FunctionalTimeSeries:
    """
    FAR(2) 过程。

    参数:
        - c: (c1, c2, c3, c4) 核系数
        - T: 输出长度（丢弃 burn_in 个预热值之后）
        - p: 网格点数
        - seed: 随机种子或 Generator
        - noise_scale: 噪声布朗运动的缩放，缺省为 1/sqrt(T)，使 u=1 处方差为 1/T
    """
    c = tuple(float(x) for x in c)
    if len(c) != 4:
        raise DomainError(f"FAR(2) 需要 4 个系数，当前 {len(c)} 个")
    if T < 3:
        raise DomainError(f"FAR(2) 长度 T 必须 ≥ 3，当前为 {T}")
    rng = as_rng(seed)
    grid = Grid.uniform(p)
    K1 = _gaussian_kernel_operator(c[0], c[1], grid)
    K2 = _gaussian_kernel_operator(c[2], c[3], grid)
    total = T + burn_in
    noise = brownian_curves(total, p, _noise_scale(T, noise_scale), rng)
    prev2 = np.zeros(p)
    prev1 = np.zeros(p)
    out = np.empty((total, p))
    for t in range(total):
        x = K1 @ prev1 + K2 @ prev2 + noise[t]
        out[t] = x
        prev2, prev1 = prev1, x
    return FunctionalTimeSeries(out[burn_in:], grid, series_id)


# ------------------------
# 非线性 FAR(1)
# ------------------------
def nonlinear_far1(c: Sequence[float], T: int, p: int = 100, seed: SeedLike = None, burn_in: int = 100,
                   noise_scale: Optional[float] = None,
                   series_id: Optional[str] = None) -> FunctionalTimeSeries:
    c = tuple(float(x) for x in c)
    if len(c) != 2:
        raise DomainError(f"非线性 FAR(1) 需要 2 个系数，当前 {len(c)} 个")
    if T < 2:
        raise DomainError(f"非线性 FAR(1) 长度 T 必须 ≥ 2，当前为 {T}")
    rng = as_rng(seed)
    grid = Grid.uniform(p)
    K1 = _gaussian_kernel_operator(c[0], c[1], grid)
    total = T + burn_in
    noise = brownian_curves(total, p, _noise_scale(T, noise_scale), rng)
    prev = np.zeros(p)
    out = np.empty((total, p))
    for t in range(total):
        G = K1 @ prev
        if np.max(np.abs(G)) > STABILITY_BOUND:
            raise StabilityError(f"非线性 FAR(1) 在第 {t} 步发散 (|G| > {STABILITY_BOUND})")
        x = NONLINEAR_GAIN * G * np.exp(G) + noise[t]
        out[t] = x
        prev = x
    return FunctionalTimeSeries(out[burn_in:], grid, series_id)


# ------------------------
# fGARCH(1,1)
# ------------------------
def garch_innovations(n: int, p: int, seed: SeedLike = None) -> np.ndarray:
    """
    ε(u) = sqrt(ln2) · 2^{-200u} · B(2^{400u} / ln2)，B 为标准布朗运动。

    在递增的变换时间 s_j 上，ε_j = 2^{-200Δu_j} ε_{j-1} + sqrt(1 - 2^{-400Δu_j}) Z_j，
    与直接取布朗运动增量同分布，但避免了 2^{400u} 量级的中间量；每点方差恰为 1。
    """
    rng = as_rng(seed)
    u = Grid.uniform(p).points
    decay = np.exp2(-200.0 * np.diff(u))
    innovation_sd = np.sqrt(-np.expm1(-400.0 * np.log(2.0) * np.diff(u)))
    Z = rng.standard_normal((n, p))
    eps = np.empty((n, p))
    eps[:, 0] = Z[:, 0]
    for j in range(1, p):
        eps[:, j] = decay[j - 1] * eps[:, j - 1] + innovation_sd[j - 1] * Z[:, j]
    return eps


def fgarch11(c: float, T: int, p: int = 100, seed: SeedLike = None, burn_in: int = 100,
             series_id: Optional[str] = None, return_variance: bool = False):
    """
    fGARCH(1,1) 过程，α(u, v) = β(u, v) = c·u(1-u)·v(1-v)，δ = 0.01，σ²_0 ≡ δ。

    return_variance=True 时同时返回条件方差曲线矩阵（同样丢弃预热部分）。
    """
    if T < 2:
        raise DomainError(f"fGARCH(1,1) 长度 T 必须 ≥ 2，当前为 {T}")
    rng = as_rng(seed)
    grid = Grid.uniform(p)
    u = grid.points
    bump = u * (1.0 - u)
    A = float(c) * bump[:, None] * bump[None, :] * grid.trapezoid_weights()[None, :]
    total = T + burn_in
    eps = garch_innovations(total, p, rng)
    sigma2 = np.full(p, GARCH_DELTA)
    x_prev = np.zeros(p)
    out = np.empty((total, p))
    variances = np.empty((total, p))
    for t in range(total):
        sigma2 = GARCH_DELTA + A @ (x_prev ** 2) + A @ sigma2
        if np.any(sigma2 <= 0):
            raise AssertionError("条件方差必须为正")
        x_prev = np.sqrt(sigma2) * eps[t]
        out[t] = x_prev
        variances[t] = sigma2
    series = FunctionalTimeSeries(out[burn_in:], grid, series_id)
    if return_variance:
        return series, variances[burn_in:]
    return series


def white_noise(T: int, p: int = 100, seed: SeedLike = None, scale: float = 1.0,
                series_id: Optional[str] = None) -> FunctionalTimeSeries:
    """独立布朗运动曲线组成的序列（孤立序列 / 零假设样本）"""
    return FunctionalTimeSeries(brownian_curves(T, p, scale, seed), Grid.uniform(p), series_id)
