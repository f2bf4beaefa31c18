#!/usr/bin/env python3
"""
函数型时间序列数据模型
网格、序列矩阵、经验函数分位数曲线以及预处理变换（对数收益率、死亡率改善率）
所有操作都是不可变输入上的纯函数
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from scripts.utils.errors import DimensionError, DomainError

# 浮点容差：避免 tau*T 这类乘积的舍入误差把 ceil 推到下一个整数
_CEIL_EPS = 1e-9


# ------------------------
# 网格
# ------------------------
@dataclass(frozen=True)
class Grid:
    """[0, 1] 上严格递增、首点为 0、末点为 1 的离散网格"""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise DomainError(f"网格至少需要 2 个点，当前为 {pts.size}")
        if not np.all(np.isfinite(pts)):
            raise DomainError("网格包含非有限值")
        if pts[0] != 0.0 or pts[-1] != 1.0:
            raise DomainError(f"网格必须以 0 开始、以 1 结束，当前为 [{pts[0]}, {pts[-1]}]")
        if np.any(np.diff(pts) <= 0):
            raise DomainError("网格必须严格递增")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, p: int) -> "Grid":
        return cls(np.linspace(0.0, 1.0, int(p)))

    @property
    def size(self) -> int:
        return int(self.points.size)

    def trapezoid_weights(self) -> np.ndarray:
        """复合梯形公式的求积权重，满足 sum(w * f) == trapezoid(f, points)"""
        h = np.diff(self.points)
        w = np.zeros(self.size)
        w[:-1] += h / 2.0
        w[1:] += h / 2.0
        return w

    def __eq__(self, other):
        return isinstance(other, Grid) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())


# ------------------------
# 函数型时间序列
# ------------------------
@dataclass(frozen=True, eq=False)
class FunctionalTimeSeries:
    """
    T×p 矩阵，第 t 行是曲线 X_t 在网格上的取值。

    values 会被复制并设为只读，构造时拒绝非有限值。
    """

    values: np.ndarray
    grid: Optional[Grid] = None
    series_id: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.ndim == 1:
            vals = vals[None, :]
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise DomainError(f"序列矩阵必须是 T×p 的二维数组 (T ≥ 1)，当前形状 {vals.shape}")
        grid = self.grid if self.grid is not None else Grid.uniform(vals.shape[1])
        if grid.size != vals.shape[1]:
            raise DimensionError(f"网格点数 {grid.size} 与列数 {vals.shape[1]} 不一致")
        bad = np.argwhere(~np.isfinite(vals))
        if bad.size:
            row, col = bad[0]
            raise DomainError(f"第 {row} 行第 {col} 列存在非有限值")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "grid", grid)

    @property
    def T(self) -> int:
        return int(self.values.shape[0])

    @property
    def p(self) -> int:
        return int(self.values.shape[1])

    def row(self, t: int) -> np.ndarray:
        return self.values[t]

    def with_values(self, values: np.ndarray, grid: Optional[Grid] = None) -> "FunctionalTimeSeries":
        return FunctionalTimeSeries(values, grid if grid is not None else self.grid, self.series_id)

    @property
    def label(self) -> str:
        return self.series_id if self.series_id is not None else "<unnamed>"


# ------------------------
# 分位数曲线
# ------------------------
@dataclass(frozen=True, eq=False)
class QuantileCurve:
    level: float
    values: np.ndarray


def order_statistic_index(tau: float, n: int) -> int:
    """下经验分位数 inf{x : F(x) ≥ tau} 对应的顺序统计量位置 ceil(tau*n)，从 1 开始"""
    return min(max(math.ceil(tau * n - _CEIL_EPS), 1), n)


def empirical_quantile_curve(X: FunctionalTimeSeries, tau: float) -> QuantileCurve:
    """
    逐网格点计算下经验分位数（第 ceil(tau*T) 个顺序统计量）。

    例如某列为 [3, 1, 2]、tau=0.5 时返回 2。
    """
    if not 0.0 < tau < 1.0:
        raise DomainError(f"分位数水平必须在 (0, 1) 内，当前为 {tau}")
    k = order_statistic_index(tau, X.T)
    values = np.partition(X.values, k - 1, axis=0)[k - 1]
    return QuantileCurve(level=float(tau), values=values)


def below_fraction(curve: np.ndarray, q: QuantileCurve) -> float:
    """曲线不超过分位数曲线（含相等）的网格点比例"""
    curve = np.asarray(curve, dtype=float)
    if curve.shape != q.values.shape:
        raise DimensionError(f"曲线长度 {curve.shape} 与分位数曲线长度 {q.values.shape} 不一致")
    return float(np.count_nonzero(curve <= q.values)) / curve.size


def below_fractions(X: FunctionalTimeSeries, q: QuantileCurve) -> np.ndarray:
    """below_fraction 的逐行向量化版本，返回长度为 T 的数组"""
    if X.p != q.values.size:
        raise DimensionError(f"序列网格长度 {X.p} 与分位数曲线长度 {q.values.size} 不一致")
    return np.count_nonzero(X.values <= q.values[None, :], axis=1) / X.p


# ------------------------
# 预处理变换
# ------------------------
def _first_nonpositive(values: np.ndarray):
    bad = np.argwhere(values <= 0)
    return tuple(int(i) for i in bad[0]) if bad.size else None


def log_returns(prices: FunctionalTimeSeries) -> FunctionalTimeSeries:
    """
    日内对数收益率曲线 R_t(u_j) = ln P_t(u_j) - ln P_t(u_{j-1})。

    输出有 p-1 列，网格重新声明为 [0, 1] 上 p-1 个等距点。
    """
    where = _first_nonpositive(prices.values)
    if where is not None:
        raise DomainError(f"价格必须严格为正: 第 {where[0]} 行第 {where[1]} 列为 {prices.values[where]}")
    if prices.p < 3:
        raise DomainError("计算对数收益率至少需要 3 个网格点")
    returns = np.diff(np.log(prices.values), axis=1)
    return FunctionalTimeSeries(returns, Grid.uniform(prices.p - 1), prices.series_id)


def improvement_rates(mortality: FunctionalTimeSeries) -> FunctionalTimeSeries:
    """死亡率改善率 M*_t = 2(M_{t-1} - M_t) / (M_{t-1} + M_t)，输出 T-1 行"""
    if mortality.T < 2:
        raise DomainError("计算改善率至少需要 2 个时间点")
    where = _first_nonpositive(mortality.values)
    if where is not None:
        raise DomainError(f"死亡率必须严格为正: 第 {where[0]} 行第 {where[1]} 列为 {mortality.values[where]}")
    prev, curr = mortality.values[:-1], mortality.values[1:]
    return mortality.with_values(2.0 * (prev - curr) / (prev + curr))
