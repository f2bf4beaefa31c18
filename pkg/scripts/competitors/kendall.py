"""
函数型 Kendall 自相关
曲线之间用预序比较：max 比较曲线最大值，integral 比较积分（∫(g - f) > 0 即 g 在 f 之后）
相等视为既不一致也不相反
"""

from enum import Enum
from typing import Sequence, Union

import numpy as np
from scipy.integrate import trapezoid

from scripts.fts.core import FunctionalTimeSeries
from scripts.utils.errors import DomainError


class Preorder(str, Enum):
    MAX = "max"
    INTEGRAL = "integral"


def preorder_keys(X: FunctionalTimeSeries, preorder: Union[Preorder, str]) -> np.ndarray:
    """每条曲线在预序下的比较键"""
    preorder = Preorder(preorder)
    if preorder is Preorder.MAX:
        return X.values.max(axis=1)
    return trapezoid(X.values, X.grid.points, axis=1)


def kendall_acf(X: FunctionalTimeSeries, lag: int, preorder: Union[Preorder, str]) -> float:
    """
    所有 i < j ≤ T-l 的序对上，2·[一致指示] 的平均值减 1。
    """
    if not 1 <= lag <= X.T - 3:
        raise DomainError(f"Kendall 自相关滞后 {lag} 超出范围 [1, {X.T - 3}]")
    keys = preorder_keys(X, preorder)
    n = X.T - lag
    i, j = np.triu_indices(n, k=1)
    head, tail = keys[:n], keys[lag:]
    concordant = ((head[i] < head[j]) & (tail[i] < tail[j])) | ((head[j] < head[i]) & (tail[j] < tail[i]))
    return float(2.0 * concordant.mean() - 1.0)


def kendall_features(X: FunctionalTimeSeries, lags: Sequence[int],
                     preorder: Union[Preorder, str]) -> np.ndarray:
    lags = tuple(int(l) for l in lags)
    if not lags:
        raise DomainError("滞后集合不能为空")
    return np.array([kendall_acf(X, l, preorder) for l in lags]) / np.sqrt(4.0 * len(lags))


def d_kendall(X1: FunctionalTimeSeries, X2: FunctionalTimeSeries, lags: Sequence[int],
              preorder: Union[Preorder, str]) -> float:
    v1 = kendall_features(X1, lags, preorder)
    v2 = kendall_features(X2, lags, preorder)
    return float(np.sum((v1 - v2) ** 2))
