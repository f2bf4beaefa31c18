#!/usr/bin/env python3
"""
函数型分位数自相关（FQA）估计与 d_FQA 相异度

指示序列 I_t = 1{ #{u : X_t(u) ≤ q_tau(u)} / p ≤ beta }，
自协方差用全样本边际频率与滞后联合频率估计，自相关再除以两个伯努利方差乘积的平方根。
特征向量按固定顺序（滞后 → tau1 → tau2 → beta1 → beta2）拼接并乘以缩放常数，
两条序列特征向量之差的平方欧氏范数即为 d_FQA。
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from scripts.fts.core import FunctionalTimeSeries, below_fractions, empirical_quantile_curve
from scripts.log.log import log
from scripts.utils.errors import DegenerateMarginal, DomainError

REDUCED = "reduced"
DEGENERATE_POLICIES = ("raise", "zero")

Coordinate = Tuple[int, float, float, float, float]


# ------------------------
# 参数
# ------------------------
@dataclass(frozen=True)
class FqaParams:
    """
    滞后集合、分位数水平集合与阈值集合。

    thresholds 为 "reduced" 时阈值与分位数水平绑定（beta = tau, beta' = tau'），
    否则为显式的阈值元组。
    """

    lags: Tuple[int, ...] = (1,)
    levels: Tuple[float, ...] = (0.1, 0.5, 0.9)
    thresholds: Union[str, Tuple[float, ...]] = REDUCED

    def __post_init__(self):
        lags = tuple(int(l) for l in self.lags)
        if not lags:
            raise DomainError("滞后集合不能为空")
        if any(l < 1 for l in lags) or len(set(lags)) != len(lags):
            raise DomainError(f"滞后必须是互不相同的正整数: {lags}")
        levels = tuple(float(t) for t in self.levels)
        if not levels:
            raise DomainError("分位数水平集合不能为空")
        if any(not 0.0 < t < 1.0 for t in levels):
            raise DomainError(f"分位数水平必须在 (0, 1) 内: {levels}")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise DomainError(f"分位数水平必须互不相同且递增: {levels}")
        thresholds = self.thresholds
        if isinstance(thresholds, str):
            if thresholds != REDUCED:
                raise DomainError(f"未知的阈值模式: {thresholds}")
        else:
            thresholds = tuple(float(b) for b in thresholds)
            if not thresholds:
                raise DomainError("阈值集合不能为空")
            if any(not 0.0 <= b <= 1.0 for b in thresholds):
                raise DomainError(f"阈值必须在 [0, 1] 内: {thresholds}")
            if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
                raise DomainError(f"阈值必须互不相同且递增: {thresholds}")
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "thresholds", thresholds)

    @property
    def reduced(self) -> bool:
        return self.thresholds == REDUCED

    @property
    def L(self) -> int:
        return len(self.lags)

    @property
    def P(self) -> int:
        return len(self.levels)

    @property
    def B(self) -> int:
        return 1 if self.reduced else len(self.thresholds)

    @property
    def normalizer(self) -> float:
        """d_FQA 的归一化常数 4LP^2 (简化模式) 或 4LP^2B^2 (一般模式)"""
        return 4.0 * self.L * self.P ** 2 * self.B ** 2

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(self.normalizer)

    def coordinates(self) -> List[Coordinate]:
        """特征坐标 (lag, tau1, tau2, beta1, beta2) 的固定顺序"""
        coords = []
        for lag in self.lags:
            for tau1, tau2 in itertools.product(self.levels, self.levels):
                if self.reduced:
                    coords.append((lag, tau1, tau2, tau1, tau2))
                else:
                    for beta1, beta2 in itertools.product(self.thresholds, self.thresholds):
                        coords.append((lag, tau1, tau2, beta1, beta2))
        return coords

    @property
    def n_features(self) -> int:
        return self.L * self.P ** 2 * self.B ** 2

    def validate_for(self, X: FunctionalTimeSeries):
        if max(self.lags) > X.T - 2:
            raise DomainError(f"序列 {X.label} 长度 T={X.T} 不足以估计滞后 {max(self.lags)} (需要 lag ≤ T-2)")

    def to_dict(self) -> dict:
        return {
            "lags": list(self.lags),
            "levels": list(self.levels),
            "thresholds": self.thresholds if self.reduced else list(self.thresholds),
        }

    @classmethod
    def from_dict(cls, cfg: dict) -> "FqaParams":
        thresholds = cfg.get("thresholds", REDUCED)
        if not isinstance(thresholds, str):
            thresholds = tuple(thresholds)
        return cls(lags=tuple(cfg.get("lags", (1,))),
                   levels=tuple(cfg.get("levels", (0.1, 0.5, 0.9))),
                   thresholds=thresholds)


# ------------------------
# 估计量
# ------------------------
def indicator_series(X: FunctionalTimeSeries, tau: float, beta: float) -> np.ndarray:
    """第 i 个元素为 1 当且仅当第 i 条曲线在分位数曲线下方（含相等）的比例不超过 beta"""
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"阈值必须在 [0, 1] 内，当前为 {beta}")
    fractions = below_fractions(X, empirical_quantile_curve(X, tau))
    return (fractions <= beta).astype(np.int8)


def _check_lag(T: int, lag: int):
    if not 1 <= lag <= T - 2:
        raise DomainError(f"滞后 {lag} 超出范围 [1, {T - 2}] (T={T})")


def _frequencies(ind1: np.ndarray, ind2: np.ndarray, lag: int) -> Tuple[float, float, float]:
    """(联合频率, 边际频率1, 边际频率2)；联合频率按 1/(T-l) 归一化，边际按 1/T"""
    T = ind1.size
    joint = float(np.dot(ind1[:T - lag].astype(float), ind2[lag:].astype(float))) / (T - lag)
    return joint, float(ind1.mean()), float(ind2.mean())


def _correlation(ind1: np.ndarray, ind2: np.ndarray, lag: int) -> Optional[float]:
    joint, p1, p2 = _frequencies(ind1, ind2, lag)
    denominator = p1 * p2 * (1.0 - p1) * (1.0 - p2)
    if denominator <= 0.0:
        return None
    rho = (joint - p1 * p2) / math.sqrt(denominator)
    # 联合频率与边际频率的归一化不同，短序列上比值可能越界
    return min(1.0, max(-1.0, rho))


def fqa_autocovariance(X: FunctionalTimeSeries, tau: float, tau2: float, lag: int,
                       beta: float, beta2: float) -> float:
    """
    函数型分位数自协方差估计（联合频率减边际频率之积），不做截断。

    自相关估计会截断到 [-1, 1]，因此短序列上二者之比不一定等于自相关，
    例如指示序列为 (1, 0, 1, 0, 1)、lag=1 时自协方差为 -0.36，
    未截断的比值为 -1.5，而 fqa_autocorrelation 返回 -1。
    """
    _check_lag(X.T, lag)
    joint, p1, p2 = _frequencies(indicator_series(X, tau, beta), indicator_series(X, tau2, beta2), lag)
    return joint - p1 * p2


def fqa_autocorrelation(X: FunctionalTimeSeries, tau: float, tau2: float, lag: int,
                        beta: float, beta2: float) -> float:
    """
    函数型分位数自相关估计，截断到 [-1, 1]。

    任一边际频率为 0 或 1 时分母退化，抛出 DegenerateMarginal。
    """
    _check_lag(X.T, lag)
    rho = _correlation(indicator_series(X, tau, beta), indicator_series(X, tau2, beta2), lag)
    if rho is None:
        raise DegenerateMarginal(tau, tau2, lag, beta, beta2, X.series_id)
    return rho


# ------------------------
# 特征向量
# ------------------------
@dataclass(frozen=True, eq=False)
class FqaFeatureVector:
    values: np.ndarray
    params: FqaParams
    series_id: Optional[str] = None
    degenerate: Tuple[Coordinate, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "id": self.series_id,
            "params": self.params.to_dict(),
            "order": [list(c) for c in self.params.coordinates()],
            "values": self.values.tolist(),
        }


def _raw_features(X: FunctionalTimeSeries, params: FqaParams,
                  on_degenerate: str = "raise") -> Tuple[np.ndarray, List[Coordinate]]:
    if on_degenerate not in DEGENERATE_POLICIES:
        raise DomainError(f"未知的退化处理策略: {on_degenerate}")
    params.validate_for(X)

    # 每个 tau 的分位数曲线只计算一次
    fractions = {tau: below_fractions(X, empirical_quantile_curve(X, tau)) for tau in params.levels}
    indicators: Dict[Tuple[float, float], np.ndarray] = {}

    def indicator(tau: float, beta: float) -> np.ndarray:
        key = (tau, beta)
        if key not in indicators:
            indicators[key] = (fractions[tau] <= beta).astype(np.int8)
        return indicators[key]

    coords = params.coordinates()
    raw = np.empty(len(coords))
    degenerate = []
    for k, (lag, tau1, tau2, beta1, beta2) in enumerate(coords):
        rho = _correlation(indicator(tau1, beta1), indicator(tau2, beta2), lag)
        if rho is None:
            if on_degenerate == "raise":
                raise DegenerateMarginal(tau1, tau2, lag, beta1, beta2, X.series_id)
            degenerate.append((lag, tau1, tau2, beta1, beta2))
            rho = 0.0
        raw[k] = rho
    if degenerate:
        log.warning(f"序列 {X.label} 有 {len(degenerate)} 个退化坐标被置为 0")
    return raw, degenerate


def feature_vector(X: FunctionalTimeSeries, params: FqaParams,
                   on_degenerate: str = "raise") -> FqaFeatureVector:
    """
    计算缩放后的 FQA 特征向量。

    参数:
        - X: 函数型时间序列
        - params: 滞后 / 分位数水平 / 阈值
        - on_degenerate ("raise" | "zero"): 边际退化坐标是抛错还是置 0

    返回值:
        FqaFeatureVector，长度为 L·P² (简化模式) 或 L·P²·B² (一般模式)
    """
    raw, degenerate = _raw_features(X, params, on_degenerate)
    return FqaFeatureVector(raw * params.scale, params, X.series_id, tuple(degenerate))


def d_fqa(X1: FunctionalTimeSeries, X2: FunctionalTimeSeries, params: FqaParams,
          on_degenerate: str = "raise") -> float:
    """两条序列（长度可以不同）的 d_FQA 估计，取值在 [0, 1]"""
    raw1, _ = _raw_features(X1, params, on_degenerate)
    raw2, _ = _raw_features(X2, params, on_degenerate)
    return float(np.sum((raw1 - raw2) ** 2) / params.normalizer)
