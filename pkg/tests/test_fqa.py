import math
import pickle

import numpy as np
import pytest

from scripts.fqa.fqa import (
    FqaParams, d_fqa, feature_vector, fqa_autocorrelation, fqa_autocovariance, indicator_series,
)
from scripts.fts.core import FunctionalTimeSeries
from scripts.simulate.processes import white_noise
from scripts.utils.errors import DegenerateMarginal, DomainError


# ------------------------
# 独立实现的暴力计算，用于对照
# ------------------------
def _oracle_rho(X, tau, tau2, lag, beta, beta2):
    T, p = X.shape

    def indicators(level, threshold):
        k = max(1, math.ceil(level * T - 1e-9))
        q = [sorted(X[:, j])[k - 1] for j in range(p)]
        out = []
        for t in range(T):
            below = sum(1 for j in range(p) if X[t, j] <= q[j])
            out.append(1 if below / p <= threshold else 0)
        return out

    a, b = indicators(tau, beta), indicators(tau2, beta2)
    joint = sum(a[t] * b[t + lag] for t in range(T - lag)) / (T - lag)
    p1, p2 = sum(a) / T, sum(b) / T
    denominator = p1 * p2 * (1 - p1) * (1 - p2)
    if denominator == 0:
        return 0.0
    return min(1.0, max(-1.0, (joint - p1 * p2) / math.sqrt(denominator)))


def _oracle_distance(X1, X2, lags, levels):
    total = 0.0
    for lag in lags:
        for tau in levels:
            for tau2 in levels:
                diff = _oracle_rho(X1, tau, tau2, lag, tau, tau2) - _oracle_rho(X2, tau, tau2, lag, tau, tau2)
                total += diff * diff
    return total / (4 * len(lags) * len(levels) ** 2)


# ------------------------
# 指示序列与估计量
# ------------------------
def test_indicator_all_ones_at_beta_one(make_series):
    assert np.all(indicator_series(make_series(), 0.3, 1.0) == 1)


def test_indicator_all_zeros_at_beta_zero():
    # 每行恰有一半的点不高于 0.5 分位数曲线，下方比例都大于 0
    values = np.array([[0.0, 5.0], [5.0, 0.0], [1.0, 6.0], [6.0, 1.0]])
    X = FunctionalTimeSeries(values)
    assert np.all(indicator_series(X, 0.5, 0.0) == 0)


def test_indicator_hand_construction(alternating_series):
    assert indicator_series(alternating_series, 0.5, 0.5).tolist() == [1, 0, 1, 0]


def test_alternating_autocovariance_and_autocorrelation(alternating_series):
    assert fqa_autocovariance(alternating_series, 0.5, 0.5, 1, 0.5, 0.5) == pytest.approx(-0.25)
    assert fqa_autocorrelation(alternating_series, 0.5, 0.5, 1, 0.5, 0.5) == -1.0


def test_autocovariance_zero_for_all_ones(make_series):
    assert fqa_autocovariance(make_series(), 0.5, 0.9, 2, 1.0, 1.0) == 0.0


def test_degenerate_marginal_raises(make_series):
    X = make_series(series_id="x1")
    with pytest.raises(DegenerateMarginal) as info:
        fqa_autocorrelation(X, 0.5, 0.5, 1, 1.0, 0.5)
    assert info.value.coordinate == (0.5, 0.5, 1, 1.0, 0.5)
    assert info.value.series_id == "x1"


def test_degenerate_marginal_survives_pickling():
    err = DegenerateMarginal(0.1, 0.9, 2, 0.1, 0.9, "s")
    clone = pickle.loads(pickle.dumps(err))
    assert clone.coordinate == err.coordinate and str(clone) == str(err)


def test_autocorrelation_equals_normalized_autocovariance(make_series):
    X = make_series(T=60, p=10)
    i1 = indicator_series(X, 0.5, 0.5).astype(float)
    i2 = indicator_series(X, 0.9, 0.9).astype(float)
    p1, p2 = i1.mean(), i2.mean()
    gamma = fqa_autocovariance(X, 0.5, 0.9, 1, 0.5, 0.9)
    rho = fqa_autocorrelation(X, 0.5, 0.9, 1, 0.5, 0.9)
    assert rho == pytest.approx(gamma / math.sqrt(p1 * p2 * (1 - p1) * (1 - p2)))


@pytest.mark.parametrize("lag", [0, 39])
def test_lag_out_of_range(make_series, lag):
    with pytest.raises(DomainError):
        fqa_autocorrelation(make_series(T=40), 0.5, 0.5, lag, 0.5, 0.5)


def test_estimates_stay_in_unit_interval(rng):
    for _ in range(30):
        X = FunctionalTimeSeries(rng.standard_normal((int(rng.integers(5, 15)), 4)))
        v = feature_vector(X, FqaParams(lags=(1, 2), levels=(0.25, 0.5, 0.75)), on_degenerate="zero")
        raw = v.values / v.params.scale
        assert np.all(np.abs(raw) <= 1.0)


# ------------------------
# 参数与特征向量
# ------------------------
def test_feature_vector_length_reduced(make_series):
    v = feature_vector(make_series(T=80), FqaParams(lags=(1,), levels=(0.1, 0.5, 0.9)), on_degenerate="zero")
    assert v.values.shape == (9,)


def test_feature_vector_length_general(make_series):
    params = FqaParams(lags=(1, 2), levels=(0.1, 0.5, 0.9), thresholds=(0.3, 0.7))
    v = feature_vector(make_series(T=80), params, on_degenerate="zero")
    assert v.values.shape == (72,)
    assert params.coordinates()[0] == (1, 0.1, 0.1, 0.3, 0.3)
    assert params.coordinates()[1] == (1, 0.1, 0.1, 0.3, 0.7)


def test_feature_order_reduced_mode():
    coords = FqaParams(lags=(1, 2), levels=(0.1, 0.5)).coordinates()
    assert coords[:4] == [(1, 0.1, 0.1, 0.1, 0.1), (1, 0.1, 0.5, 0.1, 0.5),
                          (1, 0.5, 0.1, 0.5, 0.1), (1, 0.5, 0.5, 0.5, 0.5)]
    assert coords[4][0] == 2


@pytest.mark.parametrize("kwargs", [
    {"lags": (0,)},
    {"lags": (1, 1)},
    {"levels": (0.5, 0.1)},
    {"levels": (0.0, 0.5)},
    {"thresholds": (0.2, 1.5)},
    {"thresholds": "full"},
])
def test_params_validation(kwargs):
    with pytest.raises(DomainError):
        FqaParams(**kwargs)


def test_params_too_long_lag_for_series(make_series):
    with pytest.raises(DomainError):
        feature_vector(make_series(T=5), FqaParams(lags=(4,)))


def test_constant_series_is_degenerate():
    X = FunctionalTimeSeries(np.ones((20, 5)), series_id="flat")
    with pytest.raises(DegenerateMarginal):
        feature_vector(X, FqaParams())
    v = feature_vector(X, FqaParams(), on_degenerate="zero")
    assert np.all(v.values == 0.0)
    assert len(v.degenerate) == 9


def test_feature_distance_equals_d_fqa(make_series):
    params = FqaParams(lags=(1, 2), levels=(0.25, 0.5, 0.75))
    X, Y = make_series(T=70), make_series(T=90)
    vx = feature_vector(X, params, "zero").values
    vy = feature_vector(Y, params, "zero").values
    assert np.sum((vx - vy) ** 2) == pytest.approx(d_fqa(X, Y, params, "zero"), abs=1e-12)


def test_d_fqa_identity_and_symmetry(make_series):
    params = FqaParams(levels=(0.25, 0.5, 0.75))
    X, Y = make_series(T=50), make_series(T=65)
    assert d_fqa(X, X, params, "zero") == 0.0
    assert d_fqa(X, Y, params, "zero") == d_fqa(Y, X, params, "zero")
    assert 0.0 <= d_fqa(X, Y, params, "zero") <= 1.0


@pytest.mark.parametrize("seed", range(25))
def test_d_fqa_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((8, 4)), rng.standard_normal((8, 4))
    params = FqaParams(lags=(1,), levels=(0.5,))
    got = d_fqa(FunctionalTimeSeries(A), FunctionalTimeSeries(B), params, "zero")
    assert got == pytest.approx(_oracle_distance(A, B, (1,), (0.5,)), abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_d_fqa_matches_brute_force_several_levels(seed):
    rng = np.random.default_rng(100 + seed)
    A, B = rng.standard_normal((12, 5)), rng.standard_normal((10, 5))
    params = FqaParams(lags=(1, 2), levels=(0.25, 0.5, 0.75))
    got = d_fqa(FunctionalTimeSeries(A), FunctionalTimeSeries(B), params, "zero")
    assert got == pytest.approx(_oracle_distance(A, B, (1, 2), (0.25, 0.5, 0.75)), abs=1e-12)


def test_autocorrelation_is_clipped_but_autocovariance_is_not():
    # 指示序列为 (1, 0, 1, 0, 1)，未截断的比值为 -0.36 / 0.24 = -1.5
    X = FunctionalTimeSeries(np.array([[2.0, 10.0], [0.0, 0.0], [10.0, 2.0], [1.0, 1.0], [11.0, 11.0]]))
    assert indicator_series(X, 0.5, 0.5).tolist() == [1, 0, 1, 0, 1]
    assert fqa_autocovariance(X, 0.5, 0.5, 1, 0.5, 0.5) == pytest.approx(-0.36)
    assert fqa_autocorrelation(X, 0.5, 0.5, 1, 0.5, 0.5) == -1.0
    raw = feature_vector(X, FqaParams(levels=(0.5,))).values / FqaParams(levels=(0.5,)).scale
    assert raw.tolist() == pytest.approx([-1.0])


@pytest.mark.slow
def test_iid_noise_has_small_autocorrelation():
    params = FqaParams()
    small = 0
    total = 0
    for i in range(100):
        X = white_noise(2000, 50, seed=[11, i])
        raw = feature_vector(X, params).values / params.scale
        small += int(np.sum(np.abs(raw) < 0.1))
        total += raw.size
    assert small / total >= 0.99


@pytest.mark.slow
def test_iid_noise_autocovariance_near_zero():
    hits = sum(
        abs(fqa_autocovariance(white_noise(2000, 30, seed=[12, i]), 0.5, 0.5, 1, 0.5, 0.5)) < 0.05
        for i in range(100)
    )
    assert hits >= 99
