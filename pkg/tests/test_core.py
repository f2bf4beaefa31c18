import math

import numpy as np
import pytest

from scripts.fts.core import (
    FunctionalTimeSeries, Grid, QuantileCurve, below_fraction, below_fractions, empirical_quantile_curve,
    improvement_rates, log_returns, order_statistic_index,
)
from scripts.utils.errors import DimensionError, DomainError


def test_quantile_is_lower_order_statistic():
    X = FunctionalTimeSeries(np.array([[3.0, 5.0], [1.0, 5.0], [2.0, 5.0]]))
    q = empirical_quantile_curve(X, 0.5)
    assert q.values.tolist() == [2.0, 5.0]
    assert q.level == 0.5


def test_quantile_at_exact_product():
    X = FunctionalTimeSeries(np.array([[4.0, 0.0], [2.0, 0.0], [1.0, 0.0], [3.0, 0.0]]))
    assert empirical_quantile_curve(X, 0.25).values[0] == 1.0
    assert order_statistic_index(0.25, 4) == 1
    assert order_statistic_index(0.1, 30) == 3


def test_quantile_of_constant_column(make_series):
    X = make_series(T=25, p=4)
    values = np.array(X.values)
    values[:, 2] = 7.5
    q = empirical_quantile_curve(X.with_values(values), 0.9)
    assert q.values[2] == 7.5


def test_quantile_monotone_in_level(make_series):
    X = make_series(T=50, p=6)
    levels = [0.1, 0.25, 0.5, 0.75, 0.9]
    curves = [empirical_quantile_curve(X, t).values for t in levels]
    for low, high in zip(curves, curves[1:]):
        assert np.all(low <= high)


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.2])
def test_quantile_level_out_of_range(make_series, tau):
    with pytest.raises(DomainError):
        empirical_quantile_curve(make_series(), tau)


def test_below_fraction_examples():
    q = QuantileCurve(0.5, np.array([1.0, 2.0, 3.0, 4.0]))
    assert below_fraction(q.values, q) == 1.0
    assert below_fraction(q.values + 1.0, q) == 0.0
    assert below_fraction(np.array([0.0, 2.0, 3.0, 9.0]), q) == 0.75


def test_below_fraction_length_mismatch():
    q = QuantileCurve(0.5, np.zeros(4))
    with pytest.raises(DimensionError):
        below_fraction(np.zeros(3), q)


def test_below_fractions_matches_rowwise(make_series):
    X = make_series(T=15, p=9)
    q = empirical_quantile_curve(X, 0.5)
    expected = [below_fraction(X.row(t), q) for t in range(X.T)]
    assert below_fractions(X, q).tolist() == pytest.approx(expected)


def test_log_returns_hand_values():
    prices = FunctionalTimeSeries(np.array([[1.0, math.e, math.e ** 2]] * 3))
    R = log_returns(prices)
    assert R.p == 2
    assert R.values == pytest.approx(np.ones((3, 2)))
    assert R.grid == Grid.uniform(2)


def test_log_returns_constant_prices_give_zero():
    R = log_returns(FunctionalTimeSeries(np.full((4, 5), 3.0)))
    assert np.all(R.values == 0.0)


def test_log_returns_rejects_zero_price():
    prices = FunctionalTimeSeries(np.array([[1.0, 2.0, 3.0], [1.0, 0.0, 3.0]]))
    with pytest.raises(DomainError):
        log_returns(prices)


def test_improvement_rates():
    M = FunctionalTimeSeries(np.array([[3.0, 2.0], [1.0, 2.0]]))
    rates = improvement_rates(M)
    assert rates.T == 1
    assert rates.values[0].tolist() == [1.0, 0.0]


def test_improvement_rates_bounded(rng):
    M = FunctionalTimeSeries(rng.uniform(1e-4, 1.0, size=(30, 10)))
    rates = improvement_rates(M).values
    assert np.all(np.abs(rates) < 2.0)


def test_improvement_rates_needs_two_rows():
    with pytest.raises(DomainError):
        improvement_rates(FunctionalTimeSeries(np.ones((1, 3))))


@pytest.mark.parametrize("points", [[0.0, 0.5, 0.9], [0.1, 1.0], [0.0, 0.6, 0.4, 1.0], [0.0]])
def test_grid_validation(points):
    with pytest.raises(DomainError):
        Grid(np.array(points))


def test_trapezoid_weights_integrate_constants():
    grid = Grid(np.array([0.0, 0.1, 0.5, 1.0]))
    assert grid.trapezoid_weights().sum() == pytest.approx(1.0)


def test_series_rejects_non_finite():
    values = np.zeros((3, 3))
    values[1, 2] = np.nan
    with pytest.raises(DomainError, match="第 1 行第 2 列"):
        FunctionalTimeSeries(values)


def test_series_grid_mismatch():
    with pytest.raises(DimensionError):
        FunctionalTimeSeries(np.zeros((3, 4)), grid=Grid.uniform(5))


def test_series_values_are_read_only(make_series):
    X = make_series()
    with pytest.raises(ValueError):
        X.values[0, 0] = 1.0
