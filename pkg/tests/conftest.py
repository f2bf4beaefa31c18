import numpy as np
import pytest

from scripts.fts.core import FunctionalTimeSeries
from scripts.simulate.processes import white_noise


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def make_series(rng):
    """随机高斯曲线序列工厂"""

    def factory(T=40, p=8, series_id=None):
        return FunctionalTimeSeries(rng.standard_normal((T, p)), series_id=series_id)

    return factory


@pytest.fixture
def noise_collection():
    return [white_noise(120, 20, seed=[7, i], series_id=f"w{i}") for i in range(4)]


@pytest.fixture
def alternating_series():
    """
    T=4, p=5，分位数水平 0.5 下每行的下方比例依次为 0.2, 0.8, 0.2, 0.8，
    阈值 0.5 时指示序列为 (1, 0, 1, 0)。
    """
    values = np.array([
        [0.0, 10.0, 10.0, 10.0, 10.0],
        [1.0, 11.0, 0.0, 0.0, 0.0],
        [10.0, 0.0, 11.0, 11.0, 11.0],
        [11.0, 1.0, 1.0, 1.0, 1.0],
    ])
    return FunctionalTimeSeries(values, series_id="alt")
