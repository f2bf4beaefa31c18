#!/usr/bin/env python3
"""
模拟场景 1-4（带真实类别标签）
场景 1、2 为 4 类 × 5 条序列；场景 3、4 为 5 + 5 + 1 条，第 11 条标记为 isolated
每条序列使用由 (seed, 序列编号) 派生的独立随机流
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from scripts.fts.core import FunctionalTimeSeries
from scripts.fts.io import ManifestEntry, save_csv, write_manifest
from scripts.log.log import log
from scripts.simulate.processes import far2, fgarch11, nonlinear_far1, white_noise
from scripts.utils.errors import DomainError
from scripts.utils.response import standard_report, write_json

ISOLATED = "isolated"
SCENARIOS = (1, 2, 3, 4)
DEFAULT_LENGTHS = (200, 300, 400, 500, 600)

# ------------------------
# 各场景的生成过程
# ------------------------
SCENARIO1_FAR = [(-0.3, 0.1, 0.0, 0.0), (0.3, 0.3, 0.0, 0.0), (-0.4, 0.5, -0.3, 0.5), (0.4, 0.7, 0.3, 0.7)]
SCENARIO2_NONLINEAR = [(0.5, 0.5), (0.9, 0.5)]
SCENARIO2_GARCH = [14.0, 15.0]
SCENARIO3_FAR = [(-0.4, 0.5, -0.4, 0.5), (0.4, 0.5, 0.4, 0.5)]

Generator = Callable[[int, int, np.random.Generator, int, str], FunctionalTimeSeries]


@dataclass
class ScenarioDataset:
    series: List[FunctionalTimeSeries]
    labels: List[str]
    scenario_id: int
    seed: int
    T: Union[int, List[int]] = 0
    p: int = 100
    generators: List[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.series) != len(self.labels):
            raise DomainError(f"序列数 {len(self.series)} 与标签数 {len(self.labels)} 不一致")

    @property
    def ids(self) -> List[str]:
        return [X.label for X in self.series]

    def write(self, out_dir: Union[str, Path], config: Optional[dict] = None) -> Path:
        """写出每条序列的 CSV、labels.json（标准信封）与 manifest.json，返回清单路径"""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        entries = []
        for X, label in zip(self.series, self.labels):
            path = save_csv(X, out_dir / f"{X.label}.csv")
            entries.append(ManifestEntry(X.label, path, label))
        write_json(out_dir / "labels.json", standard_report(0, "success", {
            "scenario": self.scenario_id,
            "seed": self.seed,
            "ids": self.ids,
            "labels": self.labels,
            "generators": self.generators,
        }, config or {}))
        manifest = write_manifest(entries, out_dir / "manifest.json")
        log.info(f"场景 {self.scenario_id} 数据集已写出: {out_dir} ({len(self.series)} 条序列)")
        return manifest


def _series_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])


def _plan(scenario_id: int, burn_in: int, noise_scale: Optional[float],
          isolated_scale: float) -> List[Tuple[str, str, Generator]]:
    """(标签, 生成器描述, 生成函数) 列表"""

    def far(c):
        return lambda T, p, rng, sid: far2(c, T, p, rng, burn_in, noise_scale, sid)

    def nonlinear(c):
        return lambda T, p, rng, sid: nonlinear_far1(c, T, p, rng, burn_in, noise_scale, sid)

    def garch(c):
        return lambda T, p, rng, sid: fgarch11(c, T, p, rng, burn_in, sid)

    def noise():
        return lambda T, p, rng, sid: white_noise(T, p, rng, isolated_scale, sid)

    plan = []
    if scenario_id == 1:
        for k, c in enumerate(SCENARIO1_FAR, start=1):
            plan += [(str(k), f"far2{c}", far(c))] * 5
    elif scenario_id == 2:
        for k, c in enumerate(SCENARIO2_NONLINEAR, start=1):
            plan += [(str(k), f"nonlinear_far1{c}", nonlinear(c))] * 5
        for k, c in enumerate(SCENARIO2_GARCH, start=3):
            plan += [(str(k), f"fgarch11({c})", garch(c))] * 5
    elif scenario_id == 3:
        for k, c in enumerate(SCENARIO3_FAR, start=1):
            plan += [(str(k), f"far2{c}", far(c))] * 5
        plan.append((ISOLATED, "brownian", noise()))
    elif scenario_id == 4:
        plan += [("1", f"nonlinear_far1{SCENARIO2_NONLINEAR[1]}", nonlinear(SCENARIO2_NONLINEAR[1]))] * 5
        plan += [("2", f"fgarch11({SCENARIO2_GARCH[0]})", garch(SCENARIO2_GARCH[0]))] * 5
        plan.append((ISOLATED, "brownian", noise()))
    else:
        raise DomainError(f"未知的场景编号: {scenario_id}（可选 1-4）")
    return plan


def make_scenario(scenario_id: int, T: int = 200, p: int = 100, seed: int = 0, burn_in: int = 100,
                  noise_scale: Optional[float] = None, isolated_scale: float = 1.0,
                  unequal_lengths: bool = False,
                  lengths: Sequence[int] = DEFAULT_LENGTHS) -> ScenarioDataset:
    """
    生成场景数据集。

    参数:
        - scenario_id: 1-4
        - T: 序列长度（unequal_lengths=True 时忽略）
        - p: 网格点数，默认 100
        - seed: 随机种子，相同参数得到逐位相同的数据集
        - unequal_lengths: 每条序列的长度从 lengths 中等概率抽取

    用法示例:
        data = make_scenario(1, T=200, seed=7)
    """
    if scenario_id not in SCENARIOS:
        raise DomainError(f"未知的场景编号: {scenario_id}（可选 1-4）")
    plan = _plan(int(scenario_id), int(burn_in), noise_scale, float(isolated_scale))
    if unequal_lengths:
        length_rng = _series_rng(seed, len(plan))
        sizes = [int(x) for x in length_rng.choice(np.asarray(lengths, dtype=int), size=len(plan))]
    else:
        if T < 3:
            raise DomainError(f"序列长度 T 必须 ≥ 3，当前为 {T}")
        sizes = [int(T)] * len(plan)

    series, labels, generators = [], [], []
    for idx, ((label, name, gen), size) in enumerate(zip(plan, sizes)):
        sid = f"s{scenario_id}_{idx + 1:02d}"
        series.append(gen(size, int(p), _series_rng(seed, idx), sid))
        labels.append(label)
        generators.append(name)
    log.debug(f"场景 {scenario_id} 生成完成: {len(series)} 条序列, seed={seed}")
    return ScenarioDataset(series, labels, int(scenario_id), int(seed),
                           sizes if unequal_lengths else int(T), int(p), generators)
