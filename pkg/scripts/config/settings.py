"""
配置加载模块
统一从项目根目录的 config.yaml 读取配置，缺失的字段使用内置默认值补齐
"""

import copy
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

PROJECT_ROOT = Path(__file__).parent.parent.parent
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "config.yaml"

# ------------------------------
# 内置默认配置
# ------------------------------
DEFAULTS: Dict[str, Any] = {
    "logs": {
        "logs_path": "logs",
        "max_retention_days": 90,
        "is_log_to_console": True,
        "is_log_to_file": False,
        "level": "INFO",
    },
    "fqa": {
        "levels": [0.1, 0.5, 0.9],
        "lags": [1],
        "thresholds": "reduced",
        "on_degenerate": "raise",
    },
    "solver": {
        "algorithm": "c_medoids",
        "C": 2,
        "m": 1.5,
        "max_iter": 100000,
        "n_starts": 200,
        "seed": 0,
        "tol": 1e-6,
        "n_jobs": 1,
    },
    "spatial_median": {
        "tol": 1e-8,
        "max_iter": 10000,
    },
    "simulate": {
        "T": 200,
        "p": 100,
        "burn_in": 100,
        "noise_scale": "auto",
        "isolated_scale": 1.0,
        "lengths": [200, 300, 400, 500, 600],
    },
    "selection": {
        "alpha": 0.05,
        "L_max": 5,
        "C_grid": [2, 3, 4, 5, 6],
        "m_grid": [1.2, 1.4, 1.6, 1.8, 2.0],
        "test": "t",
        "n_permutations": 999,
    },
    "evaluate": {
        "threshold": 0.7,
        "isolated_label": "isolated",
        "mds_permutations": 999,
    },
    "output": {
        "out_dir": "runs",
    },
}


def merge_config(base: dict, override: dict) -> dict:
    """递归合并两个字典，override 中的值优先"""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    读取配置文件并与默认配置合并。

    参数:
        - config_path (Optional[str | Path]): 配置文件路径，None 时使用项目根目录的 config.yaml。

    返回值:
        合并后的完整配置字典。文件不存在时直接返回默认配置的副本。
    """
    path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
    if not path.exists():
        if config_path:
            raise FileNotFoundError(f"未找到配置文件: {path}")
        return copy.deepcopy(DEFAULTS)
    with open(path, "r", encoding="utf-8") as f:
        cfg = yaml.safe_load(f) or {}
    return merge_config(DEFAULTS, cfg)
