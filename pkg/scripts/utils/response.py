import json
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from scripts import __version__


def _to_builtin(obj: Any):
    """把 numpy 类型转换成 json 可序列化的内置类型"""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"无法序列化的类型: {type(obj).__name__}")


def standard_report(code: int = 0, message: str = "success", data: Optional[dict] = None,
                    config: Optional[dict] = None) -> dict:
    """
    标准化输出报告的工具函数

    参数：
        code (int): 状态码，0 为正常，其他可自定义
        message (str): 提示信息
        data (dict | None): 输出的数据内容
        config (dict | None): 本次运行解析后的完整配置

    返回：
        dict，包含 code / message / version / config / data 五个字段
    """
    return {
        "code": code,
        "message": message,
        "version": __version__,
        "config": config if config is not None else {},
        "data": data if data is not None else {},
    }


def dumps(payload: Any) -> str:
    """固定格式的 JSON 文本（UTF-8、缩进 2、保持插入顺序）"""
    return json.dumps(payload, ensure_ascii=False, indent=2, default=_to_builtin) + "\n"


def write_json(path: Union[str, Path], payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload), encoding="utf-8")
    return path


def read_json(path: Union[str, Path]) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
