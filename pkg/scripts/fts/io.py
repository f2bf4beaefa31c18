"""
序列文件读写
CSV: UTF-8、逗号分隔、'.' 小数点，默认无表头；行 = 时间，列 = 网格点
清单: {"series": [{"id": ..., "path": ..., "label": ...}]}
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from scripts.fts.core import FunctionalTimeSeries, Grid
from scripts.log.log import log
from scripts.utils.errors import ParseError

PathLike = Union[str, Path]


# ------------------------
# CSV
# ------------------------
def load_csv(path: PathLike, header: bool = False, series_id: Optional[str] = None,
             grid: Optional[Grid] = None) -> FunctionalTimeSeries:
    """
    读取矩形数值 CSV 为函数型时间序列。

    参数:
        - path: CSV 路径
        - header (bool, 默认 False): 首行是否为表头
        - series_id: 序列标识，缺省时使用文件名（不含扩展名）
        - grid: 网格，缺省时使用 [0, 1] 上的等距网格

    错误:
        行长度不一致、非数值单元格、空文件都会抛出 ParseError 并给出行列位置（从 1 开始）。
    """
    path = Path(path)
    rows: List[List[float]] = []
    width = None
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        for line_no, record in enumerate(reader, start=1):
            if header and line_no == 1:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError(f"{path.name}: 行长度 {len(record)} 与首行长度 {width} 不一致", row=line_no)
            parsed = []
            for col_no, cell in enumerate(record, start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(f"{path.name}: 非数值单元格 {cell!r}", row=line_no, column=col_no) from None
                if not math.isfinite(value):
                    raise ParseError(f"{path.name}: 非有限值 {cell!r}", row=line_no, column=col_no)
                parsed.append(value)
            rows.append(parsed)
    if not rows:
        raise ParseError(f"{path.name}: 没有数据行 (no rows)")
    sid = series_id if series_id is not None else path.stem
    log.debug(f"读取序列 {sid}: {len(rows)}×{width}")
    return FunctionalTimeSeries(np.array(rows, dtype=float), grid, sid)


def save_csv(X: FunctionalTimeSeries, path: PathLike) -> Path:
    """按 17 位有效数字写出，保证读回后逐位一致"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for row in X.values:
            writer.writerow([format(float(v), ".17g") for v in row])
    return path


def save_matrix_csv(values: np.ndarray, path: PathLike, header: Optional[Sequence[str]] = None) -> Path:
    """通用二维矩阵写出（相异度矩阵、坐标、特征表）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if header is not None:
            writer.writerow(list(header))
        for row in np.atleast_2d(values):
            writer.writerow([format(float(v), ".17g") for v in row])
    return path


# ------------------------
# 数据集清单
# ------------------------
@dataclass(frozen=True)
class ManifestEntry:
    series_id: str
    path: Path
    label: Optional[str] = None


def load_manifest(path: PathLike) -> List[ManifestEntry]:
    """读取清单 JSON，相对路径按清单所在目录解析"""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path.name}: 清单不是合法 JSON ({e.msg})", row=e.lineno, column=e.colno) from None
    series = doc.get("series") if isinstance(doc, dict) else None
    if not isinstance(series, list) or not series:
        raise ParseError(f"{path.name}: 清单缺少非空的 series 列表")
    entries = []
    for i, item in enumerate(series):
        if not isinstance(item, dict) or "id" not in item or "path" not in item:
            raise ParseError(f"{path.name}: 第 {i} 个条目缺少 id 或 path")
        p = Path(item["path"])
        if not p.is_absolute():
            p = path.parent / p
        label = item.get("label")
        entries.append(ManifestEntry(str(item["id"]), p, None if label is None else str(label)))
    return entries


def load_collection(manifest_path: PathLike, header: bool = False) -> List[FunctionalTimeSeries]:
    entries = load_manifest(manifest_path)
    collection = [load_csv(e.path, header=header, series_id=e.series_id) for e in entries]
    log.info(f"清单 {manifest_path} 共读取 {len(collection)} 条序列")
    return collection


def manifest_labels(manifest_path: PathLike) -> Dict[str, Optional[str]]:
    """清单中序列标识到参考标签的映射，未标注的序列映射为 None"""
    return {e.series_id: e.label for e in load_manifest(manifest_path)}


def write_manifest(entries: Sequence[ManifestEntry], path: PathLike) -> Path:
    """写出清单，路径相对于清单目录保存"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    items = []
    for e in entries:
        try:
            rel = Path(e.path).relative_to(path.parent)
        except ValueError:
            rel = Path(e.path)
        item = {"id": e.series_id, "path": rel.as_posix()}
        if e.label is not None:
            item["label"] = e.label
        items.append(item)
    path.write_text(json.dumps({"series": items}, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return path
