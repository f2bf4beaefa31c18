#!/usr/bin/env python3
"""
重复实验得分汇总
- 按 (方法, m) 汇总 ARIF / JIF 的均值与标准差
- 不确定场景: 成功率与模糊度曲线下面积
- 与参考方法（默认 FQA）的配对 t 检验，Bonferroni 校正
"""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
from rich.table import Table
from scipy import stats

from scripts.evaluate.indices import area_under_fuzziness_curve
from scripts.log.log import log
from scripts.utils.errors import DomainError

SCORES = ("ARIF", "JIF", "ARI", "JI")


def _group(records: Sequence[dict]) -> Dict[tuple, List[dict]]:
    groups: Dict[tuple, List[dict]] = {}
    for rec in records:
        groups.setdefault((str(rec["method"]), float(rec["m"])), []).append(rec)
    return dict(sorted(groups.items()))


# ------------------------
# 得分汇总
# ------------------------
def aggregate_scores(records: Sequence[dict], scores: Sequence[str] = ("ARIF", "JIF")) -> List[dict]:
    """
    逐 (method, m) 计算各得分的均值与样本标准差。

    参数:
        - records: 每次重复的得分记录，至少包含 method / m / seed 以及 scores 中的键

    返回值:
        [{"method", "m", "n", "<score>_mean", "<score>_sd", ...}]，按 method、m 排序
    """
    if not records:
        raise DomainError("得分记录为空")
    rows = []
    for (method, m), group in _group(records).items():
        row = {"method": method, "m": m, "n": len(group)}
        for score in scores:
            values = np.array([g[score] for g in group], dtype=float)
            row[f"{score}_mean"] = float(values.mean())
            row[f"{score}_sd"] = float(values.std(ddof=1)) if values.size > 1 else 0.0
        rows.append(row)
    return rows


def success_summary(records: Sequence[dict]) -> List[dict]:
    """不确定场景: 每个方法在各 m 下的成功率，以及成功率曲线对 m 的面积"""
    if not records:
        raise DomainError("得分记录为空")
    per_method: Dict[str, List[tuple]] = {}
    for (method, m), group in _group(records).items():
        rate = float(np.mean([bool(g["success"]) for g in group]))
        per_method.setdefault(method, []).append((m, rate, len(group)))
    rows = []
    for method, points in per_method.items():
        ms = [p[0] for p in points]
        rates = [p[1] for p in points]
        auc = area_under_fuzziness_curve(ms, rates) if len(ms) > 1 else 0.0
        best = int(np.argmax(rates))
        rows.append({
            "method": method,
            "m": ms,
            "success_rate": rates,
            "n": [p[2] for p in points],
            "auc": auc,
            "peak_rate": rates[best],
            "peak_m": ms[best],
        })
    return rows


# ------------------------
# 配对比较
# ------------------------
@dataclass
class PairedComparison:
    reference: str
    score: str
    n_tests: int
    rows: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"reference": self.reference, "score": self.score, "n_tests": self.n_tests, "rows": self.rows}


def paired_comparison(records: Sequence[dict], reference: str = "FQA", score: str = "ARIF",
                      alpha: float = 0.05) -> PairedComparison:
    """
    同一 m 下，参考方法与其它方法按 seed 配对做 t 检验，p 值乘以检验总数（上限 1）。

    配对差恒为常数时 t 统计量无定义：差为零记 p = 1，否则记 p = 0，统计量为 null。
    """
    groups = _group(records)
    methods = sorted({k[0] for k in groups})
    if reference not in methods:
        raise DomainError(f"得分记录中没有参考方法 {reference}")
    pairs = []
    for (method, m), group in groups.items():
        if method == reference or (reference, m) not in groups:
            continue
        ref_by_seed = {g["seed"]: g[score] for g in groups[(reference, m)]}
        other_by_seed = {g["seed"]: g[score] for g in group}
        seeds = sorted(set(ref_by_seed) & set(other_by_seed))
        if len(seeds) < 2:
            continue
        pairs.append((method, m, np.array([ref_by_seed[s] for s in seeds], dtype=float),
                      np.array([other_by_seed[s] for s in seeds], dtype=float)))

    n_tests = len(pairs)
    rows = []
    for method, m, ref, other in pairs:
        diff = ref - other
        if np.all(diff == diff[0]):
            statistic, p_raw = (0.0, 1.0) if diff[0] == 0 else (None, 0.0)
        else:
            result = stats.ttest_rel(ref, other)
            statistic, p_raw = float(result.statistic), float(result.pvalue)
        p_adj = min(1.0, p_raw * n_tests)
        rows.append({
            "method": method, "m": m, "n": int(ref.size),
            "mean_difference": float(diff.mean()),
            "statistic": statistic, "p_value": p_raw, "p_bonferroni": p_adj,
            "significant": bool(p_adj < alpha),
        })
    log.debug(f"配对 t 检验 {n_tests} 组，参考方法 {reference}，得分 {score}")
    return PairedComparison(reference, score, n_tests, rows)


# ------------------------
# rich 表格
# ------------------------
def score_table(rows: Sequence[dict], scores: Sequence[str] = ("ARIF", "JIF"), title: str = "重复实验得分") -> Table:
    table = Table(title=title)
    table.add_column("方法")
    table.add_column("m")
    table.add_column("次数")
    for score in scores:
        table.add_column(score)
    for row in rows:
        cells = [f"{row[f'{s}_mean']:.3f} ({row[f'{s}_sd']:.3f})" for s in scores]
        table.add_row(row["method"], f"{row['m']:g}", str(row["n"]), *cells)
    return table


def success_table(rows: Sequence[dict], title: str = "不确定场景成功率") -> Table:
    table = Table(title=title)
    table.add_column("方法")
    table.add_column("峰值成功率")
    table.add_column("峰值 m")
    table.add_column("曲线下面积")
    for row in rows:
        table.add_row(row["method"], f"{row['peak_rate']:.3f}", f"{row['peak_m']:g}", f"{row['auc']:.4f}")
    return table


def comparison_table(comparison: PairedComparison) -> Table:
    table = Table(title=f"与 {comparison.reference} 的配对 t 检验 ({comparison.score}, Bonferroni × {comparison.n_tests})")
    table.add_column("方法")
    table.add_column("m")
    table.add_column("平均差")
    table.add_column("校正 p 值")
    for row in comparison.rows:
        mark = " *" if row["significant"] else ""
        table.add_row(row["method"], f"{row['m']:g}", f"{row['mean_difference']:+.3f}",
                      f"{row['p_bonferroni']:.3g}{mark}")
    return table
