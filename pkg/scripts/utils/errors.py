"""
统一异常定义
所有计算模块抛出的异常都继承自 FqaClusteringError，命令行入口据此区分计算错误与用法错误
"""

from typing import Optional, Tuple


class FqaClusteringError(Exception):
    """项目异常基类"""


class DomainError(FqaClusteringError, ValueError):
    """参数或数据不在操作的定义域内"""


class DimensionError(DomainError):
    """维度（网格长度、矩阵形状）不一致"""


class ParseError(FqaClusteringError, ValueError):
    """CSV / 清单文件解析失败，带行列位置"""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.row = row
        self.column = column
        location = ""
        if row is not None:
            location = f" (第 {row} 行" + (f", 第 {column} 列)" if column is not None else ")")
        super().__init__(f"{message}{location}")

    def __reduce__(self):
        return type(self), (self.message, self.row, self.column)


class DegenerateMarginal(FqaClusteringError):
    """FQA 分母退化：某个边际频率等于 0 或 1"""

    def __init__(self, tau: float, tau2: float, lag: int, beta: float, beta2: float,
                 series_id: Optional[str] = None):
        self.tau = tau
        self.tau2 = tau2
        self.lag = lag
        self.beta = beta
        self.beta2 = beta2
        self.series_id = series_id
        where = f"序列 {series_id}: " if series_id is not None else ""
        super().__init__(
            f"{where}边际频率退化 (tau={tau}, tau2={tau2}, lag={lag}, beta={beta}, beta2={beta2})"
        )

    def __reduce__(self):
        return type(self), (self.tau, self.tau2, self.lag, self.beta, self.beta2, self.series_id)

    @property
    def coordinate(self) -> Tuple[float, float, int, float, float]:
        return self.tau, self.tau2, self.lag, self.beta, self.beta2


class DegenerateVariance(FqaClusteringError):
    """样本方差为零（常数序列等）"""


class DegenerateSeparation(FqaClusteringError):
    """Xie-Beni 指数分母为零：存在重合的聚类中心"""


class DegenerateCluster(FqaClusteringError):
    """某个聚类的隶属度之和为零"""


class ConvergenceError(FqaClusteringError):
    """迭代算法在最大迭代次数内未收敛"""


class StabilityError(FqaClusteringError):
    """模拟过程数值发散"""


class SelectionError(FqaClusteringError):
    """超参数选择失败（所有候选都退化）"""


class IndexUndefinedError(FqaClusteringError):
    """评价指标无定义（例如参考划分只有一个类别）"""


class PairwiseError(FqaClusteringError):
    """计算相异度矩阵时某条序列（或某一对序列）失败；逐序列特征失败时 pair 为 None"""

    def __init__(self, message: str, series_id: str, pair: Optional[Tuple[int, int]] = None,
                 index: Optional[int] = None):
        self.series_id = series_id
        self.pair = pair
        self.index = index
        self.detail = message
        if pair is not None:
            where = f"序列对 {pair} 计算失败 (序列 {series_id})"
        elif index is not None:
            where = f"序列 {series_id} (下标 {index}) 特征计算失败"
        else:
            where = f"序列 {series_id} 特征计算失败"
        super().__init__(f"{where}: {message}")

    def __reduce__(self):
        return type(self), (self.detail, self.series_id, self.pair, self.index)
