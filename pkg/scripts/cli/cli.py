#!/usr/bin/env python3
"""
命令行入口
子命令: simulate / features / cluster / select / evaluate / mds / summarize / replicate
退出码: 0 成功, 2 用法错误, 1 计算错误

用法示例:
    python main.py simulate --scenario 1 --seed 7 --out runs/s1
    python main.py cluster runs/s1/manifest.json --metric FQA -C 4 -m 1.2 --lags 1,2 --out runs/s1_fqa
    python main.py evaluate --partition runs/s1_fqa/partition.json --labels runs/s1/labels.json
"""

import argparse
import sys
from typing import List, Optional

from scripts import __version__
from scripts.clustering.fuzzy import SolverConfig
from scripts.cli.runner import ALGORITHMS, MODES, ExperimentRunner
from scripts.config.settings import DEFAULT_CONFIG_PATH, load_config, merge_config
from scripts.fqa.dissimilarity import Metric
from scripts.fqa.fqa import FqaParams
from scripts.log.log import log
from scripts.simulate.scenarios import SCENARIOS
from scripts.utils.errors import DomainError, FqaClusteringError

METRICS = [m.value for m in Metric]


# ------------------------
# 参数类型
# ------------------------
def _list_of(cast):
    def parse(text: str):
        items = [x.strip() for x in str(text).split(",") if x.strip()]
        try:
            return [cast(x) for x in items]
        except ValueError:
            raise argparse.ArgumentTypeError(f"无法解析的列表: {text!r}") from None
    return parse


int_list = _list_of(int)
float_list = _list_of(float)


def _metric_list(text: str) -> List[str]:
    metrics = [x.strip() for x in text.split(",") if x.strip()]
    unknown = [x for x in metrics if x not in METRICS]
    if unknown:
        raise argparse.ArgumentTypeError(f"未知的度量: {unknown[0]}（可选 {', '.join(METRICS)}）")
    return metrics


# ------------------------
# 参数解析器
# ------------------------
def _common_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="配置文件路径，缺省为项目根目录的 config.yaml")
    parent.add_argument("--out", help="输出目录")
    parent.add_argument("--seed", type=int, help="随机种子")
    parent.add_argument("--n-jobs", dest="n_jobs", type=int, help="并行进程数")
    parent.add_argument("--log-level", dest="log_level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parent


def _model_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--metric", choices=METRICS, default=Metric.FQA.value, help="相异度")
    parent.add_argument("--lags", type=int_list, help="滞后集合，如 1,2")
    parent.add_argument("--levels", type=float_list, help="分位数水平，如 0.1,0.5,0.9")
    parent.add_argument("--thresholds", type=float_list, help="显式阈值集合（缺省为简化模式）")
    parent.add_argument("--degenerate-zero", dest="degenerate_zero", action="store_true",
                        help="退化坐标记为 0 并给出警告，而不是报错")
    return parent


def _solver_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--algorithm", choices=ALGORITHMS)
    parent.add_argument("-C", dest="C", type=int, help="聚类数")
    parent.add_argument("-m", dest="m", type=float, help="模糊参数 (> 1)")
    parent.add_argument("--starts", type=int, help="随机初始化次数")
    parent.add_argument("--max-iter", dest="max_iter", type=int)
    parent.add_argument("--tol", type=float)
    return parent


def _simulation_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--scenario", type=int, choices=SCENARIOS, required=True)
    parent.add_argument("-T", dest="T", type=int, help="序列长度")
    parent.add_argument("-p", dest="p", type=int, help="网格点数")
    parent.add_argument("--unequal-lengths", dest="unequal_lengths", action="store_true",
                        help="序列长度从 {200,...,600} 中随机抽取")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fqa-cluster", description="函数型时间序列的 FQA 模糊聚类")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common, model, solver, simulation = _common_parser(), _model_parser(), _solver_parser(), _simulation_parser()

    sub.add_parser("simulate", parents=[common, simulation], help="生成模拟场景数据集")

    p = sub.add_parser("features", parents=[common, model], help="计算特征矩阵")
    p.add_argument("manifest")

    p = sub.add_parser("cluster", parents=[common, model, solver], help="计算相异度并做模糊聚类")
    p.add_argument("manifest")

    p = sub.add_parser("select", parents=[common, model, solver], help="选择滞后集合与 (C, m)")
    p.add_argument("manifest")
    p.add_argument("--alpha", type=float)
    p.add_argument("--L-max", dest="L_max", type=int)
    p.add_argument("--C-grid", dest="C_grid", type=int_list)
    p.add_argument("--m-grid", dest="m_grid", type=float_list)
    p.add_argument("--test", choices=["t", "permutation"])
    p.add_argument("--permutations", type=int)

    p = sub.add_parser("evaluate", parents=[common], help="评价模糊划分")
    p.add_argument("--partition", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--mode", choices=MODES, default="crisp")
    p.add_argument("--threshold", type=float)

    p = sub.add_parser("mds", parents=[common], help="二维标度与 stress 置换检验")
    p.add_argument("--distances", required=True)
    p.add_argument("--permutations", type=int)

    p = sub.add_parser("summarize", parents=[common, model], help="按隶属度加权的类特征均值")
    p.add_argument("--partition", required=True)
    p.add_argument("--manifest", required=True)

    p = sub.add_parser("replicate", parents=[common, model, solver, simulation], help="重复实验与得分汇总")
    p.add_argument("--replicates", type=int, default=50)
    p.add_argument("--metrics", type=_metric_list, help="逗号分隔的度量列表，缺省为 --metric")
    p.add_argument("--m-grid", dest="m_grid", type=float_list)
    p.add_argument("--threshold", type=float)
    return parser


# ------------------------
# 命令行参数覆盖配置
# ------------------------
def _overrides(args: argparse.Namespace) -> dict:
    def pick(**pairs):
        return {k: v for k, v in pairs.items() if v is not None}

    def get(name):
        return getattr(args, name, None)

    fqa = pick(lags=get("lags"), levels=get("levels"), thresholds=get("thresholds"))
    if get("degenerate_zero"):
        fqa["on_degenerate"] = "zero"
    selection = pick(alpha=get("alpha"), L_max=get("L_max"), C_grid=get("C_grid"), test=get("test"))
    if args.command == "select" and get("m_grid") is not None:
        selection["m_grid"] = get("m_grid")
    evaluate = pick(threshold=get("threshold"))
    if args.command == "mds" and get("permutations") is not None:
        evaluate["mds_permutations"] = get("permutations")
    if args.command == "select" and get("permutations") is not None:
        selection["n_permutations"] = get("permutations")
    return {
        "logs": pick(level=get("log_level")),
        "fqa": fqa,
        "solver": pick(algorithm=get("algorithm"), C=get("C"), m=get("m"), n_starts=get("starts"),
                       max_iter=get("max_iter"), tol=get("tol"), seed=get("seed"), n_jobs=get("n_jobs")),
        "simulate": pick(T=get("T"), p=get("p")),
        "selection": selection,
        "evaluate": evaluate,
        "output": pick(out_dir=get("out")),
    }


def resolve_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    """配置文件 + 命令行覆盖，并在运行前校验超参数（不合法时按用法错误处理）"""
    if args.config is None and not DEFAULT_CONFIG_PATH.exists():
        log.warning(f"未找到配置文件 {DEFAULT_CONFIG_PATH}，使用内置默认配置")
    try:
        config = merge_config(load_config(args.config), _overrides(args))
    except FileNotFoundError as e:
        parser.error(str(e))
    try:
        FqaParams.from_dict(config["fqa"])
        SolverConfig.from_config(config["solver"])
    except DomainError as e:
        parser.error(str(e))
    if args.command == "select":
        if not config["selection"].get("C_grid") or not config["selection"].get("m_grid"):
            parser.error("C 与 m 的候选网格不能为空")
    if args.command == "replicate" and args.replicates < 1:
        parser.error("--replicates 必须 ≥ 1")
    return config


def dispatch(args: argparse.Namespace, runner: ExperimentRunner):
    cmd = args.command
    if cmd == "simulate":
        return runner.simulate(args.scenario, args.unequal_lengths)
    if cmd == "features":
        return runner.features(args.manifest, args.metric)
    if cmd == "cluster":
        return runner.cluster(args.manifest, args.metric)
    if cmd == "select":
        return runner.select(args.manifest, args.metric)
    if cmd == "evaluate":
        return runner.evaluate(args.partition, args.labels, args.mode)
    if cmd == "mds":
        return runner.mds(args.distances)
    if cmd == "summarize":
        return runner.summarize(args.partition, args.manifest, args.metric)
    m_grid = args.m_grid or runner.config["selection"]["m_grid"]
    return runner.replicate(args.scenario, args.replicates, args.metrics or [args.metric], m_grid,
                            args.unequal_lengths)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = resolve_config(args, parser)
    log.set_level(config["logs"].get("level", "INFO"))
    try:
        runner = ExperimentRunner(config, config["output"]["out_dir"])
        path = dispatch(args, runner)
    except FqaClusteringError as e:
        log.error(f"{args.command} 失败: {type(e).__name__}: {e}")
        return 1
    except (OSError, KeyError) as e:
        log.error(f"{args.command} 失败: {type(e).__name__}: {e}")
        return 1
    log.info(f"{args.command} 完成: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
