"""
여러 seed 로 독립 학습 후 test 지표의 평균/표준편차
"""
import logging
from typing import Iterable, Optional, Sequence

import numpy as np

from apps.graphs.models import DatasetSplit, Graph
from apps.trainer.evaluation import evaluate
from apps.trainer.loop import train
from apps.trainer.models import TrainConfig

logger = logging.getLogger(__name__)


def summarize(runs: Sequence[dict]) -> dict:
    keys = sorted({k for run in runs for k in run["test"] if k != "n_examples"})
    mean, std = {}, {}
    for key in keys:
        values = np.array([run["test"][key] for run in runs if key in run["test"]], dtype=np.float64)
        mean[key] = float(values.mean())
        std[key] = float(values.std())
    return {"runs": list(runs), "mean": mean, "std": std}


def run_seeds(graphs: Sequence[Graph], splits: DatasetSplit, config: TrainConfig, seeds: Iterable[int]) -> dict:
    runs = []
    for seed in seeds:
        run_config = config.replace(seed=int(seed))
        model, history = train(graphs, splits, run_config)
        record = evaluate(model, graphs, splits.test or splits.train, run_config.task, run_config.mask_mode,
                          run_config.log_target, run_config.mask_threshold)
        logger.info("seed %d: %s", seed, record.to_dict())
        runs.append({"seed": int(seed), "best_epoch": history.best_epoch, "test": record.to_dict()})
    return summarize(runs)


def sweep(graphs: Sequence[Graph], splits: DatasetSplit, config: TrainConfig, seeds: Iterable[int],
          overrides: Optional[dict] = None, compare_alpha0: bool = False) -> dict:
    """
    overrides 를 적용한 설정으로 seed 마다 한 번씩 학습.
    compare_alpha0 이면 environment replacement 를 끈 (alpha=0) 변형도 같은 seed 로 돌린다.
    """
    seeds = [int(s) for s in seeds]
    config = config.replace(**(overrides or {}))
    report = {"config": config.to_dict(), "seeds": seeds, "grea": run_seeds(graphs, splits, config, seeds)}
    if compare_alpha0:
        report["alpha0"] = run_seeds(graphs, splits, config.replace(alpha=0.0), seeds)
    return report
