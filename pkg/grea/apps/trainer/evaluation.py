"""
추론과 평가. 추론은 항상 rationale 표현 h_r 의 예측만 쓴다 (augmentation 없음).
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from apps.common.exceptions import ConfigError, UndefinedMetricError
from apps.graphs.batching import make_batches
from apps.graphs.models import Graph
from apps.metrics import scores
from apps.metrics.models import MetricsRecord
from apps.rationale.models import ModelParams
from apps.rationale.pipeline import rationale_pass
from apps.tensor.tensor import no_grad
from base.enums import errors
from base.enums.base import MaskMode, RationaleMode, Task

logger = logging.getLogger(__name__)

EVAL_BATCH_SIZE = 256


def targets_for(graphs: Sequence[Graph], indices: Sequence[int], task: str, log_target: bool = False) -> np.ndarray:
    """학습/평가에 쓰는 target. log_target 이면 ln(y) (y > 0 필요)"""
    y = np.array([np.nan if graphs[i].label is None else graphs[i].label for i in indices], dtype=np.float64)
    if np.isnan(y).any():
        raise ConfigError("unlabeled graph in a labeled split", error=errors.E003_TASK_LABEL_MISMATCH)
    if task == Task.BINARY.value and not np.isin(y, (0.0, 1.0)).all():
        raise ConfigError("binary task needs labels in {0, 1}", error=errors.E003_TASK_LABEL_MISMATCH)
    if log_target:
        if np.any(y <= 0):
            raise ConfigError("log_target needs strictly positive labels", error=errors.E003_TASK_LABEL_MISMATCH)
        y = np.log(y)
    return y


def predict_graphs(model: ModelParams, graphs: Sequence[Graph], indices: Sequence[int],
                   mask_mode: str = MaskMode.LEARNED.value,
                   batch_size: int = EVAL_BATCH_SIZE) -> Tuple[np.ndarray, List[np.ndarray]]:
    """indices 순서대로 (logit 또는 값, 노드 mask 목록)"""
    if graphs and graphs[0].feature_dim != model.feature_dim:
        raise ConfigError(
            f"expected feature width F={model.feature_dim}, data has F={graphs[0].feature_dim}",
            error=errors.E003_FEATURE_WIDTH,
        )
    preds, masks = [], []
    with no_grad():
        for batch in make_batches(graphs, batch_size, indices=indices):
            result = rationale_pass(batch, model, mask_mode)
            preds.append(result.y_r.data.copy())
            masks.extend(result.mask.per_graph())
    return (np.concatenate(preds) if preds else np.zeros(0)), masks


def evaluate(model: ModelParams, graphs: Sequence[Graph], indices: Sequence[int], task: Optional[str] = None,
             mask_mode: str = MaskMode.LEARNED.value, log_target: bool = False,
             mask_threshold: float = 0.5) -> MetricsRecord:
    indices = list(indices)
    if not indices:
        raise ConfigError("empty evaluation split", error=errors.E004_EMPTY_EVAL_SPLIT)
    task = task or model.task
    y = targets_for(graphs, indices, task, log_target)
    preds, masks = predict_graphs(model, graphs, indices, mask_mode)

    record = MetricsRecord(n_examples=len(indices))
    if task == Task.BINARY.value:
        record.accuracy = scores.accuracy(preds, y)
        try:
            record.auc = scores.roc_auc(preds, y)
        except UndefinedMetricError as e:
            logger.warning("auc undefined on %d graphs: %s", len(indices), e.detail)
    else:
        record.rmse = scores.rmse(preds, y)
        try:
            record.r2 = scores.r2(preds, y)
        except UndefinedMetricError as e:
            logger.warning("r2 undefined on %d graphs: %s", len(indices), e.detail)

    record.rationale_fraction = float(np.mean([np.mean(m > mask_threshold) for m in masks]))
    scored = [
        scores.rationale_score(m, graphs[i].rationale_truth, RationaleMode.TOP_K.value)
        for i, m in zip(indices, masks) if graphs[i].rationale_truth
    ]
    if scored:
        record.rationale_precision = float(np.mean([p for p, _ in scored]))
        record.rationale_recall = float(np.mean([r for _, r in scored]))
    return record
