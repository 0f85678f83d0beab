"""
GREA 손실 함수

- L_rem: rationale 만으로 만든 표현 h_r 의 예측 손실
- L_rep: (i, j) 모든 쌍의 environment 교체 표현에 대한 예측 손실 (target 은 y_i)
- L_reg: rationale 크기 정규화 (부호 있음)
- L_pred = L_rem + alpha * L_rep,  L_sep = L_pred + beta * L_reg

분류 손실은 log-likelihood 의 부호를 뒤집은 BCE 로 최소화한다.
"""
from typing import Union

import numpy as np

from apps.common.exceptions import ConfigError, ShapeError
from apps.rationale.models import RationaleMask
from apps.tensor import ops
from apps.tensor.tensor import Tensor
from base.enums import errors
from base.enums.base import Task

Scalar = Union[Tensor, float]


def check_labels(y, task: str) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if np.isnan(y).any():
        raise ConfigError("unlabeled graph in a supervised batch", error=errors.E003_TASK_LABEL_MISMATCH)
    if task == Task.BINARY.value and not np.isin(y, (0.0, 1.0)).all():
        raise ConfigError(f"binary task needs labels in {{0, 1}}, got {sorted(set(y.tolist()))[:5]}",
                          error=errors.E003_TASK_LABEL_MISMATCH)
    if task not in (Task.BINARY.value, Task.REGRESSION.value):
        raise ConfigError(f"task={task!r}")
    return y


def supervised_loss(pred: Tensor, y, task: str) -> Tensor:
    y = check_labels(y, task)
    if task == Task.BINARY.value:
        return ops.bce_with_logits(pred, y)
    return ops.mse(pred, y)


def loss_rem(y_r: Tensor, y, task: str) -> Tensor:
    if y_r.data.size != np.asarray(y).size:
        raise ShapeError(f"loss_rem predictions {y_r.shape} vs labels {np.asarray(y).shape}")
    return supervised_loss(y_r, y, task)


def loss_rep(y_pair: Tensor, y, task: str, include_diagonal: bool = True) -> Tensor:
    """
    y_pair: (B, B), 행 i 는 rationale i 에 environment j 를 붙인 예측.
    행마다 j 평균 후 i 평균. include_diagonal=False 면 j != i 만 쓰고 B == 1 이면 0.
    """
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    B = y.shape[0]
    if y_pair.shape != (B, B):
        raise ShapeError(f"loss_rep grid {y_pair.shape} vs labels ({B},)")
    targets = np.repeat(y, B)
    flat = ops.reshape(y_pair, (B * B, 1))
    if not include_diagonal:
        if B == 1:
            return Tensor.wrap(np.asarray(0.0))
        keep = np.flatnonzero(~np.eye(B, dtype=bool).reshape(-1))
        flat = ops.gather_rows(flat, keep)
        targets = targets[keep]
    return supervised_loss(flat, targets, task)


def loss_reg(mask: RationaleMask, gamma: float, threshold: float = 0.5) -> Tensor:
    """
    그래프별 (mean(m) - gamma) + (count(m > threshold) / N - gamma) 의 평균.
    두 번째 항은 계단 함수라 그래디언트에서 제외한다.
    """
    term1 = ops.segment_mean(mask.m, mask.segments, mask.num_graphs)
    selected = (mask.m.data > threshold).astype(np.float64)
    term2 = ops.segment_mean(Tensor.wrap(selected), mask.segments, mask.num_graphs).data
    return ops.mean(ops.add(term1, Tensor.wrap(term2 - 2.0 * gamma)))


def loss_pred(l_rem: Scalar, l_rep: Scalar, alpha: float) -> Scalar:
    if not isinstance(l_rem, Tensor) and not isinstance(l_rep, Tensor):
        return float(l_rem) + alpha * float(l_rep)
    return ops.add(l_rem, ops.scale(ops.as_tensor(l_rep, like=l_rem), alpha))


def loss_sep(l_rem: Scalar, l_rep: Scalar, l_reg: Scalar, alpha: float, beta: float) -> Scalar:
    l_pred = loss_pred(l_rem, l_rep, alpha)
    if not isinstance(l_pred, Tensor) and not isinstance(l_reg, Tensor):
        return l_pred + beta * float(l_reg)
    l_pred = ops.as_tensor(l_pred, like=l_reg)
    return ops.add(l_pred, ops.scale(ops.as_tensor(l_reg, like=l_pred), beta))
