"""
배치 한 개에 대한 GREA forward: mask -> GNN2 -> 분리 -> 제거/교체 예측 -> 손실
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from apps.gnn.encoder import encode
from apps.graphs.models import GraphBatch
from apps.rationale import losses
from apps.rationale.augment import env_replace, flatten_pairs, separate
from apps.rationale.models import PRED_GNN, AugConfig, ModelParams, RationaleMask, SeparatedReps
from apps.rationale.predictor import head_for, predict
from apps.rationale.separator import compute_mask, full_mask
from apps.tensor import ops
from apps.tensor.tensor import Tensor
from base.enums.base import MaskMode


@dataclass
class ForwardResult:
    mask: RationaleMask
    reps: SeparatedReps
    y_r: Tensor  # (B,)
    y_pair: Optional[Tensor] = None  # (B, B)
    l_rem: Optional[Tensor] = None
    l_rep: Optional[Tensor] = None
    l_reg: Optional[Tensor] = None
    l_pred: Optional[Tensor] = None
    l_sep: Optional[Tensor] = None

    def loss_values(self) -> dict:
        return {
            "rem": self.l_rem.item(),
            "rep": self.l_rep.item(),
            "reg": self.l_reg.item(),
        }


def rationale_pass(batch: GraphBatch, model: ModelParams,
                   mask_mode: str = MaskMode.LEARNED.value) -> ForwardResult:
    """추론 경로: 제거 예측 y_r 만 계산 (augmentation 없음)"""
    mask = full_mask(batch) if mask_mode == MaskMode.FULL.value else compute_mask(batch, model)
    H2 = encode(batch, model.pred_encoder, model.predictor, PRED_GNN)
    reps = separate(H2, mask, batch.num_graphs)
    y_r = predict(reps.h_r, head_for(model, reps.h_r.shape[1]))
    return ForwardResult(mask=mask, reps=reps, y_r=y_r)


def forward(batch: GraphBatch, model: ModelParams, aug: AugConfig,
            mask_mode: str = MaskMode.LEARNED.value, labels: Optional[np.ndarray] = None) -> ForwardResult:
    """
    학습용 전체 forward. labels 를 주지 않으면 batch.labels 사용.
    L_sep 는 separator, L_pred 는 predictor 학습에 쓴다.
    """
    y = batch.labels if labels is None else np.asarray(labels, dtype=np.float64)
    result = rationale_pass(batch, model, mask_mode)
    B = batch.num_graphs

    grid = flatten_pairs(env_replace(result.reps, aug.agg))
    y_pair = ops.reshape(predict(grid, head_for(model, grid.shape[1])), (B, B))

    result.y_pair = y_pair
    result.l_rem = losses.loss_rem(result.y_r, y, model.task)
    result.l_rep = losses.loss_rep(y_pair, y, model.task, include_diagonal=aug.diag_in_rep)
    result.l_reg = losses.loss_reg(result.mask, aug.gamma, aug.mask_count_threshold)
    result.l_pred = losses.loss_pred(result.l_rem, result.l_rep, aug.alpha)
    result.l_sep = losses.loss_sep(result.l_rem, result.l_rep, result.l_reg, aug.alpha, aug.beta)
    return result
