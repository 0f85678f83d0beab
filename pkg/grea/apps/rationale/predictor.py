from typing import Sequence, Tuple

from apps.common.exceptions import ConfigError
from apps.gnn.layers import mlp
from apps.gnn.models import mlp_layers
from apps.rationale.models import PRED_HEAD, PRED_HEAD_CAT, ModelParams
from apps.tensor import ops
from apps.tensor.tensor import Tensor
from base.enums import errors


def predict(h: Tensor, pred_mlp: Sequence[Tuple[Tensor, Tensor]]) -> Tensor:
    """MLP2 를 행마다 적용. 분류는 logit, 회귀는 값. 결과 shape (n,)"""
    expected = pred_mlp[0][0].shape[0]
    if h.ndim != 2 or h.shape[1] != expected:
        raise ConfigError(
            f"input width {h.shape[-1]} vs predictor width {expected} (check agg / MLP2)",
            error=errors.E003_PREDICTOR_WIDTH,
        )
    out = mlp(h, pred_mlp)
    return ops.reshape(out, (out.shape[0],))


def head_for(model: ModelParams, width: int):
    """d 폭이면 기본 head (추론 포함), 2d 폭이면 concat 전용 head"""
    d = model.pred_encoder.hidden_dim
    if width == d:
        return mlp_layers(model.predictor, PRED_HEAD)
    if width == 2 * d and f"{PRED_HEAD_CAT}.0.W" in model.predictor:
        return mlp_layers(model.predictor, PRED_HEAD_CAT)
    raise ConfigError(
        f"no predictor head for width {width} (agg={model.agg}, d={d})",
        error=errors.E003_PREDICTOR_WIDTH,
    )
