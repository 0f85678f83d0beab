"""
rationale / environment 분리에 쓰이는 자료형과 모델 파라미터
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from apps.common.exceptions import ConfigError
from apps.common.utils import make_rng
from apps.gnn.models import EncoderConfig, init_encoder, init_mlp
from apps.tensor.params import ParamStore
from apps.tensor.tensor import Tensor
from base.enums import errors
from base.enums.base import Aggregation, Task, choices

SEP_GNN = "sep.gnn"
SEP_MLP = "sep.mlp"
PRED_GNN = "pred.gnn"
PRED_HEAD = "pred.head"
PRED_HEAD_CAT = "pred.head_cat"


@dataclass(frozen=True)
class RationaleMask:
    """
    m: (N, 1) 노드별 rationale 확률 (sigmoid 출력이라 (0,1) 안에 있음)
    segments 는 배치와 공유
    """
    m: Tensor
    segments: np.ndarray
    num_graphs: int

    @property
    def values(self) -> np.ndarray:
        return self.m.data.reshape(-1)

    def per_graph(self):
        seg = np.asarray(self.segments)
        return [self.values[seg == i] for i in range(self.num_graphs)]


@dataclass(frozen=True)
class SeparatedReps:
    h_r: Tensor  # (B, d)
    h_e: Tensor  # (B, d)

    @property
    def num_graphs(self) -> int:
        return self.h_r.shape[0]


@dataclass(frozen=True)
class AugConfig:
    agg: str = Aggregation.SUM.value
    alpha: float = 1.0
    beta: float = 0.1
    gamma: float = 0.4
    mask_count_threshold: float = 0.5
    diag_in_rep: bool = True

    def __post_init__(self):
        if self.agg not in choices(Aggregation):
            raise ConfigError(f"agg={self.agg!r}", error=errors.E003_UNKNOWN_AGG)
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError(f"alpha={self.alpha} beta={self.beta} must be >= 0")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma={self.gamma} must be in [0, 1]")


class ModelParams:
    """
    separator: GNN1 + MLP1 (노드 -> 스칼라 logit)
    predictor: GNN2 + MLP2 (d2 -> 1), concat 이면 2*d2 입력 head 를 하나 더 둔다 (가중치 공유 없음)
    """

    def __init__(self, sep_encoder: EncoderConfig, pred_encoder: EncoderConfig, agg: str, task: str,
                 separator: Optional[ParamStore] = None, predictor: Optional[ParamStore] = None):
        if task not in choices(Task):
            raise ConfigError(f"task={task!r}")
        self.sep_encoder = sep_encoder
        self.pred_encoder = pred_encoder
        self.agg = agg
        self.task = task
        self.separator = separator if separator is not None else ParamStore()
        self.predictor = predictor if predictor is not None else ParamStore()

    @classmethod
    def initialize(cls, sep_encoder: EncoderConfig, pred_encoder: EncoderConfig, agg: str, task: str,
                   seed: int) -> "ModelParams":
        model = cls(sep_encoder, pred_encoder, agg, task)
        d1, d2 = sep_encoder.hidden_dim, pred_encoder.hidden_dim
        init_encoder(model.separator, SEP_GNN, sep_encoder, make_rng(seed, 10))
        init_mlp(model.separator, SEP_MLP, [d1, d1, 1], make_rng(seed, 11))
        init_encoder(model.predictor, PRED_GNN, pred_encoder, make_rng(seed, 20))
        init_mlp(model.predictor, PRED_HEAD, [d2, d2, 1], make_rng(seed, 21))
        if agg == Aggregation.CONCAT.value:
            init_mlp(model.predictor, PRED_HEAD_CAT, [2 * d2, d2, 1], make_rng(seed, 22))
        return model

    @property
    def feature_dim(self) -> int:
        return self.pred_encoder.in_dim

    def stores(self):
        return [("separator", self.separator), ("predictor", self.predictor)]

    def zero_grad(self) -> None:
        self.separator.zero_grad()
        self.predictor.zero_grad()

    def snapshot(self) -> dict:
        return {"separator": self.separator.snapshot(), "predictor": self.predictor.snapshot()}

    def load(self, snapshot: dict) -> None:
        self.separator.load(snapshot["separator"])
        self.predictor.load(snapshot["predictor"])
