"""
학습 설정 / optimizer 상태 / 학습 기록
"""
import dataclasses
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from apps.common.exceptions import ConfigError
from apps.common.utils import get_setting, resolve_seed
from apps.gnn.models import EncoderConfig
from apps.rationale.models import AugConfig
from base.enums.base import Aggregation, EncoderKind, MaskMode, Task, choices

# TrainConfig 필드 -> settings.GREA 키
SETTING_KEYS = {
    "alpha": "ALPHA",
    "beta": "BETA",
    "gamma": "GAMMA",
    "agg": "AGG",
    "t_sep": "T_SEP",
    "t_pred": "T_PRED",
    "num_rounds": "NUM_ROUNDS",
    "patience": "PATIENCE",
    "learning_rate": "LEARNING_RATE",
    "batch_size": "BATCH_SIZE",
    "sep_dim": "SEP_DIM",
    "pred_dim": "PRED_DIM",
    "sep_layers": "SEP_LAYERS",
    "pred_layers": "PRED_LAYERS",
    "encoder": "ENCODER",
    "sep_encoder": "SEP_ENCODER",
    "task": "TASK",
    "mask_threshold": "MASK_THRESHOLD",
    "diag_in_rep": "DIAG_IN_REP",
    "log_target": "LOG_TARGET",
    "mask_mode": "MASK_MODE",
}


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 1.0
    beta: float = 0.1
    gamma: float = 0.4
    agg: str = Aggregation.SUM.value
    t_sep: int = 1
    t_pred: int = 2
    num_rounds: int = 20
    patience: int = 10
    learning_rate: float = 0.005
    batch_size: int = 32
    sep_dim: int = 64
    pred_dim: int = 64
    sep_layers: int = 2
    pred_layers: int = 3
    encoder: str = EncoderKind.GIN.value
    sep_encoder: Optional[str] = None  # None 이면 encoder 와 같은 종류
    task: str = Task.BINARY.value
    seed: int = 0
    mask_threshold: float = 0.5
    diag_in_rep: bool = True
    log_target: bool = False
    mask_mode: str = MaskMode.LEARNED.value

    def __post_init__(self):
        problems = []
        if self.t_sep < 1 or self.t_pred < 1:
            problems.append(f"t_sep={self.t_sep} t_pred={self.t_pred} must be >= 1")
        if self.num_rounds < 1 or self.patience < 1:
            problems.append(f"num_rounds={self.num_rounds} patience={self.patience} must be >= 1")
        if not self.learning_rate > 0:
            problems.append(f"learning_rate={self.learning_rate}")
        if self.batch_size < 1:
            problems.append(f"batch_size={self.batch_size}")
        if min(self.sep_dim, self.pred_dim, self.sep_layers, self.pred_layers) < 1:
            problems.append("dims and layer counts must be >= 1")
        if self.encoder not in choices(EncoderKind):
            problems.append(f"encoder={self.encoder!r}")
        if self.sep_encoder is not None and self.sep_encoder not in choices(EncoderKind):
            problems.append(f"sep_encoder={self.sep_encoder!r}")
        if self.task not in choices(Task):
            problems.append(f"task={self.task!r}")
        if self.mask_mode not in choices(MaskMode):
            problems.append(f"mask_mode={self.mask_mode!r}")
        if self.log_target and self.task != Task.REGRESSION.value:
            problems.append("log_target requires task=regression")
        if problems:
            raise ConfigError("; ".join(problems))
        # agg / alpha / beta / gamma 검증은 AugConfig 에 맡긴다
        self.aug_config()

    @classmethod
    def from_settings(cls, **overrides) -> "TrainConfig":
        """settings.GREA 기본값 위에 overrides 적용. seed 는 GREA_SEED 로 대체."""
        values = {}
        for name, key in SETTING_KEYS.items():
            value = get_setting(key, None)
            if value is not None or name == "sep_encoder":
                values[name] = value
        values["seed"] = resolve_seed(None)
        values.update({k: v for k, v in overrides.items() if v is not None or k == "sep_encoder"})
        unknown = set(values) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**values)

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def aug_config(self) -> AugConfig:
        return AugConfig(
            agg=self.agg, alpha=self.alpha, beta=self.beta, gamma=self.gamma,
            mask_count_threshold=self.mask_threshold, diag_in_rep=self.diag_in_rep,
        )

    def encoder_configs(self, in_dim: int) -> Tuple[EncoderConfig, EncoderConfig]:
        sep = EncoderConfig(kind=self.sep_encoder or self.encoder, num_layers=self.sep_layers,
                            hidden_dim=self.sep_dim, in_dim=in_dim)
        pred = EncoderConfig(kind=self.encoder, num_layers=self.pred_layers,
                             hidden_dim=self.pred_dim, in_dim=in_dim)
        return sep, pred


@dataclass
class OptimizerState:
    """파라미터 이름별 1차/2차 moment"""
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


@dataclass
class EpochRecord:
    epoch: int
    round: int
    phase: str
    loss_rem: float
    loss_rep: float
    loss_reg: float
    objective: float
    valid_metric: Optional[float]
    rationale_fraction: float
    wall_time: float = 0.0

    def to_dict(self, include_timings: bool = False) -> dict:
        data = dataclasses.asdict(self)
        if not include_timings:
            data.pop("wall_time")
        return data


@dataclass
class RunHistory:
    """
    metric_name: valid_auc / valid_rmse / train_loss (검증 지표를 못 구할 때)
    best_epoch 는 반환된 파라미터를 만든 에폭
    """
    metric_name: str
    higher_is_better: bool
    epochs: List[EpochRecord] = field(default_factory=list)
    best_epoch: Optional[int] = None
    best_metric: Optional[float] = None
    stopped_early: bool = False

    def append(self, record: EpochRecord) -> None:
        if self.epochs and record.epoch <= self.epochs[-1].epoch:
            raise ConfigError(f"epoch {record.epoch} after {self.epochs[-1].epoch}")
        self.epochs.append(record)

    def is_better(self, value: Optional[float]) -> bool:
        if value is None or not np.isfinite(value):
            return False
        if self.best_metric is None:
            return True
        return value > self.best_metric if self.higher_is_better else value < self.best_metric

    def to_dict(self, include_timings: bool = False) -> dict:
        return {
            "metric_name": self.metric_name,
            "higher_is_better": self.higher_is_better,
            "best_epoch": self.best_epoch,
            "best_metric": self.best_metric,
            "stopped_early": self.stopped_early,
            "epochs": [e.to_dict(include_timings) for e in self.epochs],
        }
