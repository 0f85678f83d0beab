"""
교대 학습

한 round = separator 단계 T_sep 에폭 (L_sep, predictor 고정) + predictor 단계 T_pred 에폭 (L_pred, separator 고정).
에폭마다 검증 지표를 계산하고 가장 좋은 에폭의 파라미터를 돌려준다.
"""
import logging
import time
from typing import Optional, Sequence, Tuple

import numpy as np

from apps.common.exceptions import ConfigError, NumericalError
from apps.graphs.batching import make_batches
from apps.graphs.models import DatasetSplit, Graph
from apps.rationale.models import ModelParams
from apps.rationale.pipeline import forward
from apps.rationale.separator import rationale_fraction
from apps.tensor.params import ParamStore
from apps.tensor.tensor import Tape, backward
from apps.trainer.evaluation import evaluate, targets_for
from apps.trainer.models import EpochRecord, OptimizerState, RunHistory, TrainConfig
from apps.trainer.optim import adam_step
from base.enums import errors
from base.enums.base import MaskMode, Phase, Task

logger = logging.getLogger(__name__)


class AlternatingTrainer:
    def __init__(self, graphs: Sequence[Graph], splits: DatasetSplit, config: TrainConfig):
        if not splits.train:
            raise ConfigError("train split is empty", error=errors.E004_EMPTY_TRAIN_SPLIT)
        if config.batch_size < 2:
            raise ConfigError(f"batch_size={config.batch_size}; training needs >= 2",
                              error=errors.E002_INVALID_BATCH_SIZE)
        self.graphs = graphs
        self.splits = splits
        self.config = config
        self.aug = config.aug_config()
        self.targets = np.full(len(graphs), np.nan)
        self.targets[splits.train] = targets_for(graphs, splits.train, config.task, config.log_target)

        sep_cfg, pred_cfg = config.encoder_configs(graphs[splits.train[0]].feature_dim)
        self.model = ModelParams.initialize(sep_cfg, pred_cfg, config.agg, config.task, config.seed)
        self.optimizers = {Phase.SEPARATOR.value: OptimizerState(), Phase.PREDICTOR.value: OptimizerState()}
        self.use_valid = self._valid_usable()
        if self.use_valid:
            name = "valid_auc" if config.task == Task.BINARY.value else "valid_rmse"
            self.history = RunHistory(metric_name=name, higher_is_better=config.task == Task.BINARY.value)
        else:
            logger.warning("validation metric unavailable, selecting checkpoints by training loss")
            self.history = RunHistory(metric_name="train_loss", higher_is_better=False)
        self.epoch = 0
        self.best_snapshot = None

    def _valid_usable(self) -> bool:
        valid = self.splits.valid
        if not valid:
            return False
        if self.config.task == Task.BINARY.value:
            labels = {self.graphs[i].label for i in valid}
            return labels == {0.0, 1.0}
        return len({self.graphs[i].label for i in valid}) > 1

    def _phase_store(self, phase: str) -> ParamStore:
        return self.model.separator if phase == Phase.SEPARATOR.value else self.model.predictor

    def _set_phase(self, phase: Optional[str]) -> None:
        """phase 가 None 이면 두 쪽 모두 학습 가능 상태로 되돌린다."""
        self.model.separator.set_trainable(phase in (None, Phase.SEPARATOR.value))
        self.model.predictor.set_trainable(phase in (None, Phase.PREDICTOR.value))

    def run_epoch(self, phase: str, round_no: int) -> EpochRecord:
        config = self.config
        started = time.perf_counter()
        store = self._phase_store(phase)
        params = store.tensors()
        optimizer = self.optimizers[phase]
        self._set_phase(phase)

        totals = np.zeros(4)
        fractions = []
        seen = 0
        batches = make_batches(self.graphs, config.batch_size, shuffle_seed=config.seed,
                               indices=self.splits.train, stream=self.epoch)
        for batch in batches:
            labels = self.targets[list(batch.graph_indices)]
            store.zero_grad()
            with Tape():
                result = forward(batch, self.model, self.aug, config.mask_mode, labels=labels)
                loss = result.l_sep if phase == Phase.SEPARATOR.value else result.l_pred
                value = loss.item()
                if not np.isfinite(value):
                    raise NumericalError(f"loss={value}", phase=phase, epoch=self.epoch)
                backward(loss)
            adam_step(params, [p.grad for p in params], optimizer, config.learning_rate)
            store.zero_grad()

            parts = result.loss_values()
            totals += batch.num_graphs * np.array([parts["rem"], parts["rep"], parts["reg"], value])
            fractions.extend(rationale_fraction(result.mask, config.mask_threshold).tolist())
            seen += batch.num_graphs

        self._set_phase(None)
        rem, rep, reg, objective = (totals / seen).tolist()
        if self.use_valid:
            metrics = evaluate(self.model, self.graphs, self.splits.valid, config.task, config.mask_mode,
                               config.log_target, config.mask_threshold)
            valid_metric = metrics.primary(config.task)
        else:
            valid_metric = objective
        record = EpochRecord(
            epoch=self.epoch, round=round_no, phase=phase,
            loss_rem=rem, loss_rep=rep, loss_reg=reg, objective=objective,
            valid_metric=valid_metric, rationale_fraction=float(np.mean(fractions)),
            wall_time=time.perf_counter() - started,
        )
        self.history.append(record)
        if self.history.is_better(valid_metric):
            self.history.best_metric = valid_metric
            self.history.best_epoch = self.epoch
            self.best_snapshot = self.model.snapshot()
        logger.info(
            "round %d epoch %d [%s] rem=%.4f rep=%.4f reg=%.4f %s=%s",
            round_no, self.epoch, phase, rem, rep, reg, self.history.metric_name,
            "nan" if valid_metric is None else f"{valid_metric:.4f}",
        )
        self.epoch += 1
        return record

    def fit(self) -> Tuple[ModelParams, RunHistory]:
        config = self.config
        stale_rounds = 0
        for round_no in range(config.num_rounds):
            best_before = self.history.best_epoch
            if config.mask_mode == MaskMode.LEARNED.value:
                for _ in range(config.t_sep):
                    self.run_epoch(Phase.SEPARATOR.value, round_no)
            for _ in range(config.t_pred):
                self.run_epoch(Phase.PREDICTOR.value, round_no)
            stale_rounds = 0 if self.history.best_epoch != best_before else stale_rounds + 1
            if stale_rounds >= config.patience:
                logger.info("no improvement for %d rounds, stopping at round %d", stale_rounds, round_no)
                self.history.stopped_early = True
                break
        if self.best_snapshot is not None:
            self.model.load(self.best_snapshot)
        return self.model, self.history


def train(graphs: Sequence[Graph], splits: DatasetSplit, config: TrainConfig) -> Tuple[ModelParams, RunHistory]:
    return AlternatingTrainer(graphs, splits, config).fit()
