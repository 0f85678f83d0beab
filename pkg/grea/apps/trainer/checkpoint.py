"""
체크포인트 (JSON)

{"format": "GREA-CKPT-1", "feature_dim": F, "config": {...TrainConfig},
 "params": {"separator": {name: {"shape": [...], "values": [...]}}, "predictor": {...}}}
float 는 repr 로 저장되어 다시 읽으면 비트 단위로 같다.
"""
import logging
import os
from typing import Tuple

import numpy as np

from apps.common.exceptions import ConfigError, DataFormatError
from apps.common.utils import ensure_parent, get_setting, read_json, write_json
from apps.rationale.models import ModelParams
from apps.trainer.models import TrainConfig
from base.enums import errors

logger = logging.getLogger(__name__)


def checkpoint_header() -> str:
    return get_setting("CHECKPOINT_HEADER", "GREA-CKPT-1")


def save_checkpoint(path, model: ModelParams, config: TrainConfig) -> None:
    payload = {
        "format": checkpoint_header(),
        "feature_dim": model.feature_dim,
        "config": config.to_dict(),
        "params": {
            group: {
                name: {"shape": list(t.shape), "values": t.data.ravel().tolist()}
                for name, t in store.named()
            }
            for group, store in model.stores()
        },
    }
    ensure_parent(path)
    write_json(payload, path)
    logger.info("checkpoint written to %s", path)


def load_checkpoint(path) -> Tuple[ModelParams, TrainConfig]:
    if not os.path.exists(path):
        raise DataFormatError(str(path), error=errors.E002_FILE_NOT_FOUND)
    try:
        payload = read_json(path)
    except ValueError as e:
        raise ConfigError(f"{path}: {e}", error=errors.E003_INVALID_CHECKPOINT)
    if not isinstance(payload, dict) or payload.get("format") != checkpoint_header():
        raise ConfigError(f"{path}: missing {checkpoint_header()} header", error=errors.E003_INVALID_CHECKPOINT)

    try:
        config = TrainConfig(**payload["config"])
        sep_cfg, pred_cfg = config.encoder_configs(int(payload["feature_dim"]))
        model = ModelParams.initialize(sep_cfg, pred_cfg, config.agg, config.task, config.seed)
        for group, store in model.stores():
            stored = payload["params"][group]
            store.load({
                name: np.asarray(entry["values"], dtype=np.float64).reshape(entry["shape"])
                for name, entry in stored.items()
            })
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}", error=errors.E003_INVALID_CHECKPOINT)
    return model, config
