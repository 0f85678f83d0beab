"""
실행 설정 파일 로딩

우선순위: --seed 플래그 > 설정 파일 seed > GREA_SEED
--set key=value 는 파일 값을 덮어쓴다 (key 에 '.' 이 있으면 중첩, 예: synthetic.num_graphs=50).
"""
import json
import os
from typing import Iterable, Optional

from apps.common.exceptions import ConfigError, DataFormatError
from apps.common.utils import get_setting, read_json, resolve_seed
from apps.graphs.models import SyntheticSpec
from apps.trainer.models import TrainConfig
from apps.trainer.serializers import RunConfigSerializer, TrainConfigSerializer
from base.enums import errors


def parse_overrides(items: Optional[Iterable[str]]) -> dict:
    overrides = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            value = json.loads(raw)
        except ValueError:
            value = raw
        target = overrides
        *parents, leaf = key.split(".")
        for part in parents:
            target = target.setdefault(part, {})
        target[leaf] = value
    return overrides


def merge_config(base: dict, extra: dict) -> dict:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged


def validate_run_config(raw: dict) -> dict:
    serializer = RunConfigSerializer(data=raw)
    if not serializer.is_valid():
        raise ConfigError(json.dumps(serializer.errors, ensure_ascii=False, default=str))
    return dict(serializer.validated_data)


def read_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise DataFormatError(str(path), error=errors.E002_FILE_NOT_FOUND)
    try:
        raw = read_json(path)
    except ValueError as e:
        raise ConfigError(f"{path}: {e}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return raw


def load_run_config(path: Optional[str], overrides: Optional[Iterable[str]] = None) -> dict:
    raw = read_config_file(path) if path else {}
    return validate_run_config(merge_config(raw, parse_overrides(overrides)))


def train_config_from(run_config: dict, seed: Optional[int] = None) -> TrainConfig:
    keys = set(TrainConfigSerializer().fields)
    config = TrainConfig.from_settings(**{k: v for k, v in run_config.items() if k in keys})
    return config.replace(seed=int(seed)) if seed is not None else config


def split_ratios_from(run_config: dict):
    return tuple(run_config.get("split_ratios") or get_setting("SPLIT_RATIOS", (0.6, 0.1, 0.3)))


def synthetic_spec_from(run_config: dict, seed: Optional[int] = None) -> SyntheticSpec:
    values = dict(run_config.get("synthetic") or {})
    for key in ("base_size", "base_kinds", "motif_kinds", "split_ratios"):
        if key in values:
            values[key] = tuple(values[key])
    if seed is not None:
        values["seed"] = int(seed)
    elif "seed" not in values and "seed" in run_config:
        values["seed"] = int(run_config["seed"])
    values.setdefault("seed", resolve_seed(None))
    values.setdefault("split_ratios", split_ratios_from(run_config))
    return SyntheticSpec(**values)
