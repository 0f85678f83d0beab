import json
import os
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from django.conf import settings


# =========================
# 설정값 로더 (기본값 포함)
# =========================
def get_setting(name: str, default: Any = None) -> Any:
    """settings.GREA 딕셔너리에서 값을 읽는다. 없으면 default."""
    return getattr(settings, "GREA", {}).get(name, default)


def resolve_seed(seed: Optional[int] = None) -> int:
    """--seed > 설정 파일 seed > GREA_SEED 환경변수 순서"""
    if seed is not None:
        return int(seed)
    return int(getattr(settings, "GREA_SEED", 0))


def make_rng(seed: int, *streams: int) -> np.random.Generator:
    """
    seed 와 stream 번호로 독립된 난수 생성기를 만든다.
    같은 (seed, streams) 면 항상 같은 수열.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(s) for s in streams]]))


# =========================
# JSON 입출력
# =========================
def dump_json(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_json(obj: Any, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, indent=2)
        f.write("\n")


def read_json(path: Union[str, Path]) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def ensure_parent(path: Union[str, Path]) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
