"""파라미터 묶음과 초기화"""
from collections import OrderedDict
from typing import Dict, Iterator, List, Tuple

import numpy as np

from apps.common.exceptions import ConfigError, ShapeError
from apps.tensor.tensor import Tensor, parameter


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    """U[-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))]"""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class ParamStore:
    """이름 -> 파라미터 텐서 (삽입 순서 유지)"""

    def __init__(self):
        self._params: "OrderedDict[str, Tensor]" = OrderedDict()

    def add(self, name: str, values) -> Tensor:
        if name in self._params:
            raise ConfigError(f"duplicate parameter {name!r}")
        tensor = parameter(values, name=name)
        self._params[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def named(self) -> List[Tuple[str, Tensor]]:
        return list(self._params.items())

    def tensors(self) -> List[Tensor]:
        return list(self._params.values())

    def zero_grad(self) -> None:
        for t in self._params.values():
            t.zero_grad()

    def set_trainable(self, trainable: bool) -> None:
        """False 면 연산 기록에서 상수 취급 (frozen)"""
        for t in self._params.values():
            t.grad_enabled = trainable

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self._params.items()}

    def load(self, values: Dict[str, np.ndarray]) -> None:
        missing = set(self._params) - set(values)
        if missing:
            raise ConfigError(f"missing parameters {sorted(missing)}")
        for name, t in self._params.items():
            arr = np.asarray(values[name], dtype=np.float64)
            if arr.shape != t.shape:
                raise ShapeError(f"{name}: {arr.shape} vs {t.shape}")
            t.assign(arr)

    def num_values(self) -> int:
        return int(sum(t.data.size for t in self._params.values()))


def add_linear(store: ParamStore, prefix: str, fan_in: int, fan_out: int, rng: np.random.Generator) -> None:
    """W 는 glorot, b 는 U[-1/sqrt(fan_in), 1/sqrt(fan_in)]"""
    store.add(f"{prefix}.W", glorot_uniform(fan_in, fan_out, rng))
    bound = 1.0 / np.sqrt(fan_in)
    store.add(f"{prefix}.b", rng.uniform(-bound, bound, size=(1, fan_out)))
