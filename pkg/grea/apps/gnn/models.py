from dataclasses import dataclass

import numpy as np

from apps.common.exceptions import ConfigError
from apps.tensor.params import ParamStore, add_linear, glorot_uniform
from base.enums.base import EncoderKind, choices


@dataclass(frozen=True)
class EncoderConfig:
    kind: str = EncoderKind.GIN.value
    num_layers: int = 2
    hidden_dim: int = 64
    in_dim: int = 1
    activation: str = "relu"
    gin_eps: float = 0.0  # 학습하지 않는 상수

    def __post_init__(self):
        if self.kind not in choices(EncoderKind):
            raise ConfigError(f"encoder kind {self.kind!r}")
        if self.num_layers < 1 or self.hidden_dim < 1 or self.in_dim < 1:
            raise ConfigError(f"layers={self.num_layers} dim={self.hidden_dim} in={self.in_dim}")
        if self.activation != "relu":
            raise ConfigError(f"activation {self.activation!r}")


def init_encoder(store: ParamStore, prefix: str, config: EncoderConfig, rng: np.random.Generator) -> None:
    """
    {prefix}.proj.W/b : F -> d 입력 투영
    GCN: {prefix}.layers.{l}.W
    GIN: {prefix}.layers.{l}.mlp.0.W/b, {prefix}.layers.{l}.mlp.1.W/b
    """
    d = config.hidden_dim
    add_linear(store, f"{prefix}.proj", config.in_dim, d, rng)
    for layer in range(config.num_layers):
        if config.kind == EncoderKind.GCN.value:
            store.add(f"{prefix}.layers.{layer}.W", glorot_uniform(d, d, rng))
        else:
            add_linear(store, f"{prefix}.layers.{layer}.mlp.0", d, d, rng)
            add_linear(store, f"{prefix}.layers.{layer}.mlp.1", d, d, rng)


def init_mlp(store: ParamStore, prefix: str, dims, rng: np.random.Generator) -> None:
    """dims = [in, hidden..., out] -> {prefix}.{i}.W/b"""
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        add_linear(store, f"{prefix}.{i}", fan_in, fan_out, rng)


def mlp_layers(store: ParamStore, prefix: str):
    layers = []
    i = 0
    while f"{prefix}.{i}.W" in store:
        layers.append((store[f"{prefix}.{i}.W"], store[f"{prefix}.{i}.b"]))
        i += 1
    return layers