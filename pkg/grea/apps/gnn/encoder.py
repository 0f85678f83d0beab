from apps.common.exceptions import ConfigError, ShapeError
from apps.gnn.layers import gcn_layer, gin_layer
from apps.gnn.models import EncoderConfig, mlp_layers
from apps.graphs.models import GraphBatch
from apps.tensor import ops
from apps.tensor.params import ParamStore
from apps.tensor.tensor import Tensor
from base.enums.base import EncoderKind, Readout


def encode(batch: GraphBatch, config: EncoderConfig, params: ParamStore, prefix: str) -> Tensor:
    """입력 투영 후 L 개의 메시지 패싱 레이어. 레이어 사이에는 relu, 마지막 레이어 출력은 선형."""
    if batch.features.shape[1] != config.in_dim:
        raise ShapeError(f"feature width {batch.features.shape[1]} vs encoder in_dim {config.in_dim}")
    H = ops.linear(Tensor.wrap(batch.features), params[f"{prefix}.proj.W"], params[f"{prefix}.proj.b"])
    last = config.num_layers - 1
    for layer in range(config.num_layers):
        if config.kind == EncoderKind.GCN.value:
            H = gcn_layer(batch, H, params[f"{prefix}.layers.{layer}.W"], activate=layer < last)
        else:
            H = gin_layer(batch, H, mlp_layers(params, f"{prefix}.layers.{layer}.mlp"), eps=config.gin_eps)
            if layer < last:
                H = ops.relu(H)
    return H


def readout(H: Tensor, segments, num_graphs: int, mode: str = Readout.SUM.value) -> Tensor:
    if mode == Readout.SUM.value:
        return ops.segment_sum(H, segments, num_graphs)
    if mode == Readout.MEAN.value:
        return ops.segment_mean(H, segments, num_graphs)
    if mode == Readout.MAX.value:
        return ops.segment_max(H, segments, num_graphs)
    raise ConfigError(f"readout mode {mode!r}")
