"""
배치 단위 메시지 패싱 레이어
배치는 block-diagonal 이므로 그래프끼리 메시지가 섞이지 않는다.
"""
from typing import Sequence, Tuple

from apps.common.exceptions import ShapeError
from apps.graphs.models import GraphBatch
from apps.tensor import ops
from apps.tensor.tensor import Tensor


def _check_rows(batch: GraphBatch, H: Tensor) -> None:
    if H.ndim != 2 or H.shape[0] != batch.num_nodes:
        raise ShapeError(f"H {H.shape} vs {batch.num_nodes} batch nodes")


def gcn_layer(batch: GraphBatch, H_in: Tensor, W: Tensor, activate: bool = True) -> Tensor:
    """relu( D^-1/2 (A+I) D^-1/2 H W ), activate=False 면 relu 생략 (마지막 레이어)"""
    _check_rows(batch, H_in)
    HW = ops.matmul(H_in, W)
    src, dst, weight = batch.gcn_propagation
    messages = ops.mul(Tensor.wrap(weight), ops.gather_rows(HW, src))
    out = ops.segment_sum(messages, dst, batch.num_nodes)
    return ops.relu(out) if activate else out


def neighbor_sum(batch: GraphBatch, H: Tensor) -> Tensor:
    src, dst = batch.directed_edges
    return ops.segment_sum(ops.gather_rows(H, src), dst, batch.num_nodes)


def mlp(x: Tensor, layers: Sequence[Tuple[Tensor, Tensor]]) -> Tensor:
    """affine 레이어 사이에만 relu, 마지막 출력은 선형"""
    for i, (W, b) in enumerate(layers):
        if W.shape[0] != x.shape[1]:
            raise ShapeError(f"mlp layer {i}: input width {x.shape[1]} vs {W.shape[0]}")
        x = ops.linear(x, W, b)
        if i < len(layers) - 1:
            x = ops.relu(x)
    return x


def gin_layer(batch: GraphBatch, H_in: Tensor, mlp_params: Sequence[Tuple[Tensor, Tensor]],
              eps: float = 0.0) -> Tensor:
    """MLP( (1+eps) h_v + sum_{u in N(v)} h_u )"""
    _check_rows(batch, H_in)
    self_term = H_in if eps == 0.0 else ops.scale(H_in, 1.0 + eps)
    return mlp(ops.add(self_term, neighbor_sum(batch, H_in)), mlp_params)
