"""
latent space 에서의 rationale/environment 분리와 environment replacement

sum pooling 기준 h_r + h_e = 전체 그래프 sum readout (m + (1-m) = 1).
"""
import numpy as np

from apps.common.exceptions import ConfigError, ShapeError
from apps.rationale.models import RationaleMask, SeparatedReps
from apps.tensor import ops
from apps.tensor.tensor import Tensor
from base.enums import errors
from base.enums.base import Aggregation


def separate(H: Tensor, mask: RationaleMask, num_graphs: int) -> SeparatedReps:
    """h_r[i] = sum_v m_v H_v, h_e[i] = sum_v (1 - m_v) H_v (그래프 i 의 노드 v)"""
    if H.shape[0] != mask.m.shape[0]:
        raise ShapeError(f"H rows {H.shape[0]} vs mask {mask.m.shape[0]}")
    m = mask.m
    h_r = ops.segment_sum(ops.mul(m, H), mask.segments, num_graphs)
    h_e = ops.segment_sum(ops.mul(ops.sub(1.0, m), H), mask.segments, num_graphs)
    return SeparatedReps(h_r, h_e)


def pair_index(num_graphs: int):
    """(i, j) 를 i * B + j 순서로 펼친 인덱스"""
    rows = np.repeat(np.arange(num_graphs), num_graphs)
    cols = np.tile(np.arange(num_graphs), num_graphs)
    return rows, cols


def combine(h_r: Tensor, h_e: Tensor, agg: str) -> Tensor:
    """행 단위 AGG(h_r, h_e)"""
    if agg == Aggregation.SUM.value:
        return ops.add(h_r, h_e)
    if agg == Aggregation.MEAN.value:
        return ops.scale(ops.add(h_r, h_e), 0.5)
    if agg == Aggregation.MAX.value:
        return ops.maximum(h_r, h_e)
    if agg == Aggregation.CONCAT.value:
        return ops.concat_rows(h_r, h_e)
    raise ConfigError(f"agg={agg!r}", error=errors.E003_UNKNOWN_AGG)


def env_replace(reps: SeparatedReps, agg: str = Aggregation.SUM.value) -> Tensor:
    """
    모든 (i, j) 에 대해 AGG(h_r[i], h_e[j]), j = i 포함.
    결과 shape (B, B, d), concat 이면 (B, B, 2d)
    """
    B = reps.num_graphs
    if B < 1:
        raise ShapeError("empty reps")
    rows, cols = pair_index(B)
    pairs = combine(ops.gather_rows(reps.h_r, rows), ops.gather_rows(reps.h_e, cols), agg)
    return ops.reshape(pairs, (B, B, pairs.shape[1]))


def flatten_pairs(grid: Tensor) -> Tensor:
    B1, B2, width = grid.shape
    return ops.reshape(grid, (B1 * B2, width))
