"""
latent augmentation vs explicit 재인코딩 비교

latent: 배치를 한 번 인코딩하고 B x B 쌍을 벡터 결합으로 만든다.
explicit: 쌍마다 g_i 와 g_j 의 합집합 그래프를 GNN2 로 다시 인코딩한 뒤 가중 pooling.
sum agg 에서 두 경로는 수치 오차 안에서 같아야 한다.
"""
import csv
import io
import logging
import statistics
import time
from typing import Callable, List, Optional, Sequence

import numpy as np

from apps.bench.models import CSV_COLUMNS, BenchReport, BenchRow
from apps.common.exceptions import ConfigError
from apps.gnn.encoder import encode
from apps.graphs.models import Graph, GraphBatch, disjoint_union
from apps.rationale.augment import env_replace, separate
from apps.rationale.models import PRED_GNN, ModelParams, RationaleMask
from apps.rationale.separator import compute_mask
from apps.tensor import ops
from apps.tensor.tensor import Tensor, no_grad
from apps.trainer.models import TrainConfig
from base.enums.base import Aggregation

logger = logging.getLogger(__name__)


def explicit_pair_rep(g_i: Graph, g_j: Graph, m_i: np.ndarray, m_j: np.ndarray, model: ModelParams) -> np.ndarray:
    """union(g_i, g_j) 를 인코딩하고 (m_i, 1 - m_j) 가중치로 sum pooling 한 벡터 (d,)"""
    union = GraphBatch.from_graphs([disjoint_union(g_i, g_j)])
    H = encode(union, model.pred_encoder, model.predictor, PRED_GNN)
    weights = np.concatenate([np.asarray(m_i, dtype=np.float64), 1.0 - np.asarray(m_j, dtype=np.float64)])
    pooled = ops.segment_sum(ops.mul(Tensor.wrap(weights.reshape(-1, 1)), H), np.zeros(union.num_nodes), 1)
    return pooled.data[0]


def latent_grid(batch: GraphBatch, masks: Tensor, model: ModelParams) -> np.ndarray:
    H = encode(batch, model.pred_encoder, model.predictor, PRED_GNN)
    reps = separate(H, RationaleMask(masks, batch.segments, batch.num_graphs), batch.num_graphs)
    return env_replace(reps, Aggregation.SUM.value).data


def explicit_grid(graphs: Sequence[Graph], per_graph_masks: List[np.ndarray], model: ModelParams) -> np.ndarray:
    B = len(graphs)
    grid = np.zeros((B, B, model.pred_encoder.hidden_dim))
    for i in range(B):
        for j in range(B):
            grid[i, j] = explicit_pair_rep(graphs[i], graphs[j], per_graph_masks[i], per_graph_masks[j], model)
    return grid


def _median_ms(fn: Callable[[], object], reps: int, warmup: int) -> float:
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(reps):
        started = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - started) * 1000.0)
    return statistics.median(samples)


def default_model(feature_dim: int, seed: int) -> ModelParams:
    config = TrainConfig.from_settings(seed=seed)
    sep_cfg, pred_cfg = config.encoder_configs(feature_dim)
    return ModelParams.initialize(sep_cfg, pred_cfg, Aggregation.SUM.value, config.task, config.seed)


def run_bench(graphs: Sequence[Graph], batch_sizes: Sequence[int], reps: int = 3,
              model: Optional[ModelParams] = None, seed: int = 0, warmup: int = 1) -> BenchReport:
    """
    B 마다 앞에서부터 B 개 그래프를 한 배치로 쓴다.
    시간은 mask 계산 이후의 쌍 표현 생성만 잰다 (두 경로 모두 mask 가 필요하므로).
    """
    if not batch_sizes or min(batch_sizes) < 1:
        raise ConfigError(f"batch sizes {list(batch_sizes)}")
    if max(batch_sizes) > len(graphs):
        raise ConfigError(f"dataset has {len(graphs)} graphs, largest batch is {max(batch_sizes)}")
    if reps < 1:
        raise ConfigError(f"reps={reps}")
    model = model or default_model(graphs[0].feature_dim, seed)

    report = BenchReport(reps=reps)
    with no_grad():
        for B in batch_sizes:
            subset = list(graphs[:B])
            batch = GraphBatch.from_graphs(subset)
            mask = compute_mask(batch, model)
            per_graph = mask.per_graph()

            latent = latent_grid(batch, mask.m, model)
            explicit = explicit_grid(subset, per_graph, model)
            deviation = float(np.max(np.abs(latent - explicit)))

            t_latent = _median_ms(lambda: latent_grid(batch, mask.m, model), reps, warmup)
            t_explicit = _median_ms(lambda: explicit_grid(subset, per_graph, model), reps, warmup)
            row = BenchRow(B=B, t_latent_ms=t_latent, t_explicit_ms=t_explicit, max_abs_dev=deviation)
            logger.info("B=%d latent=%.2fms explicit=%.2fms dev=%.2e speedup=%.1fx",
                        B, t_latent, t_explicit, deviation, row.speedup)
            report.rows.append(row)
    return report


def report_to_csv(report: BenchReport) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in report.rows:
        writer.writerow(row.to_dict())
    return buffer.getvalue()
