import numpy as np

from apps.gnn.encoder import encode
from apps.gnn.layers import mlp
from apps.gnn.models import mlp_layers
from apps.graphs.models import GraphBatch
from apps.rationale.models import SEP_GNN, SEP_MLP, ModelParams, RationaleMask
from apps.tensor import ops
from apps.tensor.tensor import Tensor


def compute_mask(batch: GraphBatch, model: ModelParams) -> RationaleMask:
    """m = sigmoid(MLP1(GNN1(g))), 노드마다 하나의 확률"""
    H1 = encode(batch, model.sep_encoder, model.separator, SEP_GNN)
    logits = mlp(H1, mlp_layers(model.separator, SEP_MLP))
    return RationaleMask(ops.sigmoid(logits), batch.segments, batch.num_graphs)


def full_mask(batch: GraphBatch) -> RationaleMask:
    """separator 없이 모든 노드를 rationale 로 보는 m = 1 (sigmoid 의 극한)"""
    return RationaleMask(Tensor.wrap(np.ones((batch.num_nodes, 1))), batch.segments, batch.num_graphs)


def rationale_fraction(mask: RationaleMask, threshold: float = 0.5) -> np.ndarray:
    """그래프별 m > threshold 인 노드 비율 (모니터링용)"""
    seg = np.asarray(mask.segments)
    selected = (mask.values > threshold).astype(np.float64)
    counts = np.bincount(seg, minlength=mask.num_graphs).astype(np.float64)
    hits = np.bincount(seg, weights=selected, minlength=mask.num_graphs)
    return hits / np.maximum(counts, 1.0)
