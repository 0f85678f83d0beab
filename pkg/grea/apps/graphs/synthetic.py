"""
Planted-motif 합성 벤치마크

각 그래프 = base 그래프 + motif, 정확히 하나의 연결 엣지로 붙인다.
라벨은 motif 종류로만 결정되고 (label_noise 만큼 뒤집힘), rationale_truth 는 motif 노드.
train split 에서는 spurious_bias 확률로 base 종류가 라벨과 상관되고,
valid/test 에서는 base 종류를 균등하게 고른다.
"""
import logging
from typing import List

import networkx as nx
import numpy as np

from apps.common.exceptions import ConfigError
from apps.common.utils import make_rng
from apps.graphs.models import Graph, SyntheticSpec
from apps.graphs.splits import split
from base.enums import errors
from base.enums.base import BaseKind, MotifKind

logger = logging.getLogger(__name__)


def build_motif(kind: str) -> nx.Graph:
    if kind == MotifKind.HOUSE.value:
        return nx.house_graph()
    if kind == MotifKind.CYCLE.value:
        return nx.cycle_graph(6)
    raise ConfigError(f"{kind=}", error=errors.E002_INVALID_SYNTHETIC_SPEC)


def build_base(kind: str, size: int, rng: np.random.Generator) -> nx.Graph:
    if kind == BaseKind.RANDOM_TREE.value:
        tree = nx.Graph()
        tree.add_node(0)
        for v in range(1, size):
            tree.add_edge(int(rng.integers(v)), v)
        return tree
    if kind == BaseKind.LADDER.value:
        return nx.ladder_graph(max(size // 2, 2))
    if kind == BaseKind.WHEEL.value:
        return nx.wheel_graph(max(size, 4))
    raise ConfigError(f"{kind=}", error=errors.E002_INVALID_SYNTHETIC_SPEC)


def degree_features(graph: nx.Graph, feature_dim: int) -> np.ndarray:
    """one-hot(min(degree, F-1))"""
    n = graph.number_of_nodes()
    features = np.zeros((n, feature_dim))
    for v in range(n):
        features[v, min(graph.degree[v], feature_dim - 1)] = 1.0
    return features


def planted_split(spec: SyntheticSpec):
    return split(spec.num_graphs, spec.split_ratios, spec.seed)


def gen_planted_motif(spec: SyntheticSpec) -> List[Graph]:
    train = set(planted_split(spec).train)
    kinds = list(spec.base_kinds)
    graphs = []
    for i in range(spec.num_graphs):
        rng = make_rng(spec.seed, 1, i)
        clean_label = int(rng.integers(2))
        if i in train and rng.random() < spec.spurious_bias:
            base_kind = kinds[clean_label]
        else:
            base_kind = kinds[int(rng.integers(len(kinds)))]
        size = int(rng.integers(spec.base_size[0], spec.base_size[1] + 1))
        label = 1 - clean_label if rng.random() < spec.label_noise else clean_label
        graphs.append(_plant(spec, base_kind, spec.motif_kinds[clean_label], size, label, rng))

    logger.info("generated %d planted-motif graphs (seed=%d)", len(graphs), spec.seed)
    return graphs


def _plant(spec: SyntheticSpec, base_kind: str, motif_kind: str, size: int, label: int,
           rng: np.random.Generator) -> Graph:
    base = nx.convert_node_labels_to_integers(build_base(base_kind, size, rng))
    motif = build_motif(motif_kind)
    n_base = base.number_of_nodes()
    joined = nx.disjoint_union(base, motif)
    joined.add_edge(int(rng.integers(n_base)), n_base + int(rng.integers(motif.number_of_nodes())))

    # 노드 순서를 섞어서 motif 위치가 고정되지 않게 함
    perm = rng.permutation(joined.number_of_nodes())
    relabeled = nx.relabel_nodes(joined, {old: int(perm[old]) for old in joined.nodes})
    ordered = nx.Graph()
    ordered.add_nodes_from(range(relabeled.number_of_nodes()))
    ordered.add_edges_from(relabeled.edges)

    edges = sorted((min(u, v), max(u, v)) for u, v in ordered.edges)
    truth = sorted(int(perm[n_base + k]) for k in range(motif.number_of_nodes()))
    return Graph(
        node_features=degree_features(ordered, spec.feature_dim),
        edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
        label=float(label),
        rationale_truth=tuple(truth),
        base_kind=base_kind,
    )
