"""
그래프 / 배치 / 합성 데이터 설정 / split 자료형
모두 생성 후 불변이며 여러 스레드에서 읽어도 안전하다.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from apps.common.exceptions import ConfigError, DataFormatError
from base.enums import errors
from base.enums.base import BaseKind, MotifKind, choices


@dataclass(frozen=True, eq=False)
class Graph:
    """
    node_features: (N, F), edges: (E, 2) 무방향 엣지를 한 번만 저장 (self-loop 없음)
    label 은 추론 시 없을 수 있음 (None)
    """
    node_features: np.ndarray
    edges: np.ndarray
    label: Optional[float] = None
    rationale_truth: Optional[Tuple[int, ...]] = None
    base_kind: Optional[str] = None  # 합성 데이터 전용, 파일에는 저장하지 않음

    def __post_init__(self):
        x = np.array(self.node_features, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1:
            raise DataFormatError(f"node_features shape {x.shape}", error=errors.E002_INVALID_GRAPH)
        e = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        n = x.shape[0]
        if e.size and (e.min() < 0 or e.max() >= n):
            raise DataFormatError(f"edge endpoint not in [0, {n})", error=errors.E002_EDGE_OUT_OF_RANGE)
        if e.size and np.any(e[:, 0] == e[:, 1]):
            raise DataFormatError("self-loop in stored edges", error=errors.E002_INVALID_GRAPH)
        truth = self.rationale_truth
        if truth is not None:
            truth = tuple(sorted(int(v) for v in truth))
            if any(v < 0 or v >= n for v in truth):
                raise DataFormatError("rationale node out of range", error=errors.E002_INVALID_GRAPH)
        x.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "node_features", x)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "rationale_truth", truth)
        if self.label is not None:
            object.__setattr__(self, "label", float(self.label))

    @property
    def num_nodes(self) -> int:
        return self.node_features.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.node_features.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            np.array_equal(self.node_features, other.node_features)
            and np.array_equal(self.edges, other.edges)
            and self.label == other.label
            and self.rationale_truth == other.rationale_truth
        )

    def __hash__(self):
        return hash((self.num_nodes, self.num_edges, self.label))


@dataclass(frozen=True, eq=False)
class GraphBatch:
    """
    여러 그래프의 block-diagonal 합집합.
    segments[v] = 노드 v 가 속한 그래프 번호 (0..B-1), 모든 엣지는 같은 segment 안에 있다.
    """
    features: np.ndarray
    edges: np.ndarray
    segments: np.ndarray
    num_graphs: int
    labels: np.ndarray
    graph_indices: Tuple[int, ...] = ()

    @classmethod
    def from_graphs(cls, graphs: Sequence[Graph], indices: Optional[Sequence[int]] = None) -> "GraphBatch":
        if not graphs:
            raise ConfigError("empty batch", error=errors.E002_INVALID_BATCH_SIZE)
        widths = {g.feature_dim for g in graphs}
        if len(widths) != 1:
            raise DataFormatError(f"feature widths {sorted(widths)}", error=errors.E002_RAGGED_FEATURES)
        offsets = np.cumsum([0] + [g.num_nodes for g in graphs])
        features = np.concatenate([g.node_features for g in graphs], axis=0)
        edges = np.concatenate(
            [g.edges + offsets[i] for i, g in enumerate(graphs)], axis=0
        ).reshape(-1, 2).astype(np.int64)
        segments = np.concatenate(
            [np.full(g.num_nodes, i, dtype=np.int64) for i, g in enumerate(graphs)]
        )
        labels = np.array([np.nan if g.label is None else g.label for g in graphs], dtype=np.float64)
        if indices is None:
            indices = range(len(graphs))
        for arr in (features, edges, segments, labels):
            arr.setflags(write=False)
        return cls(features, edges, segments, len(graphs), labels, tuple(int(i) for i in indices))

    @property
    def num_nodes(self) -> int:
        return self.features.shape[0]

    @cached_property
    def node_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.node_counts)]).astype(np.int64)

    @cached_property
    def node_counts(self) -> np.ndarray:
        return np.bincount(self.segments, minlength=self.num_graphs).astype(np.int64)

    @cached_property
    def directed_edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """저장된 무방향 엣지를 양방향 (src, dst) 로 펼친다."""
        if self.edges.size == 0:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        return src, dst

    @cached_property
    def gcn_propagation(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        D^-1/2 (A + I) D^-1/2 의 (src, dst, weight). self-loop 는 여기서만 추가한다.
        """
        src, dst = self.directed_edges
        loops = np.arange(self.num_nodes, dtype=np.int64)
        src = np.concatenate([src, loops])
        dst = np.concatenate([dst, loops])
        degree = np.bincount(dst, minlength=self.num_nodes).astype(np.float64)
        inv_sqrt = 1.0 / np.sqrt(degree)
        weight = inv_sqrt[src] * inv_sqrt[dst]
        return src, dst, weight.reshape(-1, 1)

    def graph_slice(self, i: int) -> slice:
        return slice(int(self.node_offsets[i]), int(self.node_offsets[i + 1]))


@dataclass(frozen=True)
class SyntheticSpec:
    """
    planted-motif 합성 데이터 설정.
    motif_kinds[c] 는 클래스 c 의 motif, base_kinds[c] 는 클래스 c 와 상관된 base 종류.
    spurious_bias 는 train split 에서만 적용된다.
    """
    num_graphs: int = 1000
    base_size: Tuple[int, int] = (8, 14)
    base_kinds: Tuple[str, ...] = tuple(choices(BaseKind))
    motif_kinds: Tuple[str, str] = (MotifKind.HOUSE.value, MotifKind.CYCLE.value)
    feature_dim: int = 6
    spurious_bias: float = 0.9
    label_noise: float = 0.0
    seed: int = 0
    split_ratios: Tuple[float, float, float] = (0.6, 0.1, 0.3)

    def __post_init__(self):
        problems = []
        if self.num_graphs < 1:
            problems.append("num_graphs must be positive")
        lo, hi = self.base_size
        if lo < 3 or hi < lo:
            problems.append(f"base_size {self.base_size}")
        if len(self.base_kinds) < 2 or any(k not in choices(BaseKind) for k in self.base_kinds):
            problems.append(f"base_kinds {self.base_kinds}")
        if len(self.motif_kinds) != 2 or any(k not in choices(MotifKind) for k in self.motif_kinds):
            problems.append(f"motif_kinds {self.motif_kinds}")
        if self.feature_dim < 2:
            problems.append("feature_dim must be >= 2")
        if not 0.0 <= self.spurious_bias <= 1.0:
            problems.append("spurious_bias must be in [0, 1]")
        if not 0.0 <= self.label_noise <= 1.0:
            problems.append("label_noise must be in [0, 1]")
        if problems:
            raise ConfigError("; ".join(problems), error=errors.E002_INVALID_SYNTHETIC_SPEC)


@dataclass(frozen=True)
class DatasetSplit:
    train: List[int] = field(default_factory=list)
    valid: List[int] = field(default_factory=list)
    test: List[int] = field(default_factory=list)

    def get(self, name: str) -> List[int]:
        if name not in ("train", "valid", "test"):
            raise ConfigError(f"unknown split {name!r}")
        return getattr(self, name)

    def to_dict(self) -> dict:
        return {"train": list(self.train), "valid": list(self.valid), "test": list(self.test)}


def disjoint_union(*graphs: Graph) -> Graph:
    """연결되지 않은 합집합 (노드 번호는 입력 순서대로 이어 붙임). label 과 truth 는 버린다."""
    if not graphs:
        raise ConfigError("disjoint_union needs at least one graph", error=errors.E002_INVALID_GRAPH)
    offsets = np.cumsum([0] + [g.num_nodes for g in graphs])
    features = np.concatenate([g.node_features for g in graphs], axis=0)
    edges = np.concatenate([g.edges + offsets[i] for i, g in enumerate(graphs)], axis=0)
    return Graph(features, edges)
