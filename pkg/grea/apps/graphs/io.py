"""
JSON Lines 데이터셋 입출력
한 줄 = 한 그래프: {"nodes": [[...F floats], ...], "edges": [[u, v], ...], "y": 선택, "rationale_nodes": 선택}
"""
import json
import logging
import os
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from apps.common.exceptions import DataFormatError
from apps.common.utils import dump_json, ensure_parent, read_json, write_json
from apps.graphs.models import DatasetSplit, Graph
from apps.graphs.splits import split
from base.enums import errors

logger = logging.getLogger(__name__)

ALLOWED_KEYS = {"nodes", "edges", "y", "rationale_nodes"}
PathLike = Union[str, Path]


def load_jsonl(path: PathLike) -> List[Graph]:
    if not os.path.exists(path):
        raise DataFormatError(str(path), error=errors.E002_FILE_NOT_FOUND)

    graphs: List[Graph] = []
    width = None
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            graph = _parse_line(line, line_no)
            if width is None:
                width = graph.feature_dim
            elif graph.feature_dim != width:
                raise DataFormatError(
                    f"feature width {graph.feature_dim} != {width}",
                    error=errors.E002_RAGGED_FEATURES,
                    line_no=line_no,
                )
            graphs.append(graph)

    logger.info("loaded %d graphs from %s", len(graphs), path)
    return graphs


def _parse_line(line: str, line_no: int) -> Graph:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise DataFormatError(f"invalid JSON ({e.msg})", line_no=line_no)
    if not isinstance(obj, dict):
        raise DataFormatError("line is not a JSON object", line_no=line_no)
    unknown = set(obj) - ALLOWED_KEYS
    if unknown:
        raise DataFormatError(f"unknown fields {sorted(unknown)}", line_no=line_no)

    nodes = obj.get("nodes")
    if not isinstance(nodes, list) or not nodes or not all(isinstance(r, list) for r in nodes):
        raise DataFormatError("'nodes' must be a non-empty array of arrays", line_no=line_no)
    if len({len(r) for r in nodes}) != 1:
        raise DataFormatError("ragged feature rows", error=errors.E002_RAGGED_FEATURES, line_no=line_no)
    try:
        features = np.array(nodes, dtype=np.float64)
    except (TypeError, ValueError):
        raise DataFormatError("non-numeric node feature", line_no=line_no)

    edges = obj.get("edges", [])
    if not isinstance(edges, list) or not all(
        isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in e)
        for e in edges
    ):
        raise DataFormatError("'edges' must be an array of [u, v] integer pairs", line_no=line_no)
    n = features.shape[0]
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise DataFormatError(
                f"edge [{u}, {v}] with {n} nodes", error=errors.E002_EDGE_OUT_OF_RANGE, line_no=line_no
            )

    label = obj.get("y")
    if label is not None and (isinstance(label, bool) or not isinstance(label, (int, float))):
        raise DataFormatError("'y' must be a number", line_no=line_no)
    truth = obj.get("rationale_nodes")
    if truth is not None and not (isinstance(truth, list) and all(isinstance(v, int) for v in truth)):
        raise DataFormatError("'rationale_nodes' must be an array of integers", line_no=line_no)

    try:
        return Graph(features, np.array(edges, dtype=np.int64).reshape(-1, 2), label, truth)
    except DataFormatError as e:
        raise DataFormatError(e.detail, error=e.error, line_no=line_no)


def _number(value: float):
    value = float(value)
    return int(value) if value.is_integer() else value


def graph_to_json(graph: Graph) -> dict:
    obj = {
        "nodes": [[_number(v) for v in row] for row in graph.node_features],
        "edges": graph.edges.tolist(),
    }
    if graph.label is not None:
        obj["y"] = _number(graph.label)
    if graph.rationale_truth is not None:
        obj["rationale_nodes"] = list(graph.rationale_truth)
    return obj


def write_jsonl(graphs: Sequence[Graph], path: PathLike) -> None:
    ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        for graph in graphs:
            f.write(dump_json(graph_to_json(graph)))
            f.write("\n")


# =========================
# split sidecar
# =========================
def split_path_for(data_path: PathLike) -> str:
    """data.jsonl -> data.splits.json"""
    root, _ = os.path.splitext(str(data_path))
    return f"{root}.splits.json"


def write_split(split: DatasetSplit, path: PathLike) -> None:
    ensure_parent(path)
    write_json(split.to_dict(), path)


def read_split(path: PathLike, num_graphs: int) -> DatasetSplit:
    if not os.path.exists(path):
        raise DataFormatError(str(path), error=errors.E002_FILE_NOT_FOUND)
    obj = read_json(path)
    if not isinstance(obj, dict) or set(obj) != {"train", "valid", "test"}:
        raise DataFormatError(f"{path}: expected keys train/valid/test")
    seen = set()
    for name in ("train", "valid", "test"):
        for idx in obj[name]:
            if not isinstance(idx, int) or not 0 <= idx < num_graphs or idx in seen:
                raise DataFormatError(f"{path}: bad index {idx!r} in {name}")
            seen.add(idx)
    return DatasetSplit(list(obj["train"]), list(obj["valid"]), list(obj["test"]))


# =========================
# 요약 통계
# =========================
def dataset_summary(graphs: Sequence[Graph]) -> dict:
    """그래프 수, 라벨 분포, 평균/최대 노드 수, 평균/최대 엣지 수"""
    if not graphs:
        return {"num_graphs": 0}
    nodes = np.array([g.num_nodes for g in graphs])
    edges = np.array([g.num_edges for g in graphs])
    labels = [g.label for g in graphs if g.label is not None]
    summary = {
        "num_graphs": len(graphs),
        "avg_nodes": float(nodes.mean()),
        "max_nodes": int(nodes.max()),
        "avg_edges": float(edges.mean()),
        "max_edges": int(edges.max()),
        "num_labeled": len(labels),
    }
    if labels and all(v in (0.0, 1.0) for v in labels):
        positives = int(sum(labels))
        summary["label_counts"] = {"0": len(labels) - positives, "1": positives}
        summary["positive_rate"] = positives / len(labels)
    elif labels:
        summary["label_mean"] = float(np.mean(labels))
        summary["label_std"] = float(np.std(labels))
    return summary


def load_with_split(data_path: PathLike, ratios=(0.6, 0.1, 0.3), seed: int = 0):
    """데이터와 split. sidecar 가 있으면 그대로 쓰고, 없으면 seed 로 새로 나눈다."""
    graphs = load_jsonl(data_path)
    sidecar = split_path_for(data_path)
    if os.path.exists(sidecar):
        return graphs, read_split(sidecar, len(graphs))
    logger.info("no split sidecar at %s, splitting with seed %d", sidecar, seed)
    return graphs, split(len(graphs), ratios, seed)
