"""
평가 지표: R2, RMSE, ROC-AUC, rationale 정밀도/재현율
"""
from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from apps.common.exceptions import ShapeError, UndefinedMetricError
from base.enums import errors
from base.enums.base import RationaleMode


def _pair(pred, target) -> Tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    t = np.asarray(target, dtype=np.float64).reshape(-1)
    if p.shape != t.shape or p.size == 0:
        raise ShapeError(f"pred {p.shape} vs target {t.shape}")
    return p, t


def r2(pred, target) -> float:
    p, t = _pair(pred, target)
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        raise UndefinedMetricError("r2 with constant targets")
    return 1.0 - float(np.sum((t - p) ** 2)) / ss_tot


def rmse(pred, target) -> float:
    p, t = _pair(pred, target)
    return float(np.sqrt(np.mean((p - t) ** 2)))


def roc_auc(scores, labels) -> float:
    """
    Mann-Whitney 통계량. 동점은 0.5 로 센다 (평균 순위).
    """
    s, y = _pair(scores, labels)
    positive = y == 1.0
    n_pos = int(positive.sum())
    n_neg = int((y == 0.0).sum())
    if n_pos + n_neg != y.size:
        raise UndefinedMetricError("roc_auc labels must be 0/1")
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(f"roc_auc needs both classes (pos={n_pos}, neg={n_neg})")
    ranks = rankdata(s)
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def accuracy(logits, labels) -> float:
    z, y = _pair(logits, labels)
    return float(np.mean((z > 0.0) == (y == 1.0)))


def select_nodes(mask: Sequence[float], k: int = None, mode: str = RationaleMode.THRESHOLD.value,
                 threshold: float = 0.5) -> list:
    """threshold: m > threshold 인 노드, top-k: 값 내림차순 (동점은 작은 인덱스 우선)"""
    m = np.asarray(mask, dtype=np.float64).reshape(-1)
    if mode == RationaleMode.THRESHOLD.value:
        return np.flatnonzero(m > threshold).tolist()
    if mode == RationaleMode.TOP_K.value:
        order = np.lexsort((np.arange(m.size), -m))
        return sorted(order[:k].tolist())
    raise UndefinedMetricError(f"rationale mode {mode!r}")


def rationale_score(mask: Sequence[float], rationale_truth: Iterable[int],
                    mode: str = RationaleMode.THRESHOLD.value, threshold: float = 0.5) -> Tuple[float, float]:
    truth = set(int(v) for v in rationale_truth)
    if not truth:
        raise UndefinedMetricError("empty rationale truth", error=errors.E005_EMPTY_TRUTH)
    selected = set(select_nodes(mask, len(truth), mode, threshold))
    hits = len(selected & truth)
    precision = hits / len(selected) if selected else 0.0
    return precision, hits / len(truth)
