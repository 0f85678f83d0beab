"""
미분 가능한 텐서 연산

브로드캐스트는 한 가지 형태만 허용한다: (N,1) 열 벡터 x (N,d) 행렬.
"""
from typing import Sequence, Union

import numpy as np
from scipy.special import expit

from apps.common.exceptions import ConfigError, ContractError, SegmentIndexError, ShapeError
from apps.tensor.tensor import Tensor, current_tape
from base.enums import errors

Operand = Union[Tensor, float, int]


def _result(data: np.ndarray, inputs: Sequence[Tensor], vjp, name: str) -> Tensor:
    out = Tensor.wrap(data)
    tape = current_tape()
    if tape is not None and any(t.grad_enabled for t in inputs):
        out.grad_enabled = True
        tape.record(out, inputs, vjp, name)
    return out


def as_tensor(x: Operand, like: Tensor = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    if like is not None:
        return Tensor.wrap(np.full(like.shape, float(x)))
    return Tensor(x)


def constant(values) -> Tensor:
    return Tensor(values)


# =========================
# 선형 대수
# =========================
def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul {a.shape} @ {b.shape}")
    A, Bm = a.data, b.data

    def vjp(g):
        return g @ Bm.T, A.T @ g

    return _result(A @ Bm, (a, b), vjp, "matmul")


def linear(x: Tensor, W: Tensor, b: Tensor = None) -> Tensor:
    """x W + 1 b (bias 는 (1,d), 1 열 벡터와의 matmul 로 더함)"""
    out = matmul(x, W)
    if b is None:
        return out
    ones = Tensor.wrap(np.ones((x.shape[0], 1)))
    return add(out, matmul(ones, b))


# =========================
# elementwise
# =========================
def _broadcast_kind(a: Tensor, b: Tensor) -> str:
    if a.shape == b.shape:
        return "same"
    if a.ndim == 2 and b.ndim == 2 and a.shape[0] == b.shape[0]:
        if a.shape[1] == 1:
            return "a_col"
        if b.shape[1] == 1:
            return "b_col"
    raise ShapeError(f"{a.shape} vs {b.shape}", error=errors.E001_NOT_BROADCASTABLE)


def _reduce_to(g: np.ndarray, shape) -> np.ndarray:
    if g.shape == shape:
        return g
    return g.sum(axis=1, keepdims=True)


def add(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_kind(a, b)
    sa, sb = a.shape, b.shape

    def vjp(g):
        return _reduce_to(g, sa), _reduce_to(g, sb)

    return _result(a.data + b.data, (a, b), vjp, "add")


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_kind(a, b)
    sa, sb = a.shape, b.shape

    def vjp(g):
        return _reduce_to(g, sa), _reduce_to(-g, sb)

    return _result(a.data - b.data, (a, b), vjp, "sub")


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_kind(a, b)
    A, Bm = a.data, b.data

    def vjp(g):
        return _reduce_to(g * Bm, A.shape), _reduce_to(g * A, Bm.shape)

    return _result(A * Bm, (a, b), vjp, "mul")


def maximum(a: Tensor, b: Tensor) -> Tensor:
    """elementwise max, 동점이면 a 쪽으로 그래디언트"""
    if a.shape != b.shape:
        raise ShapeError(f"maximum {a.shape} vs {b.shape}")
    pick_a = a.data >= b.data

    def vjp(g):
        return np.where(pick_a, g, 0.0), np.where(pick_a, 0.0, g)

    return _result(np.where(pick_a, a.data, b.data), (a, b), vjp, "maximum")


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)

    def vjp(g):
        return (g * c,)

    return _result(a.data * c, (a,), vjp, "scale")


def sigmoid(a: Tensor) -> Tensor:
    s = expit(a.data)

    def vjp(g):
        return (g * s * (1.0 - s),)

    return _result(s, (a,), vjp, "sigmoid")


def relu(a: Tensor) -> Tensor:
    positive = a.data > 0

    def vjp(g):
        return (np.where(positive, g, 0.0),)

    return _result(np.where(positive, a.data, 0.0), (a,), vjp, "relu")


_ELEMENTWISE = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "sigmoid": sigmoid,
    "relu": relu,
    "scale": scale,
    "max": maximum,
}


def elementwise(op: str, *args) -> Tensor:
    try:
        fn = _ELEMENTWISE[op]
    except KeyError:
        raise ConfigError(f"unknown elementwise op {op!r}")
    return fn(*args)


def _pair(a: Operand, b: Operand):
    if not isinstance(a, Tensor) and not isinstance(b, Tensor):
        raise ShapeError("at least one operand must be a Tensor")
    if not isinstance(a, Tensor):
        a = as_tensor(a, like=b)
    if not isinstance(b, Tensor):
        b = as_tensor(b, like=a)
    return a, b


# =========================
# 구조 연산
# =========================
def _check_segments(segments, num_segments: int, n_rows: int) -> np.ndarray:
    seg = np.asarray(segments, dtype=np.int64).reshape(-1)
    if seg.shape[0] != n_rows:
        raise ShapeError(f"segments length {seg.shape[0]} vs rows {n_rows}")
    if seg.size and (seg.min() < 0 or seg.max() >= num_segments):
        bad = int(seg[(seg < 0) | (seg >= num_segments)][0])
        raise SegmentIndexError(f"id {bad} not in [0, {num_segments})")
    return seg


def segment_sum(x: Tensor, segments, num_segments: int) -> Tensor:
    """out[s] = sum(x[i] for segments[i] == s), 빈 segment 는 0"""
    if x.ndim != 2:
        raise ShapeError(f"segment_sum expects 2-D input, got {x.shape}")
    seg = _check_segments(segments, num_segments, x.shape[0])
    out = np.zeros((num_segments, x.shape[1]))
    np.add.at(out, seg, x.data)

    def vjp(g):
        return (g[seg],)

    return _result(out, (x,), vjp, "segment_sum")


def segment_mean(x: Tensor, segments, num_segments: int) -> Tensor:
    seg = _check_segments(segments, num_segments, x.shape[0])
    counts = np.bincount(seg, minlength=num_segments).astype(np.float64)
    inv = np.where(counts > 0, 1.0 / np.maximum(counts, 1.0), 0.0).reshape(-1, 1)
    return mul(Tensor.wrap(inv), segment_sum(x, seg, num_segments))


def segment_max(x: Tensor, segments, num_segments: int) -> Tensor:
    """segment 별 열 단위 max, 동점이면 가장 앞 행이 그래디언트를 받음. 빈 segment 는 0"""
    if x.ndim != 2:
        raise ShapeError(f"segment_max expects 2-D input, got {x.shape}")
    seg = _check_segments(segments, num_segments, x.shape[0])
    n, d = x.shape
    out = np.full((num_segments, d), -np.inf)
    np.maximum.at(out, seg, x.data)
    empty = np.isinf(out)
    out[empty] = 0.0

    hits = x.data == out[seg]
    rows, cols = np.nonzero(hits)
    first = np.full((num_segments, d), n, dtype=np.int64)
    np.minimum.at(first, (seg[rows], cols), rows)

    def vjp(g):
        gx = np.zeros((n, d))
        s_idx, c_idx = np.nonzero(first < n)
        gx[first[s_idx, c_idx], c_idx] = g[s_idx, c_idx]
        return (gx,)

    return _result(out, (x,), vjp, "segment_max")


def gather_rows(x: Tensor, index) -> Tensor:
    idx = np.asarray(index, dtype=np.int64).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= x.shape[0]):
        raise SegmentIndexError(f"row index out of [0, {x.shape[0]})")
    n = x.shape[0]

    def vjp(g):
        gx = np.zeros((n,) + g.shape[1:])
        np.add.at(gx, idx, g)
        return (gx,)

    return _result(x.data[idx], (x,), vjp, "gather_rows")


def concat_rows(a: Tensor, b: Tensor) -> Tensor:
    """열 방향 이어붙이기: [m x d1] (+) [m x d2] -> [m x (d1+d2)]"""
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeError(f"concat_rows {a.shape} vs {b.shape}")
    d1 = a.shape[1]

    def vjp(g):
        return g[:, :d1], g[:, d1:]

    return _result(np.concatenate([a.data, b.data], axis=1), (a, b), vjp, "concat_rows")


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    original = a.shape
    if int(np.prod(shape)) != a.data.size:
        raise ShapeError(f"reshape {original} -> {shape}")

    def vjp(g):
        return (g.reshape(original),)

    return _result(a.data.reshape(shape), (a,), vjp, "reshape")


def total(a: Tensor) -> Tensor:
    shape = a.shape

    def vjp(g):
        return (np.full(shape, float(g)),)

    return _result(np.asarray(a.data.sum()), (a,), vjp, "sum")


def mean(a: Tensor) -> Tensor:
    n = max(a.data.size, 1)
    return scale(total(a), 1.0 / n)


# =========================
# 손실
# =========================
def _flat_pair(pred: Tensor, target, name: str):
    t = target.data if isinstance(target, Tensor) else np.asarray(target, dtype=np.float64)
    if pred.data.size != t.size:
        raise ShapeError(f"{name}: {pred.shape} vs {t.shape}")
    return pred.data.reshape(-1), t.reshape(-1).astype(np.float64)


def bce_with_logits(logits: Tensor, targets) -> Tensor:
    """
    mean(-[y log s(z) + (1-y) log(1-s(z))]) 를 logit 에서 직접 계산.
    max(z,0) - z y + log(1 + exp(-|z|)) 형태라 overflow / log(0) 없음.
    """
    z, y = _flat_pair(logits, targets, "bce_with_logits")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ContractError(f"bce_with_logits targets {sorted(set(y.tolist()))[:5]}",
                            error=errors.E001_NON_BINARY_TARGET)
    n = max(z.size, 1)
    value = np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))) if z.size else 0.0
    shape = logits.shape

    def vjp(g):
        return ((float(g) * (expit(z) - y) / n).reshape(shape),)

    return _result(np.asarray(value), (logits,), vjp, "bce_with_logits")


def mse(pred: Tensor, target) -> Tensor:
    p, t = _flat_pair(pred, target, "mse")
    n = max(p.size, 1)
    diff = p - t
    shape = pred.shape

    def vjp(g):
        return ((float(g) * 2.0 * diff / n).reshape(shape),)

    return _result(np.asarray(np.mean(diff ** 2) if p.size else 0.0), (pred,), vjp, "mse")
