"""
Dense float64 tensor + reverse-mode 자동미분 tape

- 연산은 활성화된 Tape 가 있고 입력 중 하나라도 grad_enabled 일 때만 기록된다.
- Tape 가 없으면 순수 forward 연산 (벤치마크, 추론 경로).
- backward 는 tape 를 실행 역순으로 정확히 한 번 훑는다.
"""
import threading
from contextlib import contextmanager
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from apps.common.exceptions import ContractError
from base.enums import errors

_state = threading.local()


def _tape_stack() -> list:
    if not hasattr(_state, "stack"):
        _state.stack = []
    return _state.stack


def current_tape() -> Optional["Tape"]:
    stack = _tape_stack()
    return stack[-1] if stack else None


class _Entry:
    __slots__ = ("out", "inputs", "vjp", "name")

    def __init__(self, out, inputs, vjp, name):
        self.out = out
        self.inputs = inputs
        self.vjp = vjp
        self.name = name


class Tape:
    """
    실행된 연산의 순서 기록.
    entries 는 실행 순서 그대로이므로 항상 위상 정렬되어 있다.
    한 학습 step 에 하나, 스레드 간 공유 금지.
    """

    def __init__(self):
        self.entries: List[_Entry] = []

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()
        return False

    def __len__(self):
        return len(self.entries)

    def record(self, out: "Tensor", inputs: Sequence["Tensor"], vjp: Callable, name: str) -> None:
        out._tape = self
        out._index = len(self.entries)
        self.entries.append(_Entry(out, tuple(inputs), vjp, name))


@contextmanager
def no_grad():
    """블록 안에서는 어떤 연산도 기록하지 않음"""
    stack = _tape_stack()
    saved = list(stack)
    stack.clear()
    try:
        yield
    finally:
        stack.extend(saved)


class Tensor:
    """
    shape, values(row-major float64), grad_enabled, grad.
    values 는 생성 후 바뀌지 않는다. 예외는 파라미터 갱신용 assign() 뿐.
    """

    def __init__(self, values, grad_enabled: bool = False, name: Optional[str] = None):
        data = np.array(values, dtype=np.float64)
        data.setflags(write=False)
        self.data = data
        self.grad_enabled = grad_enabled
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._tape: Optional[Tape] = None
        self._index: Optional[int] = None

    @classmethod
    def wrap(cls, array: np.ndarray) -> "Tensor":
        """연산 결과처럼 이미 소유한 배열을 복사 없이 감싼다."""
        obj = cls.__new__(cls)
        array = np.asarray(array, dtype=np.float64)
        array.setflags(write=False)
        obj.data = array
        obj.grad_enabled = False
        obj.grad = None
        obj.name = None
        obj._tape = None
        obj._index = None
        return obj

    # --- 속성 ---
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def values(self) -> List[float]:
        return self.data.ravel().tolist()

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def is_leaf(self) -> bool:
        return self._tape is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"shape {self.shape}", error=errors.E001_NON_SCALAR_ROOT)
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def assign(self, values) -> None:
        """파라미터 값 교체 (optimizer, grad_check 전용)"""
        data = np.array(values, dtype=np.float64)
        if data.shape != self.data.shape:
            from apps.common.exceptions import ShapeError
            raise ShapeError(f"assign {data.shape} -> {self.data.shape}")
        data.setflags(write=False)
        self.data = data

    def detach(self) -> "Tensor":
        return Tensor.wrap(self.data)

    def __repr__(self):
        flag = ", grad_enabled=True" if self.grad_enabled else ""
        return f"Tensor(shape={self.shape}{flag})"

    # --- 연산자 ---
    def __add__(self, other):
        from apps.tensor import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from apps.tensor import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from apps.tensor import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from apps.tensor import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from apps.tensor import ops
        if isinstance(other, (int, float)):
            return ops.scale(self, float(other))
        return ops.mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        from apps.tensor import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from apps.tensor import ops
        return ops.matmul(self, other)


def parameter(values, name: Optional[str] = None) -> Tensor:
    return Tensor(values, grad_enabled=True, name=name)


def backward(root: Tensor) -> List[Tensor]:
    """
    root(스칼라) 에서 도달 가능한 grad_enabled leaf 의 grad 를 채우고 그 leaf 목록을 돌려준다.
    여러 경로의 기여는 합산된다. 이미 grad 가 있는 leaf 가 있으면 에러 (zero_grad 필요).
    """
    if root.data.size != 1:
        raise ContractError(f"root shape {root.shape}", error=errors.E001_NON_SCALAR_ROOT)
    if not root.grad_enabled:
        return []

    seed = np.ones_like(root.data)
    if root.is_leaf:
        _assign_leaf_grads({id(root): root}, {id(root): seed})
        return [root]

    tape = root._tape
    grads = {id(root): seed}
    leaves = {}
    for k in range(root._index, -1, -1):
        entry = tape.entries[k]
        g = grads.pop(id(entry.out), None)
        if g is None:
            continue
        input_grads = entry.vjp(g)
        for inp, gi in zip(entry.inputs, input_grads):
            if gi is None or not inp.grad_enabled:
                continue
            key = id(inp)
            if key in grads:
                grads[key] = grads[key] + gi
            else:
                grads[key] = gi
            if inp._tape is not tape:
                leaves[key] = inp

    _assign_leaf_grads(leaves, grads)
    return list(leaves.values())


def _assign_leaf_grads(leaves: dict, grads: dict) -> None:
    stale = [t for t in leaves.values() if t.grad is not None]
    if stale:
        names = ", ".join(str(t.name or t.shape) for t in stale[:3])
        raise ContractError(names, error=errors.E001_GRAD_NOT_RESET)
    for key, leaf in leaves.items():
        g = grads[key]
        leaf.grad = np.array(g, dtype=np.float64).reshape(leaf.shape)
