from typing import Optional, Sequence

import numpy as np

from apps.common.exceptions import ShapeError
from apps.tensor.tensor import Tensor
from apps.trainer.models import OptimizerState


def adam_step(params: Sequence[Tensor], grads: Sequence[Optional[np.ndarray]], state: OptimizerState,
              lr: float) -> None:
    """
    bias 보정된 Adam 한 스텝. grad 가 None 인 파라미터는 0 그래디언트로 본다.
    파라미터 값은 assign 으로 제자리 교체된다.
    """
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    for i, (p, g) in enumerate(zip(params, grads)):
        key = p.name or str(i)
        g = np.zeros(p.shape) if g is None else np.asarray(g, dtype=np.float64)
        if g.shape != p.shape:
            raise ShapeError(f"grad {g.shape} vs param {key} {p.shape}")
        m = b1 * state.m.get(key, np.zeros(p.shape)) + (1.0 - b1) * g
        v = b2 * state.v.get(key, np.zeros(p.shape)) + (1.0 - b2) * g * g
        state.m[key], state.v[key] = m, v
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        p.assign(p.data - lr * m_hat / (np.sqrt(v_hat) + state.eps))
