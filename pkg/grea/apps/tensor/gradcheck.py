"""
중앙 차분 그래디언트 검사

relative error = |analytic - numeric| / max(1, |analytic|, |numeric|)
relu 의 꺾이는 점처럼 ±eps 사이에서 기울기가 바뀌는 지점은 검사에서 뺀다.
(전진 차분과 후진 차분이 kink_tol 이상 어긋나면 꺾이는 점으로 본다)
"""
import logging
from typing import Callable, List, Sequence

import numpy as np

from apps.common.exceptions import ContractError
from apps.tensor.tensor import Tape, Tensor, backward, no_grad
from base.enums import errors

logger = logging.getLogger(__name__)

KINK_TOL = 1e-3


def _forward_value(f: Callable[[Sequence[Tensor]], Tensor], params: Sequence[Tensor]) -> float:
    with no_grad():
        value = f(params).item()
    if not np.isfinite(value):
        raise ContractError(f"f = {value}", error=errors.E001_NON_FINITE_POINT)
    return value


def analytic_grads(f: Callable[[Sequence[Tensor]], Tensor], params: Sequence[Tensor]) -> List[np.ndarray]:
    """params 의 해석적 grad. backward 가 채운 다른 leaf 의 grad 도 모두 지운다."""
    for p in params:
        p.zero_grad()
    with Tape():
        loss = f(params)
        if not np.isfinite(loss.item()):
            raise ContractError(f"f = {loss.item()}", error=errors.E001_NON_FINITE_POINT)
        reached = backward(loss)
    grads = [np.zeros(p.shape) if p.grad is None else p.grad.copy() for p in params]
    for t in list(params) + reached:
        t.zero_grad()
    return grads


def grad_check(f: Callable[[Sequence[Tensor]], Tensor], params: Sequence[Tensor], eps: float = 1e-5,
               kink_tol: float = KINK_TOL) -> float:
    """
    f(params) -> 스칼라 텐서.
    모든 파라미터의 모든 원소에 대해 중앙 차분과 비교하고 최대 상대 오차를 반환.
    """
    analytic = analytic_grads(f, params)
    f_base = _forward_value(f, params)
    worst = 0.0
    skipped = 0
    for p, g in zip(params, analytic):
        base = p.data.copy()
        for idx in np.ndindex(base.shape):
            shifted = base.copy()
            shifted[idx] = base[idx] + eps
            p.assign(shifted)
            f_plus = _forward_value(f, params)
            shifted[idx] = base[idx] - eps
            p.assign(shifted)
            f_minus = _forward_value(f, params)

            ahead = (f_plus - f_base) / eps
            behind = (f_base - f_minus) / eps
            if abs(ahead - behind) > kink_tol * max(1.0, abs(ahead), abs(behind)):
                skipped += 1
                continue
            numeric = (f_plus - f_minus) / (2.0 * eps)
            a = float(g[idx])
            rel = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
            worst = max(worst, rel)
        p.assign(base)
    if skipped:
        logger.info("grad_check: skipped %d points at non-smooth kinks", skipped)
    logger.debug("grad_check: %d tensors, max rel err %.3e", len(params), worst)
    return worst
