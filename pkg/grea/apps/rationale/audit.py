"""
전체 손실에 대한 중앙 차분 그래디언트 감사

L_sep 는 모든 파라미터, L_pred 는 predictor 파라미터에 대해 검사한다.
"""
import logging

from apps.common.exceptions import SelfCheckError
from apps.graphs.models import GraphBatch
from apps.rationale.models import AugConfig, ModelParams
from apps.rationale.pipeline import forward
from apps.tensor.gradcheck import grad_check

logger = logging.getLogger(__name__)


def loss_gradient_audit(batch: GraphBatch, model: ModelParams, aug: AugConfig, mask_mode: str,
                        eps: float = 1e-5, tol: float = 1e-4) -> dict:
    all_params = model.separator.tensors() + model.predictor.tensors()
    sep_err = grad_check(lambda ps: forward(batch, model, aug, mask_mode).l_sep, all_params, eps)
    pred_err = grad_check(lambda ps: forward(batch, model, aug, mask_mode).l_pred, model.predictor.tensors(), eps)
    worst = max(sep_err, pred_err)
    result = {
        "num_graphs": batch.num_graphs,
        "num_params": model.separator.num_values() + model.predictor.num_values(),
        "max_rel_err_sep": sep_err,
        "max_rel_err_pred": pred_err,
        "max_rel_err": worst,
        "tolerance": tol,
        "passed": worst < tol,
    }
    logger.info("gradient audit: sep=%.3e pred=%.3e (tol %.0e)", sep_err, pred_err, tol)
    return result


def assert_audit(result: dict) -> None:
    if not result["passed"]:
        raise SelfCheckError(f"max rel err {result['max_rel_err']:.3e} >= {result['tolerance']:.0e}")
