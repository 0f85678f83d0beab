"""
GREA 공통 예외
각 예외는 base.enums.errors 의 에러 코드 딕셔너리를 하나 들고 다닌다.
"""
from typing import Optional

from base.enums import errors


class GreaError(Exception):
    """모든 GREA 예외의 부모"""
    default_error = errors.E003_INVALID_CONFIG

    def __init__(self, detail: str = "", error: Optional[dict] = None):
        self.error = error or self.default_error
        self.detail = detail
        super().__init__(self.__str__())

    @property
    def error_code(self) -> str:
        return self.error["error_code"]

    def __str__(self):
        if self.detail:
            return f"[{self.error_code}] {self.error['message']}: {self.detail}"
        return f"[{self.error_code}] {self.error['message']}"


class ShapeError(GreaError, ValueError):
    default_error = errors.E001_SHAPE_MISMATCH


class SegmentIndexError(GreaError, IndexError):
    default_error = errors.E001_SEGMENT_OUT_OF_RANGE


class ContractError(GreaError, RuntimeError):
    default_error = errors.E001_NON_SCALAR_ROOT


class ConfigError(GreaError, ValueError):
    default_error = errors.E003_INVALID_CONFIG


class DataFormatError(GreaError, ValueError):
    """데이터 파일 오류 (line_no 는 1부터)"""
    default_error = errors.E002_MALFORMED_LINE

    def __init__(self, detail: str = "", error: Optional[dict] = None, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            detail = f"line {line_no}: {detail}"
        super().__init__(detail, error)


class UndefinedMetricError(GreaError, ValueError):
    default_error = errors.E005_UNDEFINED_METRIC


class NumericalError(GreaError, ArithmeticError):
    """학습 중 NaN/Inf (phase, epoch 포함)"""
    default_error = errors.E004_NON_FINITE_LOSS

    def __init__(self, detail: str = "", phase: Optional[str] = None, epoch: Optional[int] = None):
        self.phase = phase
        self.epoch = epoch
        super().__init__(f"phase={phase} epoch={epoch} {detail}".strip())


class SelfCheckError(GreaError, AssertionError):
    default_error = errors.E004_GRAD_CHECK_FAILED
