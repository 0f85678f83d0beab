import enum


class Task(enum.Enum):
    """예측 과제 종류"""

    BINARY = "binary"
    REGRESSION = "regression"


class EncoderKind(enum.Enum):
    """메시지 패싱 인코더"""

    GCN = "gcn"
    GIN = "gin"


class Aggregation(enum.Enum):
    """rationale / environment 표현 결합 방식"""

    SUM = "sum"
    MEAN = "mean"
    MAX = "max"
    CONCAT = "concat"


class Readout(enum.Enum):
    """그래프 단위 pooling"""

    SUM = "sum"
    MEAN = "mean"
    MAX = "max"


class MaskMode(enum.Enum):
    """separator 사용 여부 (FULL 이면 m = 1 고정)"""

    LEARNED = "learned"
    FULL = "full"


class Phase(enum.Enum):
    """교대 학습 단계"""

    SEPARATOR = "sep"
    PREDICTOR = "pred"


class BaseKind(enum.Enum):
    """합성 데이터의 base 그래프 종류"""

    RANDOM_TREE = "random-tree"
    LADDER = "ladder"
    WHEEL = "wheel"


class MotifKind(enum.Enum):
    """합성 데이터의 motif (정답 rationale)"""

    HOUSE = "house"
    CYCLE = "cycle"


class RationaleMode(enum.Enum):
    """mask 로부터 노드 집합을 고르는 방식"""

    THRESHOLD = "threshold"
    TOP_K = "top-k"


def choices(enum_cls):
    return [member.value for member in enum_cls]
