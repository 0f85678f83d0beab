from dataclasses import asdict, dataclass
from typing import Optional


@dataclass
class MetricsRecord:
    """
    회귀: r2, rmse / 분류: auc (+ accuracy)
    rationale_* 는 정답 rationale 이 있는 그래프에 대해서만 채운다.
    """
    n_examples: int
    r2: Optional[float] = None
    rmse: Optional[float] = None
    auc: Optional[float] = None
    accuracy: Optional[float] = None
    rationale_fraction: Optional[float] = None
    rationale_precision: Optional[float] = None
    rationale_recall: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    def primary(self, task: str) -> Optional[float]:
        return self.auc if task == "binary" else self.rmse
