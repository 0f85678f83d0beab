from dataclasses import asdict, dataclass, field
from typing import List

CSV_COLUMNS = ("B", "t_latent_ms", "t_explicit_ms", "max_abs_dev", "speedup")


@dataclass
class BenchRow:
    B: int
    t_latent_ms: float
    t_explicit_ms: float
    max_abs_dev: float  # sum agg 기준 latent / explicit 쌍 표현 차이

    @property
    def speedup(self) -> float:
        return self.t_explicit_ms / self.t_latent_ms if self.t_latent_ms > 0 else float("inf")

    def to_dict(self) -> dict:
        return {**asdict(self), "speedup": self.speedup}


@dataclass
class BenchReport:
    reps: int
    rows: List[BenchRow] = field(default_factory=list)

    @property
    def batch_sizes(self) -> List[int]:
        return [row.B for row in self.rows]

    @property
    def max_abs_dev(self) -> float:
        return max((row.max_abs_dev for row in self.rows), default=0.0)
