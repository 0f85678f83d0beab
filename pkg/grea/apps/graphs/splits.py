import math
from typing import Sequence, Union

from apps.common.exceptions import ConfigError
from apps.common.utils import make_rng
from apps.graphs.models import DatasetSplit
from base.enums import errors


def split(dataset: Union[int, Sequence], ratios=(0.6, 0.1, 0.3), seed: int = 0) -> DatasetSplit:
    """
    결정적 셔플 후 누적 경계에서 자른다.
    train = floor(n r0), valid = floor(n (r0 + r1)) - train, test = 나머지.
    (10 -> 6/1/3, 595 -> 357/59/179)
    """
    n = dataset if isinstance(dataset, int) else len(dataset)
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios={ratios}", error=errors.E002_INVALID_RATIOS)

    order = make_rng(seed, 2).permutation(n).tolist()
    cut_train = math.floor(n * ratios[0] + 1e-9)
    cut_valid = math.floor(n * (ratios[0] + ratios[1]) + 1e-9)
    return DatasetSplit(
        train=order[:cut_train],
        valid=order[cut_train:cut_valid],
        test=order[cut_valid:],
    )
