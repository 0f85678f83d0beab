from typing import List, Optional, Sequence

import numpy as np

from apps.common.exceptions import ConfigError
from apps.common.utils import make_rng
from apps.graphs.models import Graph, GraphBatch
from base.enums import errors


def make_batches(
    graphs: Sequence[Graph],
    batch_size: int,
    shuffle_seed: Optional[int] = None,
    indices: Optional[Sequence[int]] = None,
    stream: int = 0,
) -> List[GraphBatch]:
    """
    graphs[indices] 를 batch_size 단위로 묶는다. 마지막 짧은 배치도 유지.
    shuffle_seed 가 None 이면 주어진 순서 그대로. stream 은 에폭마다 다른 순서를 얻기 위한 번호.
    """
    if batch_size < 1:
        raise ConfigError(f"batch_size={batch_size}", error=errors.E002_INVALID_BATCH_SIZE)
    order = np.arange(len(graphs)) if indices is None else np.asarray(list(indices), dtype=np.int64)
    if shuffle_seed is not None:
        order = order[make_rng(shuffle_seed, 3, stream).permutation(len(order))]

    batches = []
    for start in range(0, len(order), batch_size):
        chunk = [int(i) for i in order[start:start + batch_size]]
        batches.append(GraphBatch.from_graphs([graphs[i] for i in chunk], chunk))
    return batches
