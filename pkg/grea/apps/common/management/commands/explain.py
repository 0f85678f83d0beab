import logging
import math

from apps.common.management.base import GreaCommand
from apps.common.utils import dump_json, ensure_parent
from apps.graphs.io import load_jsonl
from apps.metrics.scores import select_nodes
from apps.trainer.checkpoint import load_checkpoint
from apps.trainer.evaluation import predict_graphs
from base.enums.base import RationaleMode

logger = logging.getLogger(__name__)


class Command(GreaCommand):
    help = "그래프마다 노드별 rationale 확률과 top-k 노드를 JSONL 로 저장합니다."

    def add_arguments(self, parser):
        parser.add_argument("--ckpt", required=True)
        parser.add_argument("--data", required=True)
        parser.add_argument("--out", required=True, help="출력 JSONL (한 줄 = 한 그래프)")

    def run(self, **options):
        model, config = load_checkpoint(options["ckpt"])
        graphs = load_jsonl(options["data"])
        indices = list(range(len(graphs)))
        _, masks = predict_graphs(model, graphs, indices, config.mask_mode)

        ensure_parent(options["out"])
        with open(options["out"], "w", encoding="utf-8") as f:
            for i, mask in zip(indices, masks):
                truth = graphs[i].rationale_truth
                # 정답이 없으면 gamma 비율만큼
                k = len(truth) if truth else max(1, math.ceil(config.gamma * len(mask)))
                line = {
                    "graph_index": i,
                    "mask": mask.tolist(),
                    "topk": select_nodes(mask, k, RationaleMode.TOP_K.value),
                }
                f.write(dump_json(line))
                f.write("\n")
        logger.info("wrote masks for %d graphs to %s", len(indices), options["out"])
        self.emit_json({"out": options["out"], "num_graphs": len(indices)})
