from apps.common.management.base import GreaCommand
from apps.common.utils import get_setting
from apps.graphs.io import load_with_split
from apps.trainer.checkpoint import load_checkpoint
from apps.trainer.evaluation import evaluate


class Command(GreaCommand):
    help = "체크포인트를 데이터 split 에서 평가하고 지표를 JSON 으로 출력합니다."

    def add_arguments(self, parser):
        parser.add_argument("--ckpt", required=True)
        parser.add_argument("--data", required=True)
        parser.add_argument("--split", default="test", choices=["train", "valid", "test", "all"])

    def run(self, **options):
        model, config = load_checkpoint(options["ckpt"])
        graphs, splits = load_with_split(options["data"], get_setting("SPLIT_RATIOS"), config.seed)
        indices = range(len(graphs)) if options["split"] == "all" else splits.get(options["split"])
        record = evaluate(model, graphs, indices, config.task, config.mask_mode, config.log_target,
                          config.mask_threshold)
        self.emit_json(record.to_dict())
