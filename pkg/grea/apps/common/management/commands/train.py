import logging
import os

from apps.common.exceptions import ConfigError
from apps.common.management.base import GreaCommand
from apps.common.utils import ensure_parent, write_json
from apps.graphs.io import load_with_split
from apps.trainer.checkpoint import save_checkpoint
from apps.trainer.loop import train
from apps.trainer.utils import load_run_config, split_ratios_from, train_config_from

logger = logging.getLogger(__name__)


def history_path_for(checkpoint_path: str) -> str:
    root, _ = os.path.splitext(checkpoint_path)
    return f"{root}.history.json"


class Command(GreaCommand):
    help = "separator / predictor 교대 학습 후 체크포인트와 학습 기록(JSON)을 저장합니다."

    def add_arguments(self, parser):
        parser.add_argument("--config", default=None, help="실행 설정 JSON")
        parser.add_argument("--data", default=None, help="JSONL 데이터 (설정 파일의 data 보다 우선)")
        parser.add_argument("--out", default=None, help="체크포인트 경로 (설정 파일의 out 보다 우선)")
        parser.add_argument("--history", default=None, help="학습 기록 경로 (기본: <out>.history.json)")
        parser.add_argument("--exclude-diagonal", action="store_true",
                            help="environment 교체 손실에서 자기 자신(j = i) 쌍을 뺀다")
        parser.add_argument("--with-timings", action="store_true", help="학습 기록에 에폭별 시간 포함")
        self.add_seed_argument(parser)
        self.add_set_argument(parser)

    def run(self, **options):
        run_config = load_run_config(options["config"], options["overrides"])
        config = train_config_from(run_config, options["seed"])
        if options["exclude_diagonal"]:
            config = config.replace(diag_in_rep=False)

        data = options["data"] or run_config.get("data")
        out = options["out"] or run_config.get("out")
        if not data or not out:
            raise ConfigError("both --data and --out (or config data/out) are required")

        graphs, splits = load_with_split(data, split_ratios_from(run_config), config.seed)
        logger.info("training on %d/%d/%d graphs (seed=%d)",
                    len(splits.train), len(splits.valid), len(splits.test), config.seed)
        model, history = train(graphs, splits, config)

        save_checkpoint(out, model, config)
        history_path = options["history"] or history_path_for(out)
        ensure_parent(history_path)
        write_json(history.to_dict(include_timings=options["with_timings"]), history_path)
        self.emit_json({
            "checkpoint": out,
            "history": history_path,
            "metric_name": history.metric_name,
            "best_epoch": history.best_epoch,
            "best_metric": history.best_metric,
            "epochs": len(history.epochs),
        })
