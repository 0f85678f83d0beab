from apps.common.exceptions import ConfigError
from apps.common.management.base import GreaCommand, parse_int_list
from apps.graphs.io import load_with_split
from apps.trainer.sweep import sweep
from apps.trainer.utils import load_run_config, split_ratios_from, train_config_from


class Command(GreaCommand):
    help = "seed 마다 독립 학습하고 test 지표의 평균/표준편차를 JSON 으로 출력합니다."

    def add_arguments(self, parser):
        parser.add_argument("--config", default=None)
        parser.add_argument("--data", default=None)
        parser.add_argument("--seeds", default="1,2,3")
        parser.add_argument("--compare-alpha0", action="store_true",
                            help="environment replacement 를 끈 변형(alpha=0)도 함께 실행")
        self.add_set_argument(parser)

    def run(self, **options):
        run_config = load_run_config(options["config"], options["overrides"])
        config = train_config_from(run_config)
        data = options["data"] or run_config.get("data")
        if not data:
            raise ConfigError("--data (or config data) is required")
        seeds = parse_int_list(options["seeds"], "--seeds")

        graphs, splits = load_with_split(data, split_ratios_from(run_config), config.seed)
        self.emit_json(sweep(graphs, splits, config, seeds, compare_alpha0=options["compare_alpha0"]))
