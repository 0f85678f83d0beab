import json
import logging

from apps.common.exceptions import ConfigError
from apps.common.management.base import GreaCommand
from apps.graphs.io import dataset_summary, split_path_for, write_jsonl, write_split
from apps.graphs.synthetic import gen_planted_motif, planted_split
from apps.trainer.serializers import SyntheticSpecSerializer
from apps.trainer.utils import merge_config, parse_overrides, read_config_file, synthetic_spec_from
from base.enums import errors

logger = logging.getLogger(__name__)


class Command(GreaCommand):
    help = "planted-motif 합성 데이터셋(JSONL)과 split sidecar 를 만들고 요약 통계를 출력합니다."

    def add_arguments(self, parser):
        parser.add_argument("--spec", default=None, help="SyntheticSpec JSON (없으면 기본값)")
        parser.add_argument("--out", required=True, help="출력 JSONL 경로")
        self.add_seed_argument(parser)
        self.add_set_argument(parser)

    def run(self, **options):
        raw = read_config_file(options["spec"]) if options["spec"] else {}
        raw = merge_config(raw, parse_overrides(options["overrides"]))

        serializer = SyntheticSpecSerializer(data=raw)
        if not serializer.is_valid():
            raise ConfigError(json.dumps(serializer.errors, ensure_ascii=False, default=str),
                              error=errors.E002_INVALID_SYNTHETIC_SPEC)
        spec = synthetic_spec_from({"synthetic": dict(serializer.validated_data)}, options["seed"])

        graphs = gen_planted_motif(spec)
        write_jsonl(graphs, options["out"])
        sidecar = split_path_for(options["out"])
        write_split(planted_split(spec), sidecar)
        logger.info("wrote %d graphs to %s (split: %s)", len(graphs), options["out"], sidecar)
        self.emit_json({"out": options["out"], "splits": sidecar, **dataset_summary(graphs)})
