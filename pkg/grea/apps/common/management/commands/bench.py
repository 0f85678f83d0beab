from apps.bench.runner import report_to_csv, run_bench
from apps.common.management.base import GreaCommand, parse_int_list
from apps.common.utils import resolve_seed
from apps.graphs.io import load_jsonl
from apps.graphs.models import SyntheticSpec
from apps.graphs.synthetic import gen_planted_motif


class Command(GreaCommand):
    help = "latent augmentation 과 explicit 재인코딩의 쌍 표현 생성 시간을 CSV 로 출력합니다."

    def add_arguments(self, parser):
        parser.add_argument("--data", default=None, help="없으면 planted-motif 합성 데이터 사용")
        parser.add_argument("--batch-sizes", default="8,32,128")
        parser.add_argument("--reps", type=int, default=3)
        self.add_seed_argument(parser)

    def run(self, **options):
        batch_sizes = parse_int_list(options["batch_sizes"], "--batch-sizes")
        seed = resolve_seed(options["seed"])
        if options["data"]:
            graphs = load_jsonl(options["data"])
        else:
            graphs = gen_planted_motif(SyntheticSpec(num_graphs=max(batch_sizes), seed=seed))
        report = run_bench(graphs, batch_sizes, reps=options["reps"], seed=seed)
        self.stdout.write(report_to_csv(report), ending="")
