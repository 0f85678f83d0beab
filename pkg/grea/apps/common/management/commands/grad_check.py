from apps.common.management.base import GreaCommand
from apps.common.utils import get_setting
from apps.graphs.models import GraphBatch, SyntheticSpec
from apps.graphs.synthetic import gen_planted_motif
from apps.rationale.audit import assert_audit, loss_gradient_audit
from apps.rationale.models import ModelParams
from apps.trainer.utils import load_run_config, train_config_from


class Command(GreaCommand):
    help = "작은 합성 배치에서 전체 손실의 해석적 그래디언트를 중앙 차분과 비교합니다."

    def add_arguments(self, parser):
        parser.add_argument("--config", default=None)
        parser.add_argument("--dim", type=int, default=8, help="감사용 hidden 차원 (sep_dim, pred_dim)")
        parser.add_argument("--num-graphs", type=int, default=3)
        self.add_seed_argument(parser)
        self.add_set_argument(parser)

    def run(self, **options):
        run_config = load_run_config(options["config"], options["overrides"])
        dim = options["dim"]
        config = train_config_from(run_config, options["seed"]).replace(sep_dim=dim, pred_dim=dim)

        spec = SyntheticSpec(num_graphs=options["num_graphs"], base_size=(4, 6), seed=config.seed)
        batch = GraphBatch.from_graphs(gen_planted_motif(spec))
        sep_cfg, pred_cfg = config.encoder_configs(spec.feature_dim)
        model = ModelParams.initialize(sep_cfg, pred_cfg, config.agg, config.task, config.seed)

        result = loss_gradient_audit(
            batch, model, config.aug_config(), config.mask_mode,
            eps=get_setting("GRAD_CHECK_EPS", 1e-5), tol=get_setting("GRAD_CHECK_TOL", 1e-4),
        )
        self.emit_json({"agg": config.agg, "encoder": config.encoder, **result})
        assert_audit(result)
