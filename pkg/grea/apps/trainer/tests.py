import math
import os
import tempfile
import unittest

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from apps.common.exceptions import ConfigError, DataFormatError, NumericalError
from apps.gnn.models import mlp_layers
from apps.graphs.models import DatasetSplit, Graph, SyntheticSpec
from apps.graphs.splits import split
from apps.graphs.synthetic import gen_planted_motif, planted_split
from apps.metrics import scores
from apps.rationale.models import PRED_HEAD, PRED_HEAD_CAT, ModelParams
from apps.tensor.tensor import parameter
from apps.trainer.checkpoint import load_checkpoint, save_checkpoint
from apps.trainer.evaluation import evaluate, predict_graphs, targets_for
from apps.trainer.loop import AlternatingTrainer, train
from apps.trainer.models import EpochRecord, OptimizerState, RunHistory, TrainConfig
from apps.trainer.optim import adam_step
from apps.trainer.sweep import sweep
from apps.trainer.utils import load_run_config, parse_overrides, synthetic_spec_from, train_config_from
from base.enums import errors


class AdamTest(SimpleTestCase):
    def test_success_zero_grads_keep_params(self):
        p = parameter([[1.0, -2.0]], name="w")
        state = OptimizerState()
        adam_step([p], [np.zeros((1, 2))], state, 0.1)
        np.testing.assert_array_equal(p.data, [[1.0, -2.0]])
        self.assertEqual(state.step, 1)

    def test_success_first_step_magnitude_is_lr(self):
        p = parameter([0.0], name="x")
        adam_step([p], [np.ones(1)], OptimizerState(), 0.01)
        self.assertAlmostEqual(float(p.data[0]), -0.01, places=6)

    def test_success_quadratic_convergence(self):
        p = parameter([0.0], name="x")
        state = OptimizerState()
        for _ in range(500):
            adam_step([p], [2.0 * (p.data - 1.0)], state, 0.01)
        self.assertLess(abs(float(p.data[0]) - 1.0), 1e-3)

    def test_success_missing_grad_counts_as_zero(self):
        p = parameter([[3.0]], name="w")
        adam_step([p], [None], OptimizerState(), 0.1)
        self.assertEqual(p.values, [3.0])


class TrainConfigTest(SimpleTestCase):
    def test_success_defaults_from_settings(self):
        config = TrainConfig.from_settings()
        self.assertEqual(config.agg, settings.GREA["AGG"])
        self.assertEqual(config.pred_layers, settings.GREA["PRED_LAYERS"])
        self.assertEqual(config.seed, settings.GREA_SEED)

    @override_settings(GREA_SEED=41)
    def test_success_seed_from_environment_setting(self):
        self.assertEqual(TrainConfig.from_settings().seed, 41)
        self.assertEqual(TrainConfig.from_settings(seed=3).seed, 3)

    def test_success_separator_kind_follows_encoder(self):
        sep, pred = TrainConfig(encoder="gcn").encoder_configs(4)
        self.assertEqual((sep.kind, pred.kind), ("gcn", "gcn"))
        sep, _ = TrainConfig(encoder="gcn", sep_encoder="gin").encoder_configs(4)
        self.assertEqual(sep.kind, "gin")

    def test_fail_invalid_values(self):
        for bad in ({"t_sep": 0}, {"gamma": 1.5}, {"agg": "prod"}, {"task": "multiclass"},
                    {"log_target": True, "task": "binary"}):
            with self.assertRaises(ConfigError, msg=str(bad)):
                TrainConfig(**bad)

    def test_fail_unknown_key(self):
        with self.assertRaises(ConfigError):
            TrainConfig.from_settings(dropout=0.1)

    def test_fail_history_epoch_order(self):
        history = RunHistory(metric_name="valid_auc", higher_is_better=True)
        history.append(_record(1))
        with self.assertRaises(ConfigError):
            history.append(_record(1))

    def test_success_history_without_timings(self):
        history = RunHistory(metric_name="valid_auc", higher_is_better=True)
        history.append(_record(0))
        self.assertNotIn("wall_time", history.to_dict()["epochs"][0])
        self.assertIn("wall_time", history.to_dict(include_timings=True)["epochs"][0])


class RunConfigTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "cfg.json")
        super().setUp()

    def tearDown(self):
        self.tmp.cleanup()
        super().tearDown()

    def test_success_overrides_parse_json_values(self):
        self.assertEqual(
            parse_overrides(["alpha=0", "agg=mean", "synthetic.num_graphs=50", "diag_in_rep=false"]),
            {"alpha": 0, "agg": "mean", "synthetic": {"num_graphs": 50}, "diag_in_rep": False},
        )

    def test_success_file_then_flags(self):
        _write(self.path, '{"alpha": 0.5, "seed": 7, "synthetic": {"num_graphs": 20}}')
        run = load_run_config(self.path, ["alpha=2"])
        config = train_config_from(run)
        self.assertEqual((config.alpha, config.seed), (2.0, 7))
        self.assertEqual(train_config_from(run, seed=9).seed, 9)
        spec = synthetic_spec_from(run)
        self.assertEqual((spec.num_graphs, spec.seed), (20, 7))

    def test_fail_unknown_key(self):
        _write(self.path, '{"alpha": 0.5, "dropout": 0.1}')
        with self.assertRaises(ConfigError) as ctx:
            load_run_config(self.path)
        self.assertIn("dropout", str(ctx.exception))

    def test_fail_unknown_nested_key(self):
        _write(self.path, '{"synthetic": {"num_nodes": 3}}')
        with self.assertRaises(ConfigError):
            load_run_config(self.path)

    def test_fail_missing_file(self):
        with self.assertRaises(DataFormatError):
            load_run_config(os.path.join(self.tmp.name, "missing.json"))


class TrainLoopTest(SimpleTestCase):
    def setUp(self):
        self.graphs = _separable_graphs(40)
        self.splits = split(40, seed=0)
        super().setUp()

    def test_success_plain_gnn_loss_decreases(self):
        config = _tiny_config(alpha=0.0, beta=0.0, mask_mode="full", num_rounds=20, t_pred=1, patience=20)
        _, history = train(self.graphs, self.splits, config)
        self.assertEqual(len(history.epochs), 20)
        self.assertTrue(all(e.phase == "pred" for e in history.epochs))
        self.assertLess(history.epochs[-1].loss_rem, history.epochs[0].loss_rem)

    def test_success_deterministic_history(self):
        config = _tiny_config(num_rounds=2)
        _, first = train(self.graphs, self.splits, config)
        _, second = train(self.graphs, self.splits, config)
        self.assertEqual(first.to_dict(), second.to_dict())

    def test_success_phase_isolation(self):
        trainer = AlternatingTrainer(self.graphs, self.splits, _tiny_config())
        before_pred = trainer.model.predictor.snapshot()
        before_sep = trainer.model.separator.snapshot()
        trainer.run_epoch("sep", 0)
        for name, values in trainer.model.predictor.snapshot().items():
            np.testing.assert_array_equal(values, before_pred[name])
        self.assertTrue(any(
            not np.array_equal(v, before_sep[k]) for k, v in trainer.model.separator.snapshot().items()
        ))

        before_sep = trainer.model.separator.snapshot()
        trainer.run_epoch("pred", 0)
        for name, values in trainer.model.separator.snapshot().items():
            np.testing.assert_array_equal(values, before_sep[name])

    def test_success_epoch_index_and_alternation(self):
        config = _tiny_config(num_rounds=2, t_sep=1, t_pred=2, patience=5)
        _, history = train(self.graphs, self.splits, config)
        self.assertEqual([e.phase for e in history.epochs], ["sep", "pred", "pred"] * 2)
        self.assertEqual([e.epoch for e in history.epochs], list(range(6)))

    def test_success_returns_best_validation_checkpoint(self):
        graphs = gen_planted_motif(SyntheticSpec(num_graphs=60, seed=5))
        labels = [g.label for g in graphs]
        valid = [labels.index(0.0), labels.index(1.0), len(graphs) - 1]
        train_idx = [i for i in range(60) if i not in valid]
        splits = DatasetSplit(train_idx, valid, [])
        config = _tiny_config(num_rounds=3, patience=3)
        model, history = train(graphs, splits, config)
        self.assertEqual(history.metric_name, "valid_auc")
        best = max(e.valid_metric for e in history.epochs)
        self.assertEqual(history.best_metric, best)
        self.assertEqual(evaluate(model, graphs, valid, "binary").auc, best)

    def test_success_falls_back_to_training_loss(self):
        splits = DatasetSplit(self.splits.train, [], self.splits.test)
        _, history = train(self.graphs, splits, _tiny_config(num_rounds=1))
        self.assertEqual(history.metric_name, "train_loss")

    def test_fail_nan_loss_names_phase(self):
        graphs = [Graph(g.node_features, g.edges, label=float(i)) for i, g in enumerate(self.graphs)]
        graphs[self.splits.train[0]] = Graph(graphs[0].node_features, graphs[0].edges, label=math.inf)
        with self.assertRaises(NumericalError) as ctx:
            train(graphs, self.splits, _tiny_config(task="regression"))
        self.assertEqual(ctx.exception.phase, "sep")
        self.assertEqual(ctx.exception.epoch, 0)

    def test_fail_empty_train_split(self):
        with self.assertRaises(ConfigError) as ctx:
            train(self.graphs, DatasetSplit([], [0], [1]), _tiny_config())
        self.assertEqual(ctx.exception.error_code, errors.E004_EMPTY_TRAIN_SPLIT["error_code"])

    def test_fail_batch_of_one(self):
        with self.assertRaises(ConfigError):
            train(self.graphs, self.splits, _tiny_config(batch_size=1))


class AggregationTrainTest(SimpleTestCase):
    def setUp(self):
        spec = SyntheticSpec(num_graphs=50, seed=6)
        self.graphs = gen_planted_motif(spec)
        self.splits = planted_split(spec)
        super().setUp()

    def test_success_every_aggregation_trains(self):
        for agg in ("sum", "mean", "max", "concat"):
            _, history = train(self.graphs, self.splits, _tiny_config(agg=agg, num_rounds=1))
            self.assertEqual(len(history.epochs), 3, msg=agg)
            self.assertTrue(all(np.isfinite(e.objective) for e in history.epochs), msg=agg)

    def test_success_concat_trains_wide_head(self):
        trainer = AlternatingTrainer(self.graphs, self.splits, _tiny_config(agg="concat"))
        (W, _) = mlp_layers(trainer.model.predictor, PRED_HEAD_CAT)[0]
        self.assertEqual(W.shape[0], 2 * 6)
        before = W.data.copy()
        trainer.run_epoch("pred", 0)
        self.assertFalse(np.array_equal(W.data, before))


class TrainedCheckpointDeterminismTest(SimpleTestCase):
    def test_success_same_seed_same_bytes(self):
        spec = SyntheticSpec(num_graphs=40, seed=2)
        graphs, splits = gen_planted_motif(spec), planted_split(spec)
        with tempfile.TemporaryDirectory() as tmp:
            paths = [os.path.join(tmp, f"run{i}.json") for i in range(2)]
            for path in paths:
                model, _ = train(graphs, splits, _tiny_config(seed=7))
                save_checkpoint(path, model, _tiny_config(seed=7))
            with open(paths[0], "rb") as a, open(paths[1], "rb") as b:
                self.assertEqual(a.read(), b.read())


class EvaluateTest(SimpleTestCase):
    def test_success_perfect_regressor(self):
        graphs = [Graph([[x]], [], label=x) for x in (0.5, 1.0, 2.0, 3.5)]
        model = _identity_regressor()
        record = evaluate(model, graphs, range(4), "regression", mask_mode="full")
        self.assertAlmostEqual(record.r2, 1.0, places=12)
        self.assertAlmostEqual(record.rmse, 0.0, places=12)

    def test_success_constant_mean_predictor(self):
        graphs = [Graph([[x]], [], label=x) for x in (0.5, 1.0, 2.0, 3.5)]
        model = _identity_regressor()
        (W, b) = mlp_layers(model.predictor, PRED_HEAD)[-1]
        W.assign(np.zeros(W.shape))
        b.assign(np.full(b.shape, np.mean([0.5, 1.0, 2.0, 3.5])))
        record = evaluate(model, graphs, range(4), "regression", mask_mode="full")
        self.assertAlmostEqual(record.r2, 0.0, places=12)

    def test_success_matches_metric_functions(self):
        graphs = gen_planted_motif(SyntheticSpec(num_graphs=30, seed=2))
        config = TrainConfig(sep_dim=4, pred_dim=4, pred_layers=2)
        sep, pred = config.encoder_configs(6)
        model = ModelParams.initialize(sep, pred, "sum", "binary", 0)
        record = evaluate(model, graphs, range(30), "binary")
        preds, masks = predict_graphs(model, graphs, range(30))
        labels = [g.label for g in graphs]
        self.assertEqual(record.auc, scores.roc_auc(preds, labels))
        self.assertEqual(record.accuracy, scores.accuracy(preds, labels))
        self.assertEqual(record.n_examples, 30)
        self.assertEqual([len(m) for m in masks], [g.num_nodes for g in graphs])
        self.assertIsNotNone(record.rationale_precision)

    def test_fail_empty_split(self):
        with self.assertRaises(ConfigError) as ctx:
            evaluate(_identity_regressor(), [], [], "regression")
        self.assertEqual(ctx.exception.error_code, errors.E004_EMPTY_EVAL_SPLIT["error_code"])

    def test_fail_feature_width(self):
        graphs = [Graph([[1.0, 2.0]], [], label=1.0)]
        with self.assertRaises(ConfigError) as ctx:
            evaluate(_identity_regressor(), graphs, [0], "regression")
        self.assertIn("F=1", str(ctx.exception))

    def test_success_log_target(self):
        graphs = [Graph([[1.0]], [], label=math.e), Graph([[1.0]], [], label=1.0)]
        np.testing.assert_allclose(targets_for(graphs, [0, 1], "regression", log_target=True), [1.0, 0.0])
        with self.assertRaises(ConfigError):
            targets_for([Graph([[1.0]], [], label=0.0)], [0], "regression", log_target=True)


class CheckpointTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "run", "ckpt.json")
        super().setUp()

    def tearDown(self):
        self.tmp.cleanup()
        super().tearDown()

    def test_success_round_trip(self):
        config = _tiny_config(agg="concat")
        sep, pred = config.encoder_configs(2)
        model = ModelParams.initialize(sep, pred, "concat", "binary", 3)
        save_checkpoint(self.path, model, config)
        loaded, loaded_config = load_checkpoint(self.path)
        self.assertEqual(loaded_config, config)
        for group, store in model.stores():
            other = dict(loaded.stores())[group]
            for name, t in store.named():
                np.testing.assert_array_equal(other[name].data, t.data)

    def test_fail_bad_header(self):
        _write(self.path, '{"format": "OTHER", "params": {}}')
        with self.assertRaises(ConfigError) as ctx:
            load_checkpoint(self.path)
        self.assertEqual(ctx.exception.error_code, errors.E003_INVALID_CHECKPOINT["error_code"])


class SweepTest(SimpleTestCase):
    def test_success_seed_summary(self):
        graphs = _separable_graphs(20)
        report = sweep(graphs, split(20, seed=1), _tiny_config(num_rounds=1), [1, 2],
                       overrides={"gamma": 0.3}, compare_alpha0=True)
        self.assertEqual(report["seeds"], [1, 2])
        self.assertEqual(len(report["grea"]["runs"]), 2)
        self.assertIn("accuracy", report["grea"]["mean"])
        self.assertEqual(report["config"]["gamma"], 0.3)
        self.assertIn("alpha0", report)


@unittest.skipUnless(settings.GREA_RUN_SLOW_TESTS, "GREA_RUN_SLOW_TESTS=true 일 때만 실행")
class PlantedMotifEndToEndTest(SimpleTestCase):
    """1000 개 planted-motif, 기본 설정, seed 1/2/3 의 test 지표 평균"""

    def test_success_default_config_over_three_seeds(self):
        spec = SyntheticSpec(num_graphs=1000, spurious_bias=0.9, split_ratios=(0.6, 0.1, 0.3), seed=0)
        graphs = gen_planted_motif(spec)
        report = sweep(graphs, planted_split(spec), TrainConfig.from_settings(), [1, 2, 3], compare_alpha0=True)

        self.assertGreaterEqual(report["grea"]["mean"]["auc"], 0.90)
        self.assertGreaterEqual(report["grea"]["mean"]["rationale_precision"], 0.70)
        # 교체 증강을 끄면 (alpha=0) 평균 test AUC 가 올라가지 않는다
        self.assertGreaterEqual(report["grea"]["mean"]["auc"], report["alpha0"]["mean"]["auc"])


# === Utility ===
def _tiny_config(**changes) -> TrainConfig:
    values = dict(sep_dim=6, pred_dim=6, sep_layers=1, pred_layers=2, batch_size=8, num_rounds=2,
                  learning_rate=0.01, seed=0, gamma=0.4)
    values.update(changes)
    return TrainConfig(**values)


def _separable_graphs(count: int):
    """라벨 1 은 [1, 0] 특성, 라벨 0 은 [0, 1] 특성의 3노드 path"""
    graphs = []
    for i in range(count):
        label = i % 2
        features = np.tile([[1.0, 0.0]] if label else [[0.0, 1.0]], (3, 1))
        graphs.append(Graph(features, [(0, 1), (1, 2)], label=float(label)))
    return graphs


def _identity_regressor() -> ModelParams:
    """단일 노드 그래프에서 예측 = 노드 특성 (x > 0)"""
    config = TrainConfig(encoder="gcn", pred_dim=1, sep_dim=1, pred_layers=1, sep_layers=1, task="regression")
    sep, pred = config.encoder_configs(1)
    model = ModelParams.initialize(sep, pred, "sum", "regression", 0)
    for name, t in model.predictor.named():
        t.assign(np.ones(t.shape) if name.endswith(".W") else np.zeros(t.shape))
    return model


def _record(epoch: int) -> EpochRecord:
    return EpochRecord(epoch=epoch, round=0, phase="pred", loss_rem=0.5, loss_rep=0.5, loss_reg=0.0,
                       objective=1.0, valid_metric=0.5, rationale_fraction=1.0, wall_time=0.01)


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
