import math

import numpy as np
from django.test import SimpleTestCase

from apps.common.exceptions import ConfigError, ShapeError
from apps.gnn.encoder import encode, readout
from apps.gnn.models import EncoderConfig, mlp_layers
from apps.graphs.models import Graph, GraphBatch, disjoint_union
from apps.rationale import losses
from apps.rationale.audit import loss_gradient_audit
from apps.rationale.augment import env_replace, separate
from apps.rationale.models import PRED_GNN, PRED_HEAD, SEP_MLP, AugConfig, ModelParams, RationaleMask, SeparatedReps
from apps.rationale.pipeline import forward, rationale_pass
from apps.rationale.predictor import head_for, predict
from apps.rationale.separator import compute_mask, rationale_fraction
from apps.tensor import ops
from apps.tensor.gradcheck import grad_check
from apps.tensor.tensor import Tape, Tensor, backward, parameter
from base.enums import errors


class SeparatorTest(SimpleTestCase):
    def setUp(self):
        self.model = _small_model("sum")
        self.batch = GraphBatch.from_graphs(_random_graphs(3, seed=1))
        super().setUp()

    def test_success_zero_params_give_half(self):
        for _, p in self.model.separator.named():
            p.assign(np.zeros(p.shape))
        mask = compute_mask(self.batch, self.model)
        np.testing.assert_array_equal(mask.values, np.full(self.batch.num_nodes, 0.5))

    def test_success_large_bias_saturates_to_one(self):
        last = mlp_layers(self.model.separator, SEP_MLP)[-1]
        last[0].assign(np.zeros(last[0].shape))
        last[1].assign(np.full(last[1].shape, 60.0))
        mask = compute_mask(self.batch, self.model)
        self.assertTrue(np.all(mask.values > 1.0 - 1e-12))

    def test_success_mask_in_open_interval(self):
        mask = compute_mask(self.batch, self.model)
        self.assertTrue(np.all((mask.values > 0.0) & (mask.values < 1.0)))
        self.assertEqual(len(mask.per_graph()), 3)

    def test_success_mean_mask_gradient(self):
        params = self.model.separator.tensors()
        err = grad_check(lambda ps: ops.mean(compute_mask(self.batch, self.model).m), params)
        self.assertLess(err, 1e-4)

    def test_success_rationale_fraction(self):
        mask = RationaleMask(Tensor([[0.9], [0.2], [0.7], [0.1]]), np.array([0, 0, 1, 1]), 2)
        np.testing.assert_allclose(rationale_fraction(mask), [0.5, 0.5])


class AugmentTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(3)
        self.segments = np.array([0, 0, 0, 1, 1, 2, 2, 2, 2])
        self.H = Tensor(self.rng.normal(size=(9, 4)))
        super().setUp()

    def test_success_full_mask_gives_sum_readout(self):
        mask = RationaleMask(Tensor(np.ones((9, 1))), self.segments, 3)
        reps = separate(self.H, mask, 3)
        np.testing.assert_allclose(reps.h_r.data, ops.segment_sum(self.H, self.segments, 3).data)
        np.testing.assert_array_equal(reps.h_e.data, np.zeros((3, 4)))

    def test_success_half_mask_is_symmetric(self):
        mask = RationaleMask(Tensor(np.full((9, 1), 0.5)), self.segments, 3)
        reps = separate(self.H, mask, 3)
        half = 0.5 * ops.segment_sum(self.H, self.segments, 3).data
        np.testing.assert_allclose(reps.h_r.data, half, atol=1e-12)
        np.testing.assert_allclose(reps.h_e.data, half, atol=1e-12)

    def test_success_binary_mask_subset_sum(self):
        H = Tensor(self.rng.normal(size=(4, 3)))
        mask = RationaleMask(Tensor([[1.0], [0.0], [1.0], [0.0]]), np.zeros(4, dtype=np.int64), 1)
        reps = separate(H, mask, 1)
        np.testing.assert_array_equal(reps.h_r.data[0], H.data[0] + H.data[2])
        np.testing.assert_array_equal(reps.h_e.data[0], H.data[1] + H.data[3])

    def test_success_decomposition_for_any_mask(self):
        full = ops.segment_sum(self.H, self.segments, 3).data
        for seed in range(5):
            m = np.random.default_rng(seed).uniform(size=(9, 1))
            reps = separate(self.H, RationaleMask(Tensor(m), self.segments, 3), 3)
            np.testing.assert_allclose(reps.h_r.data + reps.h_e.data, full, atol=1e-10)

    def test_fail_separate_row_mismatch(self):
        mask = RationaleMask(Tensor(np.ones((5, 1))), np.zeros(5, dtype=np.int64), 1)
        with self.assertRaises(ShapeError):
            separate(self.H, mask, 1)

    def test_success_zero_environment_rows_constant(self):
        h_r = Tensor(self.rng.normal(size=(3, 2)))
        grid = env_replace(SeparatedReps(h_r, Tensor(np.zeros((3, 2)))), "sum")
        self.assertEqual(grid.shape, (3, 3, 2))
        for i in range(3):
            for j in range(3):
                np.testing.assert_array_equal(grid.data[i, j], h_r.data[i])

    def test_success_diagonal_is_full_readout(self):
        m = self.rng.uniform(size=(9, 1))
        reps = separate(self.H, RationaleMask(Tensor(m), self.segments, 3), 3)
        grid = env_replace(reps, "sum")
        full = ops.segment_sum(self.H, self.segments, 3).data
        for i in range(3):
            np.testing.assert_allclose(grid.data[i, i], full[i], atol=1e-10)

    def test_success_all_aggregations_match_loop(self):
        reps = SeparatedReps(Tensor(self.rng.normal(size=(2, 3))), Tensor(self.rng.normal(size=(2, 3))))
        r, e = reps.h_r.data, reps.h_e.data
        expected = {
            "sum": lambda a, b: a + b,
            "mean": lambda a, b: (a + b) / 2.0,
            "max": np.maximum,
            "concat": lambda a, b: np.concatenate([a, b]),
        }
        for agg, fn in expected.items():
            grid = env_replace(reps, agg)
            for i in range(2):
                for j in range(2):
                    np.testing.assert_allclose(grid.data[i, j], fn(r[i], e[j]), atol=0, rtol=0, err_msg=agg)
        self.assertEqual(env_replace(reps, "concat").shape, (2, 2, 6))

    def test_fail_unknown_aggregation(self):
        reps = SeparatedReps(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))
        with self.assertRaises(ConfigError) as ctx:
            env_replace(reps, "prod")
        self.assertEqual(ctx.exception.error_code, errors.E003_UNKNOWN_AGG["error_code"])

    def test_success_latent_matches_explicit_union(self):
        model = _small_model("sum")
        graphs = _random_graphs(3, seed=7)
        batch = GraphBatch.from_graphs(graphs)
        result = rationale_pass(batch, model)
        grid = env_replace(result.reps, "sum").data
        masks = result.mask.per_graph()
        for i in range(3):
            for j in range(3):
                union = GraphBatch.from_graphs([disjoint_union(graphs[i], graphs[j])])
                H = encode(union, model.pred_encoder, model.predictor, PRED_GNN).data
                weights = np.concatenate([masks[i], 1.0 - masks[j]]).reshape(-1, 1)
                explicit = (weights * H).sum(axis=0)
                np.testing.assert_allclose(grid[i, j], explicit, atol=1e-9)


class PredictorTest(SimpleTestCase):
    def test_success_identity_head_passes_through(self):
        head = [(Tensor([[1.0]]), Tensor([[0.0]]))]
        out = predict(Tensor([[2.5], [-1.0]]), head)
        self.assertEqual(out.values, [2.5, -1.0])

    def test_success_duplicate_rows_identical(self):
        model = _small_model("sum")
        row = np.random.default_rng(0).normal(size=(1, 4))
        out = predict(Tensor(np.vstack([row, row])), head_for(model, 4))
        self.assertEqual(out.values[0], out.values[1])

    def test_success_large_inputs_stay_finite(self):
        model = _small_model("sum")
        for magnitude in (1.0, 10.0, 100.0, 1000.0):
            h = Tensor(np.full((2, 4), magnitude) * np.array([[1.0], [-1.0]]))
            self.assertTrue(np.all(np.isfinite(predict(h, head_for(model, 4)).data)))

    def test_fail_width_mismatch(self):
        model = _small_model("sum")
        with self.assertRaises(ConfigError) as ctx:
            predict(Tensor(np.zeros((2, 8))), head_for(model, 4))
        self.assertEqual(ctx.exception.error_code, errors.E003_PREDICTOR_WIDTH["error_code"])

    def test_fail_concat_width_without_concat_head(self):
        model = _small_model("sum")
        with self.assertRaises(ConfigError):
            head_for(model, 8)

    def test_success_concat_head_is_separate(self):
        model = _small_model("concat")
        self.assertEqual(head_for(model, 8)[0][0].shape, (8, 4))
        self.assertEqual(head_for(model, 4)[0][0].shape, (4, 4))


class LossTest(SimpleTestCase):
    def test_success_loss_rem_confident(self):
        loss = losses.loss_rem(Tensor([50.0, -50.0]), [1.0, 0.0], "binary")
        self.assertLess(loss.item(), 1e-12)

    def test_success_loss_rem_ln2(self):
        self.assertAlmostEqual(losses.loss_rem(Tensor([0.0]), [1.0], "binary").item(), math.log(2.0), places=12)

    def test_success_loss_rem_matches_bce(self):
        z = Tensor([0.3, -1.2, 2.0])
        y = [1.0, 0.0, 0.0]
        self.assertEqual(losses.loss_rem(z, y, "binary").item(), ops.bce_with_logits(z, y).item())

    def test_success_loss_rem_regression_is_mse(self):
        self.assertAlmostEqual(losses.loss_rem(Tensor([1.0, 2.0]), [1.0, 4.0], "regression").item(), 2.0)

    def test_fail_task_label_mismatch(self):
        with self.assertRaises(ConfigError) as ctx:
            losses.loss_rem(Tensor([0.0]), [0.5], "binary")
        self.assertEqual(ctx.exception.error_code, errors.E003_TASK_LABEL_MISMATCH["error_code"])

    def test_fail_unlabeled_graph(self):
        with self.assertRaises(ConfigError):
            losses.loss_rem(Tensor([0.0]), [np.nan], "regression")

    def test_success_loss_rep_perfect(self):
        grid = Tensor([[40.0, 40.0], [-40.0, -40.0]])
        self.assertLess(losses.loss_rep(grid, [1.0, 0.0], "binary").item(), 1e-12)

    def test_success_loss_rep_single_graph(self):
        grid = Tensor([[0.7]])
        self.assertEqual(
            losses.loss_rep(grid, [1.0], "binary").item(),
            losses.loss_rem(Tensor([0.7]), [1.0], "binary").item(),
        )

    def test_success_loss_rep_double_loop(self):
        rng = np.random.default_rng(4)
        z = rng.normal(size=(3, 3))
        y = np.array([1.0, 0.0, 1.0])
        got = losses.loss_rep(Tensor(z), y, "binary").item()
        got_offdiag = losses.loss_rep(Tensor(z), y, "binary", include_diagonal=False).item()
        self.assertAlmostEqual(got, _naive_rep(z, y, _bce, diagonal=True), places=12)
        self.assertAlmostEqual(got_offdiag, _naive_rep(z, y, _bce, diagonal=False), places=12)

    def test_success_loss_rep_regression_double_loop(self):
        rng = np.random.default_rng(5)
        z = rng.normal(size=(3, 3))
        y = rng.normal(size=3)
        got = losses.loss_rep(Tensor(z), y, "regression").item()
        self.assertAlmostEqual(got, _naive_rep(z, y, lambda p, t: (p - t) ** 2, diagonal=True), places=12)

    def test_success_loss_rep_excluded_diagonal_single_graph(self):
        self.assertEqual(losses.loss_rep(Tensor([[3.0]]), [1.0], "binary", include_diagonal=False).item(), 0.0)

    def test_fail_loss_rep_not_square(self):
        with self.assertRaises(ShapeError):
            losses.loss_rep(Tensor(np.zeros((2, 3))), [1.0, 0.0], "binary")

    def test_success_loss_reg_balanced(self):
        mask = RationaleMask(Tensor([[1.0], [1.0], [0.0], [0.0]]), np.zeros(4, dtype=np.int64), 1)
        self.assertEqual(losses.loss_reg(mask, 0.5, 0.5).item(), 0.0)

    def test_success_loss_reg_mask_at_gamma(self):
        mask = RationaleMask(Tensor(np.full((5, 1), 0.3)), np.zeros(5, dtype=np.int64), 1)
        # term1 = 0, 0.5 를 넘는 노드 없음 -> term2 = -gamma
        self.assertAlmostEqual(losses.loss_reg(mask, 0.3, 0.5).item(), -0.3, places=12)

    def test_success_loss_reg_gradient_is_inverse_count(self):
        m = parameter([[0.9], [0.2], [0.3], [0.8]])
        with Tape():
            backward(losses.loss_reg(RationaleMask(m, np.zeros(4, dtype=np.int64), 1), 0.4))
        np.testing.assert_allclose(m.grad, np.full((4, 1), 0.25))

    def test_success_loss_reg_gradcheck_away_from_threshold(self):
        m = parameter([[0.9], [0.2], [0.3], [0.8], [0.1]])
        seg = np.array([0, 0, 0, 1, 1])
        err = grad_check(lambda ps: losses.loss_reg(RationaleMask(ps[0], seg, 2), 0.4), [m])
        self.assertLess(err, 1e-8)

    def test_success_weighted_sums(self):
        self.assertEqual(losses.loss_pred(0.5, 0.25, 0.0), 0.5)
        self.assertEqual(losses.loss_sep(0.5, 0.25, 0.1, 1.0, 0.0), losses.loss_pred(0.5, 0.25, 1.0))
        self.assertAlmostEqual(losses.loss_sep(0.5, 0.25, 0.1, 1.0, 1.0), 0.85, places=12)

    def test_success_weighted_sums_on_tensors(self):
        out = losses.loss_sep(Tensor(0.5), Tensor(0.25), Tensor(0.1), 1.0, 1.0)
        self.assertAlmostEqual(out.item(), 0.85, places=12)


class ForwardTest(SimpleTestCase):
    def setUp(self):
        self.batch = GraphBatch.from_graphs(_random_graphs(3, seed=11))
        super().setUp()

    def test_success_losses_non_negative(self):
        result = forward(self.batch, _small_model("sum"), AugConfig())
        for value in (result.l_rem, result.l_rep, result.l_pred):
            self.assertGreaterEqual(value.item(), 0.0)
        self.assertEqual(result.y_pair.shape, (3, 3))

    def test_success_loss_sep_gradient_audit(self):
        for agg in ("sum", "concat"):
            model = _small_model(agg)
            params = model.separator.tensors() + model.predictor.tensors()
            aug = AugConfig(agg=agg, gamma=0.3)
            err = grad_check(lambda ps: forward(self.batch, model, aug).l_sep, params)
            self.assertLess(err, 1e-4, msg=agg)

    def test_success_loss_pred_gradient_audit(self):
        model = _small_model("mean")
        params = model.predictor.tensors()
        err = grad_check(lambda ps: forward(self.batch, model, AugConfig(agg="mean")).l_pred, params)
        self.assertLess(err, 1e-4)

    def test_success_audit_leaves_no_grads(self):
        model = _small_model("sum")
        result = loss_gradient_audit(self.batch, model, AugConfig(), "learned")
        self.assertTrue(result["passed"])
        for _, store in model.stores():
            self.assertTrue(all(t.grad is None for t in store.tensors()))
        with Tape():
            backward(forward(self.batch, model, AugConfig()).l_sep)
        self.assertTrue(all(t.grad is not None for t in model.separator.tensors()))

    def test_success_saturated_mask_predicts_full_graph(self):
        model = _small_model("sum")
        last = mlp_layers(model.separator, SEP_MLP)[-1]
        last[0].assign(np.zeros(last[0].shape))
        last[1].assign(np.full(last[1].shape, 60.0))
        result = rationale_pass(self.batch, model)
        np.testing.assert_allclose(result.reps.h_e.data, 0.0, atol=1e-12)
        H = encode(self.batch, model.pred_encoder, model.predictor, PRED_GNN)
        full = predict(readout(H, self.batch.segments, 3), mlp_layers(model.predictor, PRED_HEAD))
        np.testing.assert_allclose(result.y_r.data, full.data, atol=1e-9)

    def test_success_full_mask_mode(self):
        result = rationale_pass(self.batch, _small_model("sum"), mask_mode="full")
        np.testing.assert_array_equal(result.reps.h_e.data, 0.0)


# === Utility ===
def _small_model(agg: str, task: str = "binary", seed: int = 0) -> ModelParams:
    encoder = EncoderConfig(kind="gin", num_layers=2, hidden_dim=4, in_dim=3)
    return ModelParams.initialize(encoder, encoder, agg, task, seed)


def _random_graphs(count: int, seed: int):
    rng = np.random.default_rng(seed)
    graphs = []
    for i in range(count):
        n = int(rng.integers(3, 6))
        edges = [(k, k + 1) for k in range(n - 1)]
        graphs.append(Graph(rng.normal(size=(n, 3)), edges, label=float(i % 2)))
    return graphs


def _bce(z: float, y: float) -> float:
    return max(z, 0.0) - z * y + math.log1p(math.exp(-abs(z)))


def _naive_rep(z: np.ndarray, y: np.ndarray, loss_fn, diagonal: bool) -> float:
    B = len(y)
    per_row = []
    for i in range(B):
        cols = [j for j in range(B) if diagonal or j != i]
        per_row.append(sum(loss_fn(z[i, j], y[i]) for j in cols) / len(cols))
    return sum(per_row) / B
