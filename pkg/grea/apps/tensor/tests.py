import math

import numpy as np
from django.test import SimpleTestCase

from apps.common.exceptions import ConfigError, ContractError, SegmentIndexError, ShapeError
from apps.tensor import ops
from apps.tensor.gradcheck import analytic_grads, grad_check
from apps.tensor.params import ParamStore, add_linear
from apps.tensor.tensor import Tape, Tensor, backward, no_grad, parameter


class TensorOpsTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(0)
        super().setUp()

    def test_success_matmul_identity(self):
        out = ops.matmul(Tensor(np.eye(2)), Tensor([[1, 2], [3, 4]]))
        np.testing.assert_array_equal(out.data, [[1, 2], [3, 4]])

    def test_success_matmul_projector(self):
        out = ops.matmul(Tensor([[1, 0], [0, 0]]), Tensor([[5], [7]]))
        np.testing.assert_array_equal(out.data, [[5], [0]])

    def test_fail_matmul_shape_names_both_shapes(self):
        with self.assertRaises(ShapeError) as ctx:
            ops.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))
        self.assertIn("(2, 3)", str(ctx.exception))

    def test_success_sigmoid_at_zero(self):
        x = parameter([0.0])
        with Tape():
            s = ops.sigmoid(x)
            backward(ops.total(s))
        self.assertEqual(s.values, [0.5])
        self.assertAlmostEqual(float(x.grad[0]), 0.25)

    def test_success_relu_negative(self):
        x = parameter([-3.0])
        with Tape():
            r = ops.relu(x)
            backward(ops.total(r))
        self.assertEqual(r.values, [0.0])
        self.assertEqual(float(x.grad[0]), 0.0)

    def test_success_column_broadcast_mul(self):
        out = ops.mul(Tensor([[1.0], [0.0]]), Tensor([[2, 3], [4, 5]]))
        np.testing.assert_array_equal(out.data, [[2, 3], [0, 0]])

    def test_fail_not_broadcastable(self):
        with self.assertRaises(ShapeError):
            ops.add(Tensor(np.zeros((2, 3))), Tensor(np.zeros((3, 2))))

    def test_fail_unknown_elementwise(self):
        with self.assertRaises(ConfigError):
            ops.elementwise("tanh", Tensor([1.0]))

    def test_success_segment_sum(self):
        out = ops.segment_sum(Tensor([[1], [2], [3], [4]]), [0, 0, 1, 1], 2)
        np.testing.assert_array_equal(out.data, [[3], [7]])

    def test_success_segment_sum_empty_segment(self):
        out = ops.segment_sum(Tensor([[1.0], [2.0]]), [0, 1], 3)
        np.testing.assert_array_equal(out.data[2], [0.0])

    def test_success_segment_sum_unsorted_ids(self):
        out = ops.segment_sum(Tensor([[1], [2], [3]]), [1, 0, 1], 2)
        np.testing.assert_array_equal(out.data, [[2], [4]])

    def test_fail_segment_out_of_range(self):
        with self.assertRaises(SegmentIndexError):
            ops.segment_sum(Tensor([[1.0], [2.0]]), [0, 2], 2)

    def test_success_segment_partition_of_unity(self):
        x = Tensor(self.rng.normal(size=(7, 3)))
        seg = [0, 2, 1, 0, 2, 2, 1]
        out = ops.segment_sum(x, seg, 3)
        np.testing.assert_allclose(out.data.sum(axis=0), x.data.sum(axis=0), atol=1e-12)

    def test_success_concat_rows(self):
        out = ops.concat_rows(Tensor([[1.0]]), Tensor([[2.0]]))
        np.testing.assert_array_equal(out.data, [[1, 2]])
        a = Tensor(self.rng.normal(size=(3, 2)))
        out = ops.concat_rows(a, Tensor(np.zeros((3, 4))))
        np.testing.assert_array_equal(out.data[:, :2], a.data)

    def test_fail_concat_row_mismatch(self):
        with self.assertRaises(ShapeError):
            ops.concat_rows(Tensor(np.zeros((2, 1))), Tensor(np.zeros((3, 1))))

    def test_success_bce_values(self):
        self.assertAlmostEqual(ops.bce_with_logits(Tensor([0.0]), [1.0]).item(), math.log(2.0), places=12)
        saturated = ops.bce_with_logits(Tensor([50.0]), [1.0]).item()
        self.assertTrue(np.isfinite(saturated))
        self.assertLess(saturated, 1e-20)
        self.assertTrue(np.isfinite(ops.bce_with_logits(Tensor([-800.0]), [1.0]).item()))

    def test_success_bce_gradient(self):
        z = parameter([0.0])
        with Tape():
            backward(ops.bce_with_logits(z, [1.0]))
        self.assertAlmostEqual(float(z.grad[0]), -0.5)

    def test_fail_bce_non_binary_target(self):
        for targets in ([0.5], [float("nan")], [1.0, 2.0]):
            with self.assertRaises(ContractError):
                ops.bce_with_logits(Tensor(np.zeros(len(targets))), targets)

    def test_success_mse(self):
        t = Tensor([1.0, 2.0])
        self.assertEqual(ops.mse(t, [1.0, 2.0]).item(), 0.0)
        self.assertEqual(ops.mse(Tensor([0.0]), [2.0]).item(), 4.0)

    def test_success_forward_without_tape_records_nothing(self):
        w = parameter([[1.0]])
        with no_grad():
            out = ops.matmul(w, Tensor([[2.0]]))
        self.assertFalse(out.grad_enabled)


class BackwardTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(1)
        super().setUp()

    def test_success_sum_gives_ones(self):
        x = parameter(np.arange(5.0))
        with Tape():
            backward(ops.total(x))
        np.testing.assert_array_equal(x.grad, np.ones(5))

    def test_success_chain_rule_1d(self):
        w = parameter([[0.7]])
        x = Tensor([[-1.3]])
        with Tape():
            backward(ops.total(ops.sigmoid(ops.matmul(x, w))))
        s = 1.0 / (1.0 + math.exp(-(0.7 * -1.3)))
        self.assertAlmostEqual(float(w.grad[0, 0]), s * (1 - s) * -1.3, places=12)

    def test_success_shared_input_accumulates(self):
        x = parameter([[2.0]])
        with Tape():
            backward(ops.total(ops.mul(x, x)))
        self.assertAlmostEqual(float(x.grad[0, 0]), 4.0)

    def test_fail_non_scalar_root(self):
        x = parameter([1.0, 2.0])
        with Tape():
            y = ops.scale(x, 2.0)
            with self.assertRaises(ContractError):
                backward(y)

    def test_fail_second_backward_without_reset(self):
        x = parameter([1.0, 2.0])
        with Tape():
            loss = ops.total(x)
            backward(loss)
            with self.assertRaises(ContractError):
                backward(loss)
        x.zero_grad()
        with Tape():
            backward(ops.total(x))
        np.testing.assert_array_equal(x.grad, [1.0, 1.0])

    def test_success_deterministic_grads(self):
        first = self._grads_of_random_graph()
        second = self._grads_of_random_graph()
        for a, b in zip(first, second):
            self.assertEqual(a.tobytes(), b.tobytes())

    # === Utility ===

    def _grads_of_random_graph(self):
        rng = np.random.default_rng(5)
        w1 = parameter(rng.normal(size=(3, 4)))
        w2 = parameter(rng.normal(size=(4, 1)))
        x = Tensor(rng.normal(size=(6, 3)))
        with Tape():
            h = ops.relu(ops.matmul(x, w1))
            pooled = ops.segment_sum(h, [0, 0, 1, 1, 1, 0], 2)
            loss = ops.bce_with_logits(ops.matmul(pooled, w2), [1.0, 0.0])
            backward(loss)
        return [w1.grad, w2.grad]


class GradCheckTest(SimpleTestCase):
    """연산별 중앙 차분 검사 (float64, eps 1e-5, tol 1e-6)"""

    def setUp(self):
        self.rng = np.random.default_rng(2)
        super().setUp()

    def test_success_square(self):
        err = grad_check(lambda p: ops.total(ops.mul(p[0], p[0])), [parameter([3.0])], eps=1e-5)
        self.assertLess(err, 1e-8)

    def test_success_matmul(self):
        a = parameter(self.rng.normal(size=(3, 4)))
        b = parameter(self.rng.normal(size=(4, 2)))
        err = grad_check(lambda p: ops.total(ops.sigmoid(ops.matmul(p[0], p[1]))), [a, b])
        self.assertLess(err, 1e-6)

    def test_success_segment_sum(self):
        x = parameter(self.rng.normal(size=(6, 3)))
        w = Tensor(self.rng.normal(size=(2, 3)))
        err = grad_check(
            lambda p: ops.total(ops.mul(ops.segment_sum(p[0], [0, 1, 0, 1, 1, 0], 2), w)), [x]
        )
        self.assertLess(err, 1e-6)

    def test_success_segment_max_and_mean(self):
        x = parameter(self.rng.normal(size=(6, 3)))
        err = grad_check(
            lambda p: ops.total(ops.sigmoid(ops.add(
                ops.segment_max(p[0], [0, 1, 0, 1, 1, 0], 2),
                ops.segment_mean(p[0], [0, 1, 0, 1, 1, 0], 2),
            ))),
            [x],
        )
        self.assertLess(err, 1e-6)

    def test_success_concat_rows(self):
        a = parameter(self.rng.normal(size=(3, 2)))
        b = parameter(self.rng.normal(size=(3, 1)))
        w = Tensor(self.rng.normal(size=(3, 1)))
        err = grad_check(lambda p: ops.total(ops.sigmoid(ops.matmul(ops.concat_rows(p[0], p[1]), w))), [a, b])
        self.assertLess(err, 1e-6)

    def test_success_mse(self):
        pred = parameter(self.rng.normal(size=5))
        target = self.rng.normal(size=5)
        err = grad_check(lambda p: ops.mse(p[0], target), [pred])
        self.assertLess(err, 1e-6)

    def test_success_bce_and_broadcast(self):
        z = parameter(self.rng.normal(size=(4, 1)))
        h = parameter(self.rng.normal(size=(4, 3)))
        w = Tensor(self.rng.normal(size=(3, 1)))
        err = grad_check(
            lambda p: ops.bce_with_logits(ops.matmul(ops.mul(ops.sigmoid(p[0]), p[1]), w), [1, 0, 0, 1]),
            [z, h],
        )
        self.assertLess(err, 1e-6)

    def test_success_gather_and_maximum(self):
        a = parameter(self.rng.normal(size=(3, 2)))
        b = parameter(self.rng.normal(size=(3, 2)))
        err = grad_check(
            lambda p: ops.total(ops.sigmoid(ops.maximum(
                ops.gather_rows(p[0], [0, 0, 1, 2, 2, 1]), ops.gather_rows(p[1], [0, 1, 2, 0, 1, 2])
            ))),
            [a, b],
        )
        self.assertLess(err, 1e-6)

    def test_fail_non_finite_value(self):
        x = parameter([1.0])
        with self.assertRaises(ContractError):
            grad_check(lambda p: ops.scale(ops.total(p[0]), float("inf")), [x])

    def test_success_skips_relu_kink(self):
        x = parameter([0.0, 1.5, -2.0])
        err = grad_check(lambda p: ops.total(ops.relu(p[0])), [x])
        self.assertLess(err, 1e-8)

    def test_fail_wrong_vjp_is_reported(self):
        def bad_square(t):
            # 올바른 vjp 는 2 * x * g
            return ops._result(t.data ** 2, (t,), lambda g: (g * t.data,), "bad_square")

        err = grad_check(lambda p: ops.total(bad_square(p[0])), [parameter([1.0, -2.0, 3.0])])
        self.assertGreater(err, 0.1)

    def test_success_clears_grads_of_unchecked_leaves(self):
        a = parameter(self.rng.normal(size=(2, 2)))
        b = parameter(self.rng.normal(size=(2, 1)))
        analytic_grads(lambda p: ops.total(ops.sigmoid(ops.matmul(p[0], b))), [a])
        self.assertIsNone(a.grad)
        self.assertIsNone(b.grad)
        with Tape():
            backward(ops.total(ops.matmul(a, b)))
        self.assertEqual(b.grad.shape, (2, 1))


class ParamStoreTest(SimpleTestCase):
    def test_success_linear_init_is_seeded_and_biased(self):
        first, second = ParamStore(), ParamStore()
        add_linear(first, "lin", 4, 3, np.random.default_rng(5))
        add_linear(second, "lin", 4, 3, np.random.default_rng(5))
        np.testing.assert_array_equal(first["lin.b"].data, second["lin.b"].data)
        bias = first["lin.b"].data
        self.assertEqual(bias.shape, (1, 3))
        self.assertTrue(np.all(bias != 0.0))
        self.assertTrue(np.all(np.abs(bias) <= 0.5))

    def test_fail_duplicate_name(self):
        store = ParamStore()
        add_linear(store, "lin", 2, 2, np.random.default_rng(0))
        with self.assertRaises(ConfigError):
            add_linear(store, "lin", 2, 2, np.random.default_rng(0))
