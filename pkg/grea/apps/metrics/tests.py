import math

import numpy as np
from django.test import SimpleTestCase

from apps.common.exceptions import UndefinedMetricError
from apps.metrics.models import MetricsRecord
from apps.metrics.scores import accuracy, r2, rationale_score, rmse, roc_auc, select_nodes
from base.enums import errors


class RegressionMetricTest(SimpleTestCase):
    def test_success_perfect(self):
        self.assertEqual(r2([1, 2, 3], [1, 2, 3]), 1.0)
        self.assertEqual(rmse([1, 2, 3], [1, 2, 3]), 0.0)

    def test_success_mean_predictor(self):
        target = [1.0, 4.0, 7.0]
        self.assertAlmostEqual(r2([4.0] * 3, target), 0.0)

    def test_success_hand_arithmetic(self):
        self.assertAlmostEqual(r2([1, 2, 4], [1, 2, 3]), 0.5)
        self.assertAlmostEqual(rmse([1, 2, 4], [1, 2, 3]), math.sqrt(1 / 3))

    def test_success_least_squares_fit_beats_mean(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=50)
        y = 2.0 * x + rng.normal(scale=0.5, size=50)
        slope, intercept = np.polyfit(x, y, 1)
        self.assertGreaterEqual(r2(slope * x + intercept, y), 0.0)

    def test_fail_constant_targets(self):
        with self.assertRaises(UndefinedMetricError):
            r2([1, 2], [3, 3])


class RocAucTest(SimpleTestCase):
    def test_success_perfect(self):
        self.assertEqual(roc_auc([0.9, 0.1], [1, 0]), 1.0)

    def test_success_all_ties(self):
        self.assertEqual(roc_auc([0.3] * 4, [1, 0, 1, 0]), 0.5)

    def test_success_brute_force(self):
        self.assertEqual(roc_auc([0.9, 0.8, 0.3], [1, 0, 1]), 0.5)
        rng = np.random.default_rng(1)
        scores = rng.integers(0, 5, size=30).astype(float)
        labels = np.arange(30) % 2
        self.assertAlmostEqual(roc_auc(scores, labels), _brute_auc(scores, labels), places=12)

    def test_success_monotone_invariance(self):
        rng = np.random.default_rng(2)
        scores = rng.normal(size=40)
        labels = rng.integers(0, 2, size=40)
        base = roc_auc(scores, labels)
        self.assertAlmostEqual(roc_auc(np.exp(scores), labels), base, places=12)
        self.assertAlmostEqual(roc_auc(-scores, labels) + base, 1.0, places=12)

    def test_fail_single_class(self):
        with self.assertRaises(UndefinedMetricError) as ctx:
            roc_auc([0.1, 0.2], [1, 1])
        self.assertEqual(ctx.exception.error_code, errors.E005_UNDEFINED_METRIC["error_code"])

    def test_success_accuracy_at_zero_logit(self):
        self.assertEqual(accuracy([2.0, -1.0, 0.5, -3.0], [1, 0, 0, 0]), 0.75)


class RationaleScoreTest(SimpleTestCase):
    def test_success_indicator_mask(self):
        mask = [1.0, 1.0, 0.0, 0.0, 1.0]
        for mode in ("threshold", "top-k"):
            self.assertEqual(rationale_score(mask, [0, 1, 4], mode), (1.0, 1.0))

    def test_success_all_selected(self):
        precision, recall = rationale_score([0.5 + 1e-6] * 6, [0, 1], "threshold")
        self.assertAlmostEqual(precision, 2 / 6)
        self.assertEqual(recall, 1.0)

    def test_success_top_k_hand_case(self):
        mask = [0.9, 0.8, 0.4, 0.7, 0.1, 0.1]
        self.assertEqual(select_nodes(mask, 3, "top-k"), [0, 1, 3])
        precision, recall = rationale_score(mask, [0, 1, 2], "top-k")
        self.assertAlmostEqual(precision, 2 / 3)
        self.assertAlmostEqual(recall, 2 / 3)

    def test_success_top_k_ties_by_index(self):
        self.assertEqual(select_nodes([0.5, 0.9, 0.5, 0.5], 2, "top-k"), [0, 1])

    def test_fail_empty_truth(self):
        with self.assertRaises(UndefinedMetricError) as ctx:
            rationale_score([0.5], [])
        self.assertEqual(ctx.exception.error_code, errors.E005_EMPTY_TRUTH["error_code"])


class MetricsRecordTest(SimpleTestCase):
    def test_success_to_dict_drops_missing(self):
        record = MetricsRecord(n_examples=3, auc=0.75)
        self.assertEqual(record.to_dict(), {"n_examples": 3, "auc": 0.75})
        self.assertEqual(record.primary("binary"), 0.75)


# === Utility ===
def _brute_auc(scores, labels) -> float:
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return total / (len(pos) * len(neg))
