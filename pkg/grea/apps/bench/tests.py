import unittest

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from apps.bench.models import CSV_COLUMNS
from apps.bench.runner import explicit_pair_rep, latent_grid, report_to_csv, run_bench
from apps.common.exceptions import ConfigError
from apps.gnn.encoder import encode
from apps.gnn.models import EncoderConfig
from apps.graphs.models import GraphBatch, SyntheticSpec
from apps.graphs.synthetic import gen_planted_motif
from apps.rationale.models import PRED_GNN, ModelParams
from apps.rationale.separator import compute_mask
from apps.tensor import ops


class ExplicitPairTest(SimpleTestCase):
    def setUp(self):
        self.graphs = gen_planted_motif(SyntheticSpec(num_graphs=4, seed=8))
        self.model = _model()
        self.batch = GraphBatch.from_graphs(self.graphs)
        self.mask = compute_mask(self.batch, self.model)
        self.masks = self.mask.per_graph()
        super().setUp()

    def test_success_same_graph_is_full_readout(self):
        g = self.graphs[0]
        H = encode(GraphBatch.from_graphs([g]), self.model.pred_encoder, self.model.predictor, PRED_GNN)
        rep = explicit_pair_rep(g, g, self.masks[0], self.masks[0], self.model)
        np.testing.assert_allclose(rep, H.data.sum(axis=0), atol=1e-9)

    def test_success_zero_environment_is_rationale_rep(self):
        grid = latent_grid(self.batch, self.mask.m, self.model)
        ones = np.ones(self.graphs[2].num_nodes)
        rep = explicit_pair_rep(self.graphs[1], self.graphs[2], self.masks[1], ones, self.model)
        H = encode(self.batch, self.model.pred_encoder, self.model.predictor, PRED_GNN)
        h_r = ops.segment_sum(ops.mul(self.mask.m, H), self.batch.segments, 4).data
        np.testing.assert_allclose(rep, h_r[1], atol=1e-9)
        self.assertEqual(grid.shape, (4, 4, 8))

    def test_success_matches_latent_cells(self):
        grid = latent_grid(self.batch, self.mask.m, self.model)
        for i, j in [(0, 1), (3, 2), (1, 1), (2, 0)]:
            rep = explicit_pair_rep(self.graphs[i], self.graphs[j], self.masks[i], self.masks[j], self.model)
            np.testing.assert_allclose(grid[i, j], rep, atol=1e-9)


class RunBenchTest(SimpleTestCase):
    def setUp(self):
        self.graphs = gen_planted_motif(SyntheticSpec(num_graphs=6, seed=1))
        super().setUp()

    def test_success_rows_and_exactness(self):
        report = run_bench(self.graphs, [2, 4], reps=1, model=_model())
        self.assertEqual(report.batch_sizes, [2, 4])
        self.assertLess(report.max_abs_dev, 1e-9)
        self.assertTrue(all(row.t_latent_ms > 0 and row.t_explicit_ms > 0 for row in report.rows))

    def test_success_csv_layout(self):
        text = report_to_csv(run_bench(self.graphs, [2, 3, 5], reps=1, model=_model()))
        lines = text.strip().split("\n")
        self.assertEqual(lines[0], ",".join(CSV_COLUMNS))
        self.assertEqual([line.split(",")[0] for line in lines[1:]], ["2", "3", "5"])

    def test_success_content_deterministic(self):
        first = run_bench(self.graphs, [3], reps=1, seed=4)
        second = run_bench(self.graphs, [3], reps=1, seed=4)
        self.assertEqual(first.rows[0].max_abs_dev, second.rows[0].max_abs_dev)

    def test_fail_dataset_too_small(self):
        with self.assertRaises(ConfigError):
            run_bench(self.graphs, [7], reps=1, model=_model())


@unittest.skipUnless(settings.GREA_RUN_SLOW_TESTS, "GREA_RUN_SLOW_TESTS=true 일 때만 실행")
class SpeedupTest(SimpleTestCase):
    def test_success_latent_faster_at_128(self):
        graphs = gen_planted_motif(SyntheticSpec(num_graphs=128, seed=0))
        report = run_bench(graphs, [128], reps=3)
        self.assertGreaterEqual(report.rows[0].speedup, 5.0)
        self.assertLess(report.max_abs_dev, 1e-9)


# === Utility ===
def _model() -> ModelParams:
    encoder = EncoderConfig(kind="gin", num_layers=2, hidden_dim=8, in_dim=6)
    return ModelParams.initialize(encoder, encoder, "sum", "binary", 0)
