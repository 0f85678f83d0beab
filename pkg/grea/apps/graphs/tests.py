import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from apps.common.exceptions import ConfigError, DataFormatError
from apps.graphs.batching import make_batches
from apps.graphs.io import dataset_summary, load_jsonl, read_split, split_path_for, write_jsonl, write_split
from apps.graphs.models import DatasetSplit, Graph, GraphBatch, SyntheticSpec, disjoint_union
from apps.graphs.splits import split
from apps.graphs.synthetic import build_base, build_motif, gen_planted_motif, planted_split
from base.enums import errors


class LoadJsonlTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "data.jsonl")
        super().setUp()

    def tearDown(self):
        self.tmp.cleanup()
        super().tearDown()

    def test_success_single_line(self):
        _write(self.path, '{"nodes":[[1,0],[0,1]],"edges":[[0,1]],"y":1}\n')
        graphs = load_jsonl(self.path)
        self.assertEqual(len(graphs), 1)
        self.assertEqual(graphs[0].num_nodes, 2)
        self.assertEqual(graphs[0].label, 1.0)
        self.assertIsNone(graphs[0].rationale_truth)

    def test_success_empty_file(self):
        _write(self.path, "")
        self.assertEqual(load_jsonl(self.path), [])

    def test_fail_edge_out_of_range_names_line(self):
        _write(self.path, '{"nodes":[[1]],"edges":[]}\n{"nodes":[[1],[0]],"edges":[[0,5]]}\n')
        with self.assertRaises(DataFormatError) as ctx:
            load_jsonl(self.path)
        self.assertEqual(ctx.exception.error_code, errors.E002_EDGE_OUT_OF_RANGE["error_code"])
        self.assertIn("line 2", str(ctx.exception))

    def test_fail_ragged_rows(self):
        _write(self.path, '{"nodes":[[1,0],[1]],"edges":[]}\n')
        with self.assertRaises(DataFormatError) as ctx:
            load_jsonl(self.path)
        self.assertEqual(ctx.exception.error_code, errors.E002_RAGGED_FEATURES["error_code"])

    def test_fail_unknown_field(self):
        _write(self.path, '{"nodes":[[1]],"edges":[],"smiles":"C"}\n')
        with self.assertRaises(DataFormatError):
            load_jsonl(self.path)

    def test_fail_invalid_json(self):
        _write(self.path, '{"nodes":[[1]]\n')
        with self.assertRaises(DataFormatError) as ctx:
            load_jsonl(self.path)
        self.assertIn("line 1", str(ctx.exception))

    def test_fail_missing_file(self):
        with self.assertRaises(DataFormatError) as ctx:
            load_jsonl(os.path.join(self.tmp.name, "nope.jsonl"))
        self.assertEqual(ctx.exception.error_code, errors.E002_FILE_NOT_FOUND["error_code"])
        self.assertIn("nope.jsonl", str(ctx.exception))

    def test_success_write_then_load(self):
        graphs = gen_planted_motif(SyntheticSpec(num_graphs=5, seed=3))
        write_jsonl(graphs, self.path)
        self.assertEqual(load_jsonl(self.path), graphs)

    def test_success_split_sidecar(self):
        sidecar = split_path_for(self.path)
        self.assertTrue(sidecar.endswith("data.splits.json"))
        write_split(DatasetSplit([0, 2], [1], [3]), sidecar)
        self.assertEqual(read_split(sidecar, 4), DatasetSplit([0, 2], [1], [3]))

    def test_fail_split_sidecar_bad_index(self):
        sidecar = split_path_for(self.path)
        write_split(DatasetSplit([0, 9], [1], [3]), sidecar)
        with self.assertRaises(DataFormatError):
            read_split(sidecar, 4)


class GraphModelTest(SimpleTestCase):
    def test_fail_self_loop(self):
        with self.assertRaises(DataFormatError):
            Graph(np.ones((2, 1)), [(1, 1)])

    def test_fail_truth_out_of_range(self):
        with self.assertRaises(DataFormatError):
            Graph(np.ones((2, 1)), [(0, 1)], rationale_truth=(0, 2))

    def test_success_disjoint_union(self):
        union = disjoint_union(Graph(np.ones((2, 1)), [(0, 1)]), Graph(np.zeros((3, 1)), [(0, 2)]))
        self.assertEqual(union.num_nodes, 5)
        self.assertEqual(union.edges.tolist(), [[0, 1], [2, 4]])


class BatchingTest(SimpleTestCase):
    def test_success_offsets_and_segments(self):
        g = Graph(np.ones((2, 1)), [(0, 1)])
        batch = make_batches([g, g], 2)[0]
        self.assertEqual(batch.segments.tolist(), [0, 0, 1, 1])
        self.assertEqual(batch.edges.tolist(), [[0, 1], [2, 3]])
        self.assertEqual(batch.num_graphs, 2)

    def test_success_same_seed_same_order(self):
        graphs = gen_planted_motif(SyntheticSpec(num_graphs=20, seed=1))
        first = [b.graph_indices for b in make_batches(graphs, 6, shuffle_seed=4)]
        second = [b.graph_indices for b in make_batches(graphs, 6, shuffle_seed=4)]
        self.assertEqual(first, second)
        self.assertNotEqual(first, [b.graph_indices for b in make_batches(graphs, 6)])

    def test_success_short_last_batch_kept(self):
        graphs = gen_planted_motif(SyntheticSpec(num_graphs=7, seed=1))
        batches = make_batches(graphs, 3)
        self.assertEqual([b.num_graphs for b in batches], [3, 3, 1])

    def test_success_block_diagonal(self):
        graphs = gen_planted_motif(SyntheticSpec(num_graphs=12, seed=2))
        for batch in make_batches(graphs, 5, shuffle_seed=0):
            seg = batch.segments
            self.assertTrue(np.all(seg[batch.edges[:, 0]] == seg[batch.edges[:, 1]]))
            self.assertTrue(np.all(batch.node_counts > 0))

    def test_success_missing_label_is_nan(self):
        batch = GraphBatch.from_graphs([Graph(np.ones((1, 1)), []), Graph(np.ones((1, 1)), [], label=1)])
        self.assertTrue(np.isnan(batch.labels[0]))
        self.assertEqual(batch.labels[1], 1.0)

    def test_fail_batch_size_zero(self):
        with self.assertRaises(ConfigError):
            make_batches([Graph(np.ones((1, 1)), [])], 0)


class SplitTest(SimpleTestCase):
    def test_success_ten_graphs(self):
        s = split(10)
        self.assertEqual((len(s.train), len(s.valid), len(s.test)), (6, 1, 3))

    def test_success_remainder_rule(self):
        s = split(595, (0.6, 0.1, 0.3), seed=0)
        self.assertEqual((len(s.train), len(s.valid), len(s.test)), (357, 59, 179))

    def test_success_disjoint_cover(self):
        s = split(101, seed=5)
        joined = s.train + s.valid + s.test
        self.assertEqual(sorted(joined), list(range(101)))

    def test_success_deterministic(self):
        self.assertEqual(split(50, seed=9), split(50, seed=9))
        self.assertNotEqual(split(50, seed=9).train, split(50, seed=10).train)

    def test_fail_bad_ratios(self):
        with self.assertRaises(ConfigError) as ctx:
            split(10, (0.5, 0.1, 0.3))
        self.assertEqual(ctx.exception.error_code, errors.E002_INVALID_RATIOS["error_code"])


class SyntheticTest(SimpleTestCase):
    def test_success_deterministic_bytes(self):
        with tempfile.TemporaryDirectory() as tmp:
            a, b = os.path.join(tmp, "a.jsonl"), os.path.join(tmp, "b.jsonl")
            write_jsonl(gen_planted_motif(SyntheticSpec(num_graphs=30, seed=7)), a)
            write_jsonl(gen_planted_motif(SyntheticSpec(num_graphs=30, seed=7)), b)
            with open(a, "rb") as fa, open(b, "rb") as fb:
                self.assertEqual(fa.read(), fb.read())

    def test_success_motif_sizes_and_attachment(self):
        spec = SyntheticSpec(num_graphs=40, seed=0)
        for g in gen_planted_motif(spec):
            truth = set(g.rationale_truth)
            # label 0 -> house (5), label 1 -> cycle (6)
            self.assertEqual(len(truth), 5 if g.label == 0 else 6)
            crossing = [(u, v) for u, v in g.edges.tolist() if (u in truth) != (v in truth)]
            self.assertEqual(len(crossing), 1)
            inner = [(u, v) for u, v in g.edges.tolist() if u in truth and v in truth]
            self.assertEqual(len(inner), 6)

    def test_success_full_bias_correlates_in_train(self):
        spec = SyntheticSpec(num_graphs=200, spurious_bias=1.0, seed=4)
        graphs = gen_planted_motif(spec)
        train = planted_split(spec).train
        self.assertAlmostEqual(_base_label_corr([graphs[i] for i in train], spec.base_kinds[1]), 1.0)

    def test_success_zero_bias_uncorrelated(self):
        spec = SyntheticSpec(num_graphs=1000, spurious_bias=0.0, seed=4)
        graphs = gen_planted_motif(spec)
        self.assertLess(abs(_base_label_corr(graphs, spec.base_kinds[1])), 0.1)

    def test_success_label_noise_flips_some(self):
        spec = SyntheticSpec(num_graphs=200, label_noise=0.5, seed=1)
        graphs = gen_planted_motif(spec)
        flipped = sum(1 for g in graphs if (len(g.rationale_truth) == 6) != (g.label == 1.0))
        self.assertGreater(flipped, 0)

    def test_fail_invalid_spec(self):
        with self.assertRaises(ConfigError) as ctx:
            SyntheticSpec(spurious_bias=1.5)
        self.assertEqual(ctx.exception.error_code, errors.E002_INVALID_SYNTHETIC_SPEC["error_code"])

    def test_fail_unknown_motif_or_base(self):
        with self.assertRaises(ConfigError) as ctx:
            build_motif("star")
        self.assertEqual(ctx.exception.error_code, errors.E002_INVALID_SYNTHETIC_SPEC["error_code"])
        with self.assertRaises(ConfigError):
            build_base("grid", 8, np.random.default_rng(0))

    def test_success_summary_matches_recount(self):
        graphs = gen_planted_motif(SyntheticSpec(num_graphs=25, seed=2))
        summary = dataset_summary(graphs)
        self.assertEqual(summary["num_graphs"], 25)
        self.assertAlmostEqual(summary["avg_nodes"], sum(g.num_nodes for g in graphs) / 25)
        self.assertEqual(summary["label_counts"]["1"], sum(1 for g in graphs if g.label == 1.0))


# === Utility ===
def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _base_label_corr(graphs, positive_kind: str) -> float:
    base = np.array([1.0 if g.base_kind == positive_kind else 0.0 for g in graphs])
    labels = np.array([g.label for g in graphs])
    return float(np.corrcoef(base, labels)[0, 1])
