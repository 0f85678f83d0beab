import networkx as nx
import numpy as np
from django.test import SimpleTestCase

from apps.common.exceptions import ConfigError, SegmentIndexError, ShapeError
from apps.gnn.encoder import encode, readout
from apps.gnn.layers import gcn_layer, gin_layer, mlp
from apps.gnn.models import EncoderConfig, init_encoder, init_mlp, mlp_layers
from apps.graphs.models import Graph, GraphBatch
from apps.tensor import ops
from apps.tensor.params import ParamStore
from apps.tensor.tensor import Tensor


class GcnLayerTest(SimpleTestCase):
    def test_success_path_two_nodes(self):
        batch = _batch_of(Graph(np.ones((2, 1)), [(0, 1)]))
        out = gcn_layer(batch, Tensor(np.eye(2)), Tensor(np.eye(2)), activate=False)
        np.testing.assert_allclose(out.data, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)

    def test_success_isolated_node(self):
        batch = _batch_of(Graph(np.ones((1, 1)), []))
        out = gcn_layer(batch, Tensor([[-2.5]]), Tensor([[1.0]]), activate=False)
        self.assertEqual(out.values, [-2.5])

    def test_success_relu_applied_when_active(self):
        batch = _batch_of(Graph(np.ones((1, 1)), []))
        out = gcn_layer(batch, Tensor([[-2.5]]), Tensor([[1.0]]))
        self.assertEqual(out.values, [0.0])

    def test_success_random_graph_dense_oracle(self):
        rng = np.random.default_rng(0)
        g = nx.gnp_random_graph(5, 0.5, seed=1)
        H, W = rng.normal(size=(5, 3)), rng.normal(size=(3, 2))
        out = gcn_layer(_batch_of(_from_nx(g)), Tensor(H), Tensor(W), activate=False)
        np.testing.assert_allclose(out.data, _dense_gcn(g) @ H @ W, atol=1e-12)

    def test_success_exhaustive_small_graphs(self):
        # atlas 는 7 노드 이하 모든 그래프, 8 노드는 무작위 표본
        rng = np.random.default_rng(1)
        graphs = [g for g in nx.graph_atlas_g() if g.number_of_nodes() > 0]
        graphs += [nx.gnp_random_graph(8, p, seed=s) for s, p in enumerate(np.linspace(0.0, 1.0, 40))]
        W = rng.normal(size=(2, 2))
        for g in graphs:
            H = rng.normal(size=(g.number_of_nodes(), 2))
            out = gcn_layer(_batch_of(_from_nx(g)), Tensor(H), Tensor(W), activate=False)
            np.testing.assert_allclose(out.data, _dense_gcn(g) @ H @ W, atol=1e-12)

    def test_fail_row_mismatch(self):
        with self.assertRaises(ShapeError):
            gcn_layer(_batch_of(Graph(np.ones((2, 1)), [(0, 1)])), Tensor(np.ones((3, 2))), Tensor(np.eye(2)))


class GinLayerTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(2)
        store = ParamStore()
        init_mlp(store, "mlp", [3, 3, 3], self.rng)
        self.mlp = mlp_layers(store, "mlp")
        super().setUp()

    def test_success_isolated_node_is_mlp(self):
        h = self.rng.normal(size=(1, 3))
        out = gin_layer(_batch_of(Graph(np.ones((1, 1)), [])), Tensor(h), self.mlp)
        np.testing.assert_array_equal(out.data, mlp(Tensor(h), self.mlp).data)

    def test_success_symmetric_pair(self):
        h = np.tile(self.rng.normal(size=(1, 3)), (2, 1))
        out = gin_layer(_batch_of(Graph(np.ones((2, 1)), [(0, 1)])), Tensor(h), self.mlp)
        np.testing.assert_array_equal(out.data[0], out.data[1])

    def test_success_random_graph_dense_oracle(self):
        g = nx.gnp_random_graph(6, 0.4, seed=3)
        H = self.rng.normal(size=(6, 3))
        out = gin_layer(_batch_of(_from_nx(g)), Tensor(H), self.mlp)
        A = nx.to_numpy_array(g, nodelist=range(6))
        (W0, b0), (W1, b1) = [(W.data, b.data) for W, b in self.mlp]
        expected = np.maximum((np.eye(6) + A) @ H @ W0 + b0, 0.0) @ W1 + b1
        np.testing.assert_allclose(out.data, expected, atol=1e-12)


class EncodeTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(4)
        self.graphs = [_from_nx(nx.gnp_random_graph(n, 0.5, seed=n), self.rng) for n in (4, 6, 5)]
        super().setUp()

    def test_success_single_gcn_layer(self):
        config = EncoderConfig(kind="gcn", num_layers=1, hidden_dim=3, in_dim=2)
        params = _params(config)
        batch = _batch_of(*self.graphs)
        X = ops.linear(Tensor(batch.features), params["enc.proj.W"], params["enc.proj.b"])
        expected = gcn_layer(batch, X, params["enc.layers.0.W"], activate=False)
        np.testing.assert_array_equal(encode(batch, config, params, "enc").data, expected.data)

    def test_success_batched_equals_per_graph(self):
        for kind in ("gcn", "gin"):
            config = EncoderConfig(kind=kind, num_layers=3, hidden_dim=4, in_dim=2)
            params = _params(config)
            batched = encode(_batch_of(*self.graphs), config, params, "enc").data
            per_graph = np.vstack([encode(_batch_of(g), config, params, "enc").data for g in self.graphs])
            np.testing.assert_allclose(batched, per_graph, atol=1e-9, err_msg=kind)

    def test_success_permutation_equivariance(self):
        g = self.graphs[1]
        perm = self.rng.permutation(g.num_nodes)
        inverse = np.argsort(perm)
        permuted = Graph(g.node_features[perm], inverse[g.edges])
        for kind in ("gcn", "gin"):
            config = EncoderConfig(kind=kind, num_layers=2, hidden_dim=4, in_dim=2)
            params = _params(config)
            H = encode(_batch_of(g), config, params, "enc").data
            H_perm = encode(_batch_of(permuted), config, params, "enc").data
            np.testing.assert_allclose(H_perm, H[perm], atol=1e-12, err_msg=kind)
            np.testing.assert_allclose(H_perm.sum(axis=0), H.sum(axis=0), atol=1e-12)

    def test_fail_feature_width(self):
        config = EncoderConfig(kind="gin", num_layers=1, hidden_dim=2, in_dim=5)
        with self.assertRaises(ShapeError):
            encode(_batch_of(*self.graphs), config, _params(config), "enc")

    def test_fail_bad_config(self):
        with self.assertRaises(ConfigError):
            EncoderConfig(kind="gat")
        with self.assertRaises(ConfigError):
            EncoderConfig(num_layers=0)


class ReadoutTest(SimpleTestCase):
    def test_success_sum_is_column_sums(self):
        H = Tensor([[1.0, 2.0], [3.0, 4.0]])
        self.assertEqual(readout(H, [0, 0], 1, "sum").values, [4.0, 6.0])

    def test_success_mean_of_identical_rows(self):
        H = Tensor([[1.5, -2.0]] * 3)
        np.testing.assert_allclose(readout(H, [0, 0, 0], 1, "mean").data, [[1.5, -2.0]])

    def test_success_sum_is_segment_sum(self):
        H = Tensor(np.random.default_rng(5).normal(size=(5, 2)))
        seg = [0, 1, 1, 0, 1]
        np.testing.assert_array_equal(readout(H, seg, 2, "sum").data, ops.segment_sum(H, seg, 2).data)

    def test_success_max(self):
        H = Tensor([[1.0, 5.0], [3.0, -1.0], [0.0, 0.0]])
        np.testing.assert_array_equal(readout(H, [0, 0, 1], 2, "max").data, [[3.0, 5.0], [0.0, 0.0]])

    def test_fail_out_of_range_segment(self):
        with self.assertRaises(SegmentIndexError):
            readout(Tensor([[1.0]]), [3], 1, "sum")

    def test_fail_unknown_mode(self):
        with self.assertRaises(ConfigError):
            readout(Tensor([[1.0]]), [0], 1, "median")


# === Utility ===
def _batch_of(*graphs: Graph) -> GraphBatch:
    return GraphBatch.from_graphs(list(graphs))


def _from_nx(g: nx.Graph, rng: np.random.Generator = None) -> Graph:
    n = g.number_of_nodes()
    features = np.ones((n, 1)) if rng is None else rng.normal(size=(n, 2))
    return Graph(features, np.array(sorted(g.edges), dtype=np.int64).reshape(-1, 2))


def _dense_gcn(g: nx.Graph) -> np.ndarray:
    n = g.number_of_nodes()
    A = nx.to_numpy_array(g, nodelist=range(n)) + np.eye(n)
    d = A.sum(axis=1) ** -0.5
    return d[:, None] * A * d[None, :]


def _params(config: EncoderConfig) -> ParamStore:
    store = ParamStore()
    init_encoder(store, "enc", config, np.random.default_rng(0))
    return store
