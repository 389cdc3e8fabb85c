import numpy as np
import pytest

from okgd.graph import (Graph, knn_graph, laplacian, read_edge_list, sample_sbm, smoothness,
                        smoothness_pairwise, write_edge_list)


def test_two_node_laplacian():
    g = Graph.from_edges(2, [(0, 1, 1.0)])
    np.testing.assert_array_equal(laplacian(g), [[1, -1], [-1, 1]])


def test_empty_graph_laplacian_is_zero():
    assert not laplacian(Graph.empty(4)).any()


def test_triangle_laplacian_spectrum():
    g = Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    L = laplacian(g)
    np.testing.assert_array_equal(L, 3 * np.eye(3) - np.ones((3, 3)))
    np.testing.assert_allclose(np.linalg.eigvalsh(L), [0, 3, 3], atol=1e-12)


def test_smoothness_examples():
    g = Graph.from_edges(2, [(0, 1, 1.0)])
    assert smoothness(g, [0.0, 1.0]) == 1.0
    assert smoothness(g, [2.5, 2.5]) == 0.0


def test_smoothness_two_forms_agree(rng):
    w = np.triu(rng.random((5, 5)) * (rng.random((5, 5)) < 0.6), 1)
    g = Graph(w + w.T)
    x = rng.standard_normal(5)
    a, b = smoothness(g, x), smoothness_pairwise(g, x)
    assert abs(a - b) <= 1e-10 * max(abs(a), 1e-300)


def test_smoothness_dimension_mismatch():
    with pytest.raises(ValueError):
        smoothness(Graph.empty(3), [1.0, 2.0])


def test_adding_edge_increases_smoothness_by_its_term(rng):
    g, _ = sample_sbm(2, 4, 0.5, 0.2, seed=3)
    x = rng.standard_normal(8)
    u, v = next((u, v) for u in range(8) for v in range(u + 1, 8) if g.weights[u, v] == 0)
    w = g.weights.copy()
    w[u, v] = w[v, u] = 0.7
    np.testing.assert_allclose(smoothness(Graph(w), x) - smoothness(g, x), 0.7 * (x[u] - x[v]) ** 2, rtol=1e-10)


@pytest.mark.parametrize("weights", [
    np.array([[0, 1], [2, 0]], dtype=float),
    np.array([[1, 0], [0, 0]], dtype=float),
    np.array([[0, -1], [-1, 0]], dtype=float),
    np.ones((2, 3)),
])
def test_invalid_weights_rejected(weights):
    with pytest.raises(ValueError):
        Graph(weights)


def test_degrees_and_csr_view():
    g = Graph.from_edges(4, [(0, 1, 2.0), (1, 2, 1.0), (1, 3, 0.5)])
    np.testing.assert_array_equal(g.degrees, [2.0, 3.5, 1.0, 0.5])
    assert list(g.neighbors(1)) == [0, 2, 3]
    assert g.n_edges == 3
    assert g.edge_list() == [(0, 1, 2.0), (1, 2, 1.0), (1, 3, 0.5)]
    with pytest.raises(ValueError):
        g.degrees[0] = 1.0


def test_sbm_extremes():
    g, labels = sample_sbm(3, 4, 1.0, 0.0, seed=0)
    same = labels[:, None] == labels[None, :]
    np.testing.assert_array_equal(g.weights, (same & ~np.eye(12, dtype=bool)).astype(float))
    g0, _ = sample_sbm(3, 4, 0.0, 0.0, seed=0)
    assert g0.n_edges == 0


def test_sbm_deterministic_and_density():
    a, _ = sample_sbm(4, 20, 0.5, 0.01, seed=7)
    b, _ = sample_sbm(4, 20, 0.5, 0.01, seed=7)
    np.testing.assert_array_equal(a.weights, b.weights)
    intra = []
    for seed in range(100):
        g, labels = sample_sbm(4, 20, 0.5, 0.01, seed=seed)
        same = np.triu(labels[:, None] == labels[None, :], 1)
        intra.append(g.weights[same].mean())
    assert abs(np.mean(intra) - 0.5) <= 0.05


def test_sbm_rejects_bad_probability():
    with pytest.raises(ValueError):
        sample_sbm(2, 3, 1.5, 0.0, seed=0)


def test_knn_collinear():
    # distances: 0-1 = 1, 1-2 = 3; nearest of 0 and 2 is 1, nearest of 1 is 0
    g = knn_graph([[0.0], [1.0], [4.0]], 1)
    assert g.edge_list() == [(0, 1, 1.0), (1, 2, 1.0)]


def test_knn_complete_and_pair(rng):
    pts = rng.standard_normal((6, 2))
    g = knn_graph(pts, 5)
    assert g.n_edges == 15
    assert knn_graph([[0.0, 0.0], [1.0, 1.0]], 1).n_edges == 1


def test_knn_ties_prefer_lower_index():
    # node 1 is equidistant from 0 and 2 and must pick 0; nobody else picks the 1-2 pair
    g = knn_graph([[0.0], [1.0], [2.0], [2.1]], 1)
    assert g.edge_list() == [(0, 1, 1.0), (2, 3, 1.0)]


def test_knn_requires_k_below_n():
    with pytest.raises(ValueError):
        knn_graph([[0.0], [1.0]], 2)


def test_edge_list_round_trip(tmp_path):
    g, _ = sample_sbm(2, 5, 0.6, 0.1, seed=4)
    path = tmp_path / "g.edges"
    write_edge_list(g, path)
    np.testing.assert_array_equal(read_edge_list(path).weights, g.weights)


def test_edge_list_comments_and_errors(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("# a comment\n0 1 0.5\n\n1 2\n")
    g = read_edge_list(path)
    assert g.n_nodes == 3 and g.weights[1, 2] == 1.0
    path.write_text("0 1 x\n")
    with pytest.raises(ValueError, match="g.edges:1"):
        read_edge_list(path)


def test_edge_list_header_conflict(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("# n_nodes 4\n0 1 1\n")
    assert read_edge_list(path).n_nodes == 4
    with pytest.raises(ValueError, match="header"):
        read_edge_list(path, n_nodes=6)
