import io

import numpy as np
import pytest

from lpseg.graph import build_knn_graph, dump_edges

from .oracles import brute_knn_edges, graph_edge_set


def assert_valid_graph(graph):
    """Symmetry, no self-loops, no duplicates, sorted adjacency."""
    for i in range(graph.n_nodes):
        nbrs = graph.neighbors(i)
        assert np.all(np.diff(nbrs) > 0), "unsorted or duplicate neighbors"
        assert i not in nbrs, "self loop"
        for j in nbrs:
            assert i in graph.neighbors(j), "asymmetric edge"


def test_three_collinear_points():
    pts = np.array([[0.0], [1.0], [10.0]])
    g = build_knn_graph(pts, 1)
    assert graph_edge_set(g) == {(0, 1), (1, 2)}
    assert_valid_graph(g)


def test_complete_graph_when_k_is_n_minus_1():
    rng = np.random.default_rng(2)
    pts = rng.random((7, 3))
    g = build_knn_graph(pts, 6)
    assert g.n_edges == 7 * 6 // 2
    assert_valid_graph(g)


def test_unit_square_corners_tie_rule():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    g = build_knn_graph(pts, 1)
    # ties at distance 1 go to the lower id: 0->1, 1->0, 2->0, 3->1
    assert graph_edge_set(g) == {(0, 1), (0, 2), (1, 3)}
    assert g.n_edges >= 2
    assert g.degrees().min() >= 1
    assert graph_edge_set(g) == brute_knn_edges(pts, 1)


def test_matches_brute_force_on_random_instances(any_backend):
    rng = np.random.default_rng(42)
    for _ in range(15):
        n = int(rng.integers(4, 200))
        d = int(rng.integers(1, 24))
        k = int(rng.integers(1, min(10, n - 1) + 1))
        pts = rng.random((n, d))
        g = build_knn_graph(pts, k)
        assert graph_edge_set(g) == brute_knn_edges(pts, k)
        assert_valid_graph(g)
        degs = g.degrees()
        assert degs.min() >= min(k, n - 1)
        assert degs.max() <= n - 1


def test_duplicate_feature_vectors_allowed():
    pts = np.zeros((10, 4))
    g = build_knn_graph(pts, 3)
    assert graph_edge_set(g) == brute_knn_edges(pts, 3)
    assert_valid_graph(g)


def test_determinism():
    rng = np.random.default_rng(5)
    pts = rng.random((80, 23))
    g1 = build_knn_graph(pts, 4)
    g2 = build_knn_graph(pts, 4)
    np.testing.assert_array_equal(g1.indptr, g2.indptr)
    np.testing.assert_array_equal(g1.indices, g2.indices)


def test_parameter_validation():
    pts = np.random.default_rng(0).random((5, 2))
    with pytest.raises(ValueError, match="k="):
        build_knn_graph(pts, 0)
    with pytest.raises(ValueError, match="k="):
        build_knn_graph(pts, 5)
    with pytest.raises(ValueError, match="at least 2"):
        build_knn_graph(pts[:1], 1)
    with pytest.raises(ValueError, match="feature matrix"):
        build_knn_graph(pts.ravel(), 1)


def test_edge_dump_format():
    pts = np.array([[0.0], [1.0], [10.0]])
    g = build_knn_graph(pts, 1)
    buf = io.StringIO()
    dump_edges(g, buf)
    assert buf.getvalue() == "0 1\n1 2\n"
