import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpseg.graph import PixelGraph
from lpseg.propagation import (
    ConvergenceMonitor,
    convergence_statistic,
    decode_labels,
    init_domination,
    propagation_step,
    run_propagation,
)

from .oracles import dense_update_matrix


def graph_from_edges(n, edges):
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = []
    for i in range(n):
        nbrs = sorted(adj[i])
        indices.extend(nbrs)
        indptr[i + 1] = len(indices)
    return PixelGraph(indptr=indptr, indices=np.array(indices, dtype=np.int64))


def random_graph(n, rng, p=0.2):
    mask = np.triu(rng.random((n, n)) < p, 1)
    edges = [(int(i), int(j)) for i, j in np.argwhere(mask)]
    return graph_from_edges(n, edges)


class TestInit:
    def test_labeled_one_hot(self):
        dom = init_domination(np.array([1, 0]), 2)
        assert dom[0].tolist() == [1.0, 0.0]

    def test_unlabeled_uniform_two_classes(self):
        dom = init_domination(np.array([1, 2, 0]), 2)
        assert dom[2].tolist() == [0.5, 0.5]

    def test_unlabeled_uniform_four_classes(self):
        dom = init_domination(np.array([1, 2, 3, 4, 0]), 4)
        assert dom[4].tolist() == [0.25] * 4

    def test_out_of_range_label_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            init_domination(np.array([3, 0]), 2)

    def test_missing_class_warns_not_fails(self):
        with pytest.warns(UserWarning, match="without seeds"):
            dom = init_domination(np.array([1, 0, 0]), 2)
        assert dom.shape == (3, 2)


class TestStep:
    def test_mean_of_opposing_neighbors(self):
        g = graph_from_edges(3, [(0, 1), (1, 2)])
        labels = np.array([1, 0, 2])
        dom = init_domination(labels, 2)
        out = propagation_step(dom, g, labels)
        assert out[1].tolist() == [0.5, 0.5]
        assert out[0].tolist() == [1.0, 0.0]
        assert out[2].tolist() == [0.0, 1.0]

    def test_star_center_weighted_mean(self):
        g = graph_from_edges(4, [(0, 1), (0, 2), (0, 3)])
        labels = np.array([0, 1, 1, 2])
        dom = init_domination(labels, 2)
        out = propagation_step(dom, g, labels)
        np.testing.assert_allclose(out[0], [2 / 3, 1 / 3])

    def test_synchronous_reads_from_time_t(self):
        # chain seed-a-b: b must see a's OLD value, not the updated one
        g = graph_from_edges(3, [(0, 1), (1, 2)])
        labels = np.array([1, 0, 0])
        dom = init_domination(labels, 2)
        out = propagation_step(dom, g, labels)
        assert out[1].tolist() == [0.75, 0.25]
        assert out[2].tolist() == [0.5, 0.5]  # b saw a's uniform row

    def test_degree_zero_node_frozen_and_reported(self):
        g = graph_from_edges(3, [(0, 1)])
        labels = np.array([1, 0, 0])
        dom = init_domination(labels, 2)
        with pytest.warns(UserWarning, match="no neighbors"):
            out = propagation_step(dom, g, labels)
        assert out[2].tolist() == [0.5, 0.5]

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            n = int(rng.integers(4, 30))
            C = int(rng.integers(2, 5))
            g = random_graph(n, rng)
            labels = rng.integers(0, C + 1, size=n)
            P = dense_update_matrix(g, labels)
            dom = init_domination(labels, C)
            oracle = dom.copy()
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                for _ in range(20):
                    dom = propagation_step(dom, g, labels)
                    oracle = P @ oracle
                    assert np.abs(dom - oracle).max() < 1e-12


class TestStatistic:
    def test_uniform_rows(self):
        dom = np.full((4, 2), 0.5)
        assert convergence_statistic(dom, np.arange(4)) == 0.5

    def test_hand_computed(self):
        dom = np.array([[0.9, 0.1], [0.6, 0.4]])
        assert convergence_statistic(dom, np.arange(2)) == pytest.approx(0.75)

    def test_one_hot_rows(self):
        dom = np.eye(3)
        assert convergence_statistic(dom, np.arange(3)) == 1.0

    def test_no_unlabeled_defined_as_one(self):
        assert convergence_statistic(np.eye(2), np.array([], dtype=np.int64)) == 1.0


class TestDecode:
    def test_argmax(self):
        assert decode_labels(np.array([[0.7, 0.3]])).tolist() == [1]

    def test_tie_goes_to_lowest_class(self):
        assert decode_labels(np.array([[0.5, 0.5]])).tolist() == [1]

    def test_one_hot_third_of_four(self):
        row = np.zeros((1, 4))
        row[0, 2] = 1.0
        assert decode_labels(row).tolist() == [3]


class TestRun:
    def test_all_neighbors_labeled_one_class(self):
        # one-step fixed point: statistic hits 1.0 at the first checkpoint
        # and the 10-vs-20 comparison stops the run at iteration 20
        g = graph_from_edges(3, [(0, 1), (0, 2)])
        labels = np.array([0, 1, 1])
        with pytest.warns(UserWarning, match="without seeds"):
            dom0 = init_domination(labels, 2)
        res = run_propagation(dom0, g, labels)
        assert res.converged
        assert res.iterations == 20
        assert res.domination[0].tolist() == [1.0, 0.0]
        assert res.checkpoints[0] == (0, 0.5)
        assert res.checkpoints[1] == (10, 1.0)

    def test_no_unlabeled_returns_input(self):
        g = graph_from_edges(2, [(0, 1)])
        labels = np.array([1, 2])
        dom0 = init_domination(labels, 2)
        res = run_propagation(dom0, g, labels)
        assert res.iterations == 0
        assert res.converged
        np.testing.assert_array_equal(res.domination, dom0)

    def test_path_symmetry_split(self):
        g = graph_from_edges(4, [(0, 1), (1, 2), (2, 3)])
        labels = np.array([1, 0, 0, 2])
        dom0 = init_domination(labels, 2)
        res = run_propagation(dom0, g, labels)
        assert res.converged
        decoded = decode_labels(res.domination)
        assert decoded.tolist() == [1, 1, 2, 2]
        # mirror symmetry of the chain
        np.testing.assert_allclose(res.domination[1], res.domination[2][::-1])

    def test_nonconvergence_flagged_at_cap(self):
        g = graph_from_edges(4, [(0, 1), (1, 2), (2, 3)])
        labels = np.array([1, 0, 0, 2])
        dom0 = init_domination(labels, 2)
        with pytest.warns(UserWarning, match="cap"):
            res = run_propagation(
                dom0, g, labels, monitor=ConvergenceMonitor(max_iterations=3)
            )
        assert not res.converged
        assert res.iterations == 3

    def test_trace_callback_sees_checkpoints(self):
        g = graph_from_edges(3, [(0, 1), (1, 2)])
        labels = np.array([1, 0, 2])
        dom0 = init_domination(labels, 2)
        rows = []
        res = run_propagation(dom0, g, labels, trace=lambda it, s: rows.append((it, s)))
        assert rows == res.checkpoints
        assert rows[0][0] == 0
        assert all(b[0] - a[0] == 10 for a, b in zip(rows, rows[1:]))

    def test_deterministic_across_runs_and_workers(self):
        rng = np.random.default_rng(9)
        g = random_graph(60, rng)
        labels = rng.integers(0, 3, size=60)
        labels[:2] = [1, 2]
        dom0 = init_domination(labels, 2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            runs = [run_propagation(dom0, g, labels, workers=w) for w in (1, 1, 2, 8)]
        for other in runs[1:]:
            np.testing.assert_array_equal(runs[0].domination, other.domination)
            assert runs[0].iterations == other.iterations


class TestInvariants:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_rows_stay_stochastic_and_in_range(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 25))
        C = int(rng.integers(2, 5))
        g = random_graph(n, rng, p=0.3)
        labels = rng.integers(0, C + 1, size=n)
        dom = init_domination(labels, C)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for _ in range(5):
                dom = propagation_step(dom, g, labels)
                assert np.abs(dom.sum(axis=1) - 1.0).max() < 1e-9
                assert dom.min() >= 0.0 and dom.max() <= 1.0

    def test_labeled_rows_bit_identical(self):
        rng = np.random.default_rng(3)
        g = random_graph(30, rng)
        labels = rng.integers(0, 3, size=30)
        labels[:2] = [1, 2]
        dom = init_domination(labels, 2)
        seeded = labels > 0
        before = dom[seeded].copy()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = run_propagation(dom, g, labels)
        np.testing.assert_array_equal(res.domination[seeded], before)

    def test_fixed_point_statistic_stable(self):
        g = graph_from_edges(3, [(0, 1), (1, 2)])
        labels = np.array([1, 0, 1])
        with pytest.warns(UserWarning, match="without seeds"):
            dom = init_domination(labels, 2)
        for _ in range(30):
            dom = propagation_step(dom, g, labels)
        fixed = propagation_step(dom, g, labels)
        np.testing.assert_array_equal(fixed, dom)
        unl = np.array([1])
        assert convergence_statistic(fixed, unl) == convergence_statistic(dom, unl)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(31)
        n = 20
        g = random_graph(n, rng)
        labels = rng.integers(0, 3, size=n)
        labels[:2] = [1, 2]
        perm = rng.permutation(n)
        inv = np.argsort(perm)
        # rebuild the graph under the relabeling i -> inv[i]
        edge_list = []
        for i in range(n):
            for j in g.neighbors(i):
                if i < j:
                    edge_list.append((int(inv[i]), int(inv[j])))
        g_perm = graph_from_edges(n, edge_list)
        labels_perm = np.empty(n, dtype=labels.dtype)
        labels_perm[inv] = labels
        dom = init_domination(labels, 2)
        dom_perm = init_domination(labels_perm, 2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for _ in range(7):
                dom = propagation_step(dom, g, labels)
                dom_perm = propagation_step(dom_perm, g_perm, labels_perm)
        np.testing.assert_array_equal(dom_perm[inv], dom)

    def test_two_class_symmetry(self):
        rng = np.random.default_rng(37)
        n = 25
        g = random_graph(n, rng)
        labels = rng.integers(0, 3, size=n)
        labels[:2] = [1, 2]
        swapped = np.where(labels == 1, 2, np.where(labels == 2, 1, 0))
        dom = init_domination(labels, 2)
        dom_swapped = init_domination(swapped, 2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for _ in range(7):
                dom = propagation_step(dom, g, labels)
                dom_swapped = propagation_step(dom_swapped, g, swapped)
        np.testing.assert_array_equal(dom_swapped, dom[:, ::-1])
