import numpy as np
import pytest

from greedylabel.graph import (
    SplitSpec,
    build_graph,
    edge_homophily,
    standardize_features,
    symmetrize_dedup,
)


def undirected_edge_set(indptr, indices):
    out = set()
    for u in range(len(indptr) - 1):
        for v in indices[indptr[u] : indptr[u + 1]]:
            out.add((min(u, int(v)), max(u, int(v))))
    return out


def test_symmetrize_dedup_merges_duplicates_and_orientations():
    indptr, indices = symmetrize_dedup([(0, 1), (1, 0), (1, 2), (1, 2)], n=3)
    assert undirected_edge_set(indptr, indices) == {(0, 1), (1, 2)}
    assert np.diff(indptr).tolist() == [1, 2, 1]


def test_symmetrize_dedup_empty_edges():
    indptr, indices = symmetrize_dedup([], n=4)
    assert indices.size == 0
    assert np.diff(indptr).tolist() == [0, 0, 0, 0]


def test_symmetrize_dedup_drops_self_loops():
    indptr, indices = symmetrize_dedup([(2, 2), (0, 1)], n=3)
    assert undirected_edge_set(indptr, indices) == {(0, 1)}


def test_symmetrize_dedup_rejects_out_of_range():
    with pytest.raises(ValueError):
        symmetrize_dedup([(0, 3)], n=3)


def test_symmetrize_dedup_order_invariant():
    rng = np.random.default_rng(0)
    edges = [(0, 1), (2, 3), (1, 2), (3, 0), (1, 3), (1, 0), (2, 3)]
    base = symmetrize_dedup(edges, n=5)
    for _ in range(10):
        perm = [edges[i] for i in rng.permutation(len(edges))]
        indptr, indices = symmetrize_dedup(perm, n=5)
        assert np.array_equal(indptr, base[0])
        assert np.array_equal(indices, base[1])


def test_graph_invariants_after_build():
    graph = build_graph(
        [(0, 1), (1, 0), (2, 2), (1, 2)],
        features=np.zeros((4, 2)),
        labels=np.array([0, 1, -1, 0]),
        num_classes=2,
    )
    graph.validate()
    assert graph.degrees.tolist() == [1, 2, 1, 0]
    assert graph.num_edges == 2


def test_standardize_single_column_zscore():
    # z-score with population std by direct evaluation: mean 2, std 1
    col = np.array([[1.0], [3.0]])
    out = standardize_features(col)
    expected = (col - col.mean()) / col.std()
    assert np.allclose(out, expected)
    assert np.allclose(out.ravel(), [-1.0, 1.0])


def test_standardize_constant_column_maps_to_zero():
    out = standardize_features(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]]))
    assert np.all(out[:, 0] == 0.0)


def test_standardize_idempotent():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(20, 5)) * np.array([1.0, 10.0, 0.1, 2.0, 5.0])
    once = standardize_features(x)
    twice = standardize_features(once)
    assert np.max(np.abs(twice - once)) < 1e-9


def test_split_spec_validation():
    ok = SplitSpec(np.array([0, 1]), np.array([2]), np.array([3]))
    ok.validate(4)
    with pytest.raises(ValueError, match="out of range"):
        SplitSpec(np.array([0, 7]), np.array([1]), np.array([2])).validate(4)
    with pytest.raises(ValueError, match="overlap"):
        SplitSpec(np.array([0, 1]), np.array([1]), np.array([2])).validate(4)
    with pytest.raises(ValueError, match="nonempty"):
        SplitSpec(np.array([], dtype=np.int64), np.array([0]), np.array([1])).validate(4)


def test_edge_homophily_counts_labeled_edges_only():
    graph = build_graph(
        [(0, 1), (1, 2), (2, 3)],
        features=np.zeros((4, 1)),
        labels=np.array([0, 0, -1, 1]),
        num_classes=2,
    )
    # only edge (0,1) has both endpoints labeled, and they agree
    assert edge_homophily(graph) == 1.0


def test_with_labels_rejects_bad_values(path_graph):
    graph, _, _ = path_graph
    with pytest.raises(ValueError):
        graph.with_labels(np.array([0, 1, 2, 5]))


def test_graph_arrays_are_read_only(path_graph):
    graph, _, _ = path_graph
    with pytest.raises(ValueError):
        graph.labels[0] = 1
    with pytest.raises(ValueError):
        graph.features[0, 0] = 9.0
