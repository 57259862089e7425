"""Immutable undirected simple graph with node features and (partial) labels.

Adjacency is stored CSR-style (``indptr``/``indices``) with every neighbor
list sorted, deduplicated, self-loop free, and symmetric. Labels use -1 for
unlabeled nodes; every real label lies in ``[0, num_classes)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

UNLABELED = -1


@dataclass(frozen=True)
class Graph:
    n: int
    indptr: np.ndarray  # int64, shape (n+1,)
    indices: np.ndarray  # int64, sorted within each row
    features: np.ndarray  # float64, shape (n, d)
    labels: np.ndarray  # int64, shape (n,), UNLABELED for unknown
    num_classes: int
    degrees: np.ndarray  # int64, shape (n,)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return int(self.indices.size) // 2

    def validate(self) -> None:
        """Check all structural invariants; raises ValueError on violation."""
        if self.n < 0:
            raise ValueError("node count must be nonnegative")
        if self.indptr.shape != (self.n + 1,) or self.indptr[0] != 0:
            raise ValueError("indptr malformed")
        if self.indices.size != self.indptr[-1]:
            raise ValueError("indices length inconsistent with indptr")
        if not np.array_equal(self.degrees, np.diff(self.indptr)):
            raise ValueError("degrees inconsistent with adjacency")
        if self.features.shape[0] != self.n:
            raise ValueError("feature row count != n")
        if self.labels.shape != (self.n,):
            raise ValueError("labels length != n")
        if self.num_classes < 1:
            raise ValueError("num_classes must be positive")
        real = self.labels[self.labels != UNLABELED]
        if real.size and (real.min() < 0 or real.max() >= self.num_classes):
            raise ValueError("label outside [0, num_classes)")
        seen = set()
        for u in range(self.n):
            row = self.neighbors(u)
            if row.size:
                if np.any(np.diff(row) <= 0):
                    raise ValueError(f"neighbor list of {u} not sorted/deduped")
                if row.min() < 0 or row.max() >= self.n:
                    raise ValueError(f"neighbor of {u} out of range")
                if np.any(row == u):
                    raise ValueError(f"self-loop at {u}")
            for v in row:
                seen.add((u, int(v)))
        for u, v in seen:
            if (v, u) not in seen:
                raise ValueError(f"adjacency not symmetric at ({u},{v})")

    def with_features(self, features: np.ndarray) -> "Graph":
        """Same structure and labels, different feature matrix."""
        features = np.ascontiguousarray(features, dtype=np.float64)
        if features.shape[0] != self.n:
            raise ValueError("feature row count != n")
        features.setflags(write=False)
        return replace(self, features=features)

    def with_labels(self, labels: np.ndarray) -> "Graph":
        """Same structure and features, different label vector."""
        labels = np.ascontiguousarray(labels, dtype=np.int64)
        real = labels[labels != UNLABELED]
        if labels.shape != (self.n,) or (
            real.size and (real.min() < 0 or real.max() >= self.num_classes)
        ):
            raise ValueError("invalid replacement labels")
        labels.setflags(write=False)
        return replace(self, labels=labels)


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint train/val/test index sets for one experimental split."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def validate(self, n: int) -> None:
        for name, arr in (("train", self.train), ("val", self.val), ("test", self.test)):
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                bad = int(arr[(arr < 0) | (arr >= n)][0])
                raise ValueError(f"{name} index {bad} out of range [0, {n})")
        if self.train.size == 0:
            raise ValueError("train set must be nonempty")
        combined = np.concatenate([self.train, self.val, self.test])
        uniq, counts = np.unique(combined, return_counts=True)
        if np.any(counts > 1):
            raise ValueError(f"split sets overlap at index {int(uniq[counts > 1][0])}")


def symmetrize_dedup(raw_edges, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Turn a raw (possibly directed, duplicated) edge list into CSR adjacency.

    Self-loops are dropped; both orientations of every edge are kept so the
    result is symmetric. Output is independent of the input edge order.
    Returns (indptr, indices).
    """
    edges = np.asarray(list(raw_edges), dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        bad = edges[(edges < 0).any(axis=1) | (edges >= n).any(axis=1)][0]
        raise ValueError(f"edge endpoint out of range [0, {n}): {tuple(bad)}")
    edges = edges[edges[:, 0] != edges[:, 1]]
    both = np.concatenate([edges, edges[:, ::-1]], axis=0)
    if both.size:
        both = np.unique(both, axis=0)  # sorts lexicographically: grouped by source
    src, dst = both[:, 0], both[:, 1]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    indices = np.ascontiguousarray(dst)
    return indptr, indices


def build_graph(
    raw_edges, features: np.ndarray, labels: np.ndarray, num_classes: int
) -> Graph:
    """Construct a validated Graph from a raw edge list."""
    features = np.ascontiguousarray(features, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    n = features.shape[0]
    indptr, indices = symmetrize_dedup(raw_edges, n)
    degrees = np.diff(indptr)
    for arr in (indptr, indices, features, labels, degrees):
        arr.setflags(write=False)
    g = Graph(
        n=n,
        indptr=indptr,
        indices=indices,
        features=features,
        labels=labels,
        num_classes=num_classes,
        degrees=degrees,
    )
    g.validate()
    return g


def standardize_features(features: np.ndarray) -> np.ndarray:
    """Column-wise z-scoring with population (1/n) standard deviation.

    Zero-variance columns map to all zeros instead of raising; standardized
    sparse datasets routinely contain constant columns.
    """
    features = np.asarray(features, dtype=np.float64)
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    out = features - mean
    nonzero = std > 0.0
    out[:, nonzero] /= std[nonzero]
    out[:, ~nonzero] = 0.0
    return out


def edge_endpoints(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """All undirected edges as (src, dst) arrays with src < dst."""
    src = np.repeat(np.arange(graph.n, dtype=np.int64), graph.degrees)
    dst = graph.indices
    keep = src < dst
    return src[keep], dst[keep]


def edge_homophily(graph: Graph) -> float:
    """Fraction of undirected edges whose endpoints share a label.

    Edges with an unlabeled endpoint are excluded; returns 0.0 when no
    labeled edge exists.
    """
    src, dst = edge_endpoints(graph)
    ys, yd = graph.labels[src], graph.labels[dst]
    labeled = (ys != UNLABELED) & (yd != UNLABELED)
    total = int(labeled.sum())
    if total == 0:
        return 0.0
    return float((ys[labeled] == yd[labeled]).sum()) / total
