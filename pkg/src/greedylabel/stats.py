"""Training-derived quantities: priors, label compatibility, homophily, prototypes.

Everything here is computed strictly from the training index set (plus, for
prototype refreshes, labels propagated by the predictor itself). Labels of
validation or test nodes are never read.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .graph import Graph, edge_endpoints


@dataclass(frozen=True)
class TrainStats:
    priors: np.ndarray  # (C,) smoothed class prior, sums to 1
    compat: np.ndarray  # (C, C) row-stochastic label-label compatibility
    h_raw: float  # raw train-train edge homophily (0 when no such edge)
    h: float  # homophily shrunk toward the 1/C baseline
    train_edges: int  # number of train-train undirected edges
    num_classes: int
    prototypes: np.ndarray  # (C, d) per-class feature centroids over train nodes
    alpha: float  # prior smoothing constant
    gamma: float  # homophily shrinkage constant


def class_priors(train_labels: np.ndarray, num_classes: int, alpha: float = 1.0) -> np.ndarray:
    """Smoothed class prior: (count_c + alpha) / (|T| + alpha * C)."""
    train_labels = np.asarray(train_labels, dtype=np.int64)
    if train_labels.size == 0:
        raise ValueError("priors are undefined for an empty training set")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    counts = np.bincount(train_labels, minlength=num_classes).astype(np.float64)
    return (counts + alpha) / (train_labels.size + alpha * num_classes)


def _train_train_edges(graph: Graph, train: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    in_train = np.zeros(graph.n, dtype=bool)
    in_train[train] = True
    src, dst = edge_endpoints(graph)
    keep = in_train[src] & in_train[dst]
    return src[keep], dst[keep]


def compatibility_matrix(graph: Graph, train: np.ndarray, beta: float = 1.0) -> np.ndarray:
    """Row-stochastic estimate of P(neighbor has class c | node has class c_n).

    Each train-train undirected edge contributes both ordered label pairs, so
    the raw count matrix is symmetric; smoothing keeps every entry positive
    and makes rows uniform when no train-train edge exists.
    """
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    C = graph.num_classes
    src, dst = _train_train_edges(graph, np.asarray(train, dtype=np.int64))
    counts = np.zeros((C, C), dtype=np.float64)
    ys, yd = graph.labels[src], graph.labels[dst]
    np.add.at(counts, (ys, yd), 1.0)
    np.add.at(counts, (yd, ys), 1.0)
    return (counts + beta) / (counts.sum(axis=1, keepdims=True) + beta * C)


def shrunk_homophily(
    graph: Graph, train: np.ndarray, num_classes: int, gamma: float = 20.0
) -> tuple[float, float, int]:
    """Train-only edge homophily pulled toward the 1/C random baseline.

    Returns (h_raw, h, m) with m the train-train undirected edge count. With
    no evidence (m = 0) the shrunk value is exactly the baseline.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    src, dst = _train_train_edges(graph, np.asarray(train, dtype=np.int64))
    m = int(src.size)
    h_raw = float((graph.labels[src] == graph.labels[dst]).sum()) / m if m else 0.0
    h = (m * h_raw + gamma * (1.0 / num_classes)) / (m + gamma)
    return h_raw, h, m


def prototypes(
    features: np.ndarray,
    num_classes: int,
    train_assignments: Mapping[int, int],
    propagated_assignments: Mapping[int, int],
    a7: float,
) -> np.ndarray:
    """Weighted per-class feature centroids.

    Train-origin nodes carry weight (1 - a7), propagated-origin nodes weight
    a7. Classes whose total weight is zero get an all-zero prototype.
    Accumulation runs in sorted node order so the result is independent of
    mapping insertion order.
    """
    d = features.shape[1]
    sums = np.zeros((num_classes, d), dtype=np.float64)
    weights = np.zeros(num_classes, dtype=np.float64)
    for assignments, w in ((train_assignments, 1.0 - a7), (propagated_assignments, a7)):
        if not assignments or w == 0.0:
            continue
        nodes = np.asarray(sorted(assignments), dtype=np.int64)
        classes = np.asarray([assignments[int(u)] for u in nodes], dtype=np.int64)
        np.add.at(sums, classes, w * features[nodes])
        np.add.at(weights, classes, w)
    out = np.zeros_like(sums)
    nonzero = weights > 0.0
    out[nonzero] = sums[nonzero] / weights[nonzero, None]
    return out


def feature_similarity(x: np.ndarray, mu: np.ndarray) -> float:
    """Cosine similarity rescaled to [0, 1]; 0.5 when either vector is zero."""
    nx = float(np.linalg.norm(x))
    nm = float(np.linalg.norm(mu))
    if nx == 0.0 or nm == 0.0:
        return 0.5
    cos = float(np.dot(x, mu)) / (nx * nm)
    cos = min(1.0, max(-1.0, cos))
    return (1.0 + cos) / 2.0


def compute_train_stats(
    graph: Graph,
    train: np.ndarray,
    alpha: float = 1.0,
    beta: float = 1.0,
    gamma: float = 20.0,
) -> TrainStats:
    """Assemble all training-derived quantities for one train set."""
    train = np.asarray(train, dtype=np.int64)
    train_labels = graph.labels[train]
    if np.any(train_labels < 0):
        raise ValueError("every training node must be labeled")
    C = graph.num_classes
    priors = class_priors(train_labels, C, alpha)
    compat = compatibility_matrix(graph, train, beta)
    h_raw, h, m = shrunk_homophily(graph, train, C, gamma)
    train_map = {int(u): int(graph.labels[u]) for u in train}
    protos = prototypes(graph.features, C, train_map, {}, a7=0.0)
    return TrainStats(
        priors=priors,
        compat=compat,
        h_raw=h_raw,
        h=h,
        train_edges=m,
        num_classes=C,
        prototypes=protos,
        alpha=alpha,
        gamma=gamma,
    )
