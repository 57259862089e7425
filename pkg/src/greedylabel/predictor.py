"""Confidence-ordered greedy label assignment with additive evidence scoring.

Target nodes are processed in descending priority order; each step assigns
the class maximizing an additive score built from the class prior, the
labeled-neighbor distribution, feature-prototype similarity, and
compatibility support. Structural terms can be attenuated while a node has
few labeled neighbors, low-margin assignments can be deferred once, and
prototypes, similarities, and priorities are refreshed on a fixed schedule.
The whole procedure is deterministic: no randomness, ties broken by a fixed
lexicographic rule.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .graph import Graph
from .stats import TrainStats, feature_similarity, prototypes

# Absolute score difference that counts as a tie, both for the tie-breaking
# rule and for the tie-rate diagnostic.
EPS_TIE = 1e-6


@dataclass(frozen=True)
class HyperParams:
    """Interpretable coefficients plus procedural knobs of the greedy labeler.

    a1 weighs the class prior, a2 the direct neighbor-label agreement
    (positive favors same-label neighbors, negative penalizes them), a3 the
    feature-prototype similarity, a8 the compatibility support, and a9 the
    two-hop label distribution (only with use_two_hop). a7 in [0, 1] is the
    weight of propagated labels when prototypes are refreshed. b1/b2/b3 weigh
    the priority ordering (train-neighbor fraction, propagated-neighbor
    fraction, best feature similarity). k0 is the attenuation knee: terms
    flagged adapt_* are scaled by min(1, L/k0) where L is the labeled
    neighbor count.
    """

    a1: float = 0.5
    a2: float = 1.0
    a3: float = 1.0
    a7: float = 0.3
    a8: float = 1.0
    a9: float = 0.2
    b1: float = 1.0
    b2: float = 0.5
    b3: float = 0.3
    k0: int = 2
    tau_defer: float = 0.0
    use_two_hop: bool = False
    adapt_a2: bool = True
    adapt_a8: bool = True
    standardize: bool = True
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 <= self.a7 <= 1.0:
            raise ValueError("a7 must lie in [0, 1]")
        if self.k0 < 1:
            raise ValueError("k0 must be >= 1")
        if self.tau_defer < 0.0:
            raise ValueError("tau_defer must be nonnegative")
        if min(self.b1, self.b2, self.b3) < 0.0:
            raise ValueError("priority weights must be nonnegative")


@dataclass(frozen=True)
class Diagnostics:
    tie_rate: float
    mean_margin: float
    deferral_count: int
    refresh_count: int


@dataclass(frozen=True)
class PredictionResult:
    predicted: dict[int, int]
    diagnostics: Diagnostics
    assignment_order: list[int]
    # Per-assignment score vectors, populated only on request.
    score_trace: list[np.ndarray] | None = field(default=None, repr=False)


def attenuation(labeled_neighbors: int, k0: int) -> float:
    """Evidence ramp min(1, L/k0): zero with no labeled neighbors, full at k0."""
    return min(1.0, labeled_neighbors / k0)


def neighbor_distribution(counts: np.ndarray, degree: int) -> np.ndarray:
    """Per-class labeled-neighbor counts normalized by degree (zeros if isolated)."""
    if degree == 0:
        return np.zeros_like(counts, dtype=np.float64)
    return counts / degree


def compatibility_support(
    counts: np.ndarray, labeled_count: int, compat: np.ndarray
) -> np.ndarray:
    """Compatibility rows averaged under the labeled-neighbor class distribution.

    Zero vector when the node has no labeled neighbor.
    """
    if labeled_count == 0:
        return np.zeros(compat.shape[1], dtype=np.float64)
    w = counts / labeled_count
    return w @ compat


def score(
    class_index: int,
    priors: np.ndarray,
    p_u: np.ndarray,
    d_u: np.ndarray,
    s_u: np.ndarray,
    labeled_count: int,
    hp: HyperParams,
    two_hop: np.ndarray | None = None,
) -> float:
    """Additive evidence score of one class for one node."""
    c = class_index
    g = attenuation(labeled_count, hp.k0)
    g2 = g if hp.adapt_a2 else 1.0
    g8 = g if hp.adapt_a8 else 1.0
    value = (
        hp.a1 * float(priors[c])
        + hp.a2 * g2 * float(p_u[c])
        + hp.a3 * float(d_u[c])
        + hp.a8 * g8 * float(s_u[c])
    )
    if hp.use_two_hop and two_hop is not None:
        value += hp.a9 * float(two_hop[c])
    return value


def priority(
    train_nbr_count: int,
    prop_nbr_count: int,
    degree: int,
    best_similarity: float,
    hp: HyperParams,
) -> float:
    """Evidence-reliability priority used to order the greedy assignment."""
    if degree == 0:
        train_frac = prop_frac = 0.0
    else:
        train_frac = train_nbr_count / degree
        prop_frac = prop_nbr_count / degree
    return hp.b1 * train_frac + hp.b2 * prop_frac + hp.b3 * best_similarity


def two_hop_distribution(graph: Graph, node: int, known: np.ndarray, num_classes: int) -> np.ndarray:
    """Class distribution over nodes at exactly distance 2 from `node`.

    `known` maps node index to class (-1 = unlabeled). The distance-2 shell
    excludes the node itself and its direct neighbors; the denominator is the
    shell size, so unlabeled shell nodes dilute the distribution.
    """
    direct = graph.neighbors(node)
    excluded = set(direct.tolist())
    excluded.add(node)
    shell: set[int] = set()
    for v in direct:
        shell.update(graph.neighbors(int(v)).tolist())
    shell -= excluded
    out = np.zeros(num_classes, dtype=np.float64)
    if not shell:
        return out
    for w in shell:
        c = int(known[w])
        if c >= 0:
            out[c] += 1.0
    return out / len(shell)


def _choose_class(
    scores: np.ndarray, p_u: np.ndarray, d_u: np.ndarray, priors: np.ndarray
) -> tuple[int, float]:
    """Argmax with deterministic tie-breaking; returns (class, top-two margin)."""
    best = float(scores.max())
    candidates = [c for c in range(scores.size) if scores[c] >= best - EPS_TIE]
    if len(candidates) == 1:
        choice = candidates[0]
    else:
        choice = max(candidates, key=lambda c: (p_u[c], d_u[c], priors[c], -c))
    if scores.size < 2:
        return choice, float("inf")
    top_two = np.partition(scores, -2)[-2:]
    return choice, float(top_two[1] - top_two[0])


def predict(
    graph: Graph,
    train: np.ndarray,
    target: np.ndarray,
    hp: HyperParams,
    stats: TrainStats,
    record_scores: bool = False,
) -> PredictionResult:
    """Label every node in `target` by confidence-ordered greedy assignment.

    Reads labels only at train indices; the output is a pure function of
    (graph structure, features, train labels, target, hp, stats).
    """
    hp.validate()
    train = np.asarray(train, dtype=np.int64)
    target = np.unique(np.asarray(target, dtype=np.int64))
    if target.size and (target.min() < 0 or target.max() >= graph.n):
        raise ValueError("target index out of range")
    if np.intersect1d(train, target).size:
        raise ValueError("target set must be disjoint from the training set")
    if stats.num_classes != graph.num_classes:
        raise ValueError("stats were computed for a different class count")

    C = graph.num_classes
    train_labels = graph.labels[train]
    if np.any(train_labels < 0):
        raise ValueError("every training node must be labeled")
    train_map = {int(u): int(c) for u, c in zip(train.tolist(), train_labels.tolist())}

    m = target.size
    row_of = np.full(graph.n, -1, dtype=np.int64)
    row_of[target] = np.arange(m)
    # known[v] >= 0 iff v is train-labeled or already propagated
    known = np.full(graph.n, -1, dtype=np.int64)
    known[train] = train_labels

    counts = np.zeros((m, C), dtype=np.float64)
    train_nbr = np.zeros(m, dtype=np.int64)
    prop_nbr = np.zeros(m, dtype=np.int64)
    for i, u in enumerate(target.tolist()):
        for v in graph.neighbors(u).tolist():
            c = train_map.get(v)
            if c is not None:
                counts[i, c] += 1.0
                train_nbr[i] += 1

    protos = stats.prototypes
    sims = np.empty((m, C), dtype=np.float64)
    for i, u in enumerate(target.tolist()):
        for c in range(C):
            sims[i, c] = feature_similarity(graph.features[u], protos[c])

    def node_priority(i: int, u: int) -> float:
        best_sim = float(sims[i].max()) if C else 0.0
        return priority(int(train_nbr[i]), int(prop_nbr[i]), int(graph.degrees[u]), best_sim, hp)

    version = np.zeros(m, dtype=np.int64)
    heap = [(-node_priority(i, int(u)), int(u), 0) for i, u in enumerate(target)]
    heapq.heapify(heap)

    assigned: dict[int, int] = {}
    deferred: set[int] = set()
    order: list[int] = []
    margins: list[float] = []
    trace: list[np.ndarray] | None = [] if record_scores else None
    ties = 0
    deferral_count = 0
    refresh_count = 0
    refresh_interval = max(graph.n // 5, 1)

    while heap:
        neg_pri, u, ver = heapq.heappop(heap)
        i = int(row_of[u])
        if u in assigned or ver != version[i]:
            continue

        labeled_count = int(train_nbr[i] + prop_nbr[i])
        degree = int(graph.degrees[u])
        p_u = neighbor_distribution(counts[i], degree)
        s_u = compatibility_support(counts[i], labeled_count, stats.compat)
        hop2 = two_hop_distribution(graph, u, known, C) if hp.use_two_hop else None
        scores = np.array(
            [score(c, stats.priors, p_u, sims[i], s_u, labeled_count, hp, hop2) for c in range(C)]
        )
        choice, margin = _choose_class(scores, p_u, sims[i], stats.priors)

        if hp.tau_defer > 0.0 and margin < hp.tau_defer and u not in deferred:
            # one deferral per node: halve its priority and revisit later
            deferred.add(u)
            deferral_count += 1
            version[i] += 1
            heapq.heappush(heap, (neg_pri * 0.5, u, int(version[i])))
            continue

        assigned[u] = choice
        known[u] = choice
        order.append(u)
        margins.append(margin)
        if margin <= EPS_TIE:
            ties += 1
        if trace is not None:
            trace.append(scores)

        for v in graph.neighbors(u).tolist():
            j = int(row_of[v])
            if j >= 0 and v not in assigned:
                counts[j, choice] += 1.0
                prop_nbr[j] += 1

        if len(assigned) % refresh_interval == 0 and len(assigned) < m:
            refresh_count += 1
            protos = prototypes(graph.features, C, train_map, assigned, hp.a7)
            remaining = [int(v) for v in target.tolist() if v not in assigned]
            for v in remaining:
                j = int(row_of[v])
                for c in range(C):
                    sims[j, c] = feature_similarity(graph.features[v], protos[c])
            version += 1
            heap = [(-node_priority(int(row_of[v]), v), v, int(version[row_of[v]])) for v in remaining]
            heapq.heapify(heap)

    tie_rate = ties / m if m else 0.0
    mean_margin = float(np.mean(margins)) if margins else 0.0
    diagnostics = Diagnostics(
        tie_rate=tie_rate,
        mean_margin=mean_margin,
        deferral_count=deferral_count,
        refresh_count=refresh_count,
    )
    return PredictionResult(
        predicted=assigned,
        diagnostics=diagnostics,
        assignment_order=order,
        score_trace=trace,
    )


def accuracy(predicted: Mapping[int, int], labels: np.ndarray, nodes: np.ndarray) -> float:
    """Fraction of `nodes` whose prediction matches `labels` (1.0 if empty)."""
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.size == 0:
        return 1.0
    hits = sum(1 for u in nodes.tolist() if predicted.get(int(u)) == int(labels[u]))
    return hits / nodes.size
