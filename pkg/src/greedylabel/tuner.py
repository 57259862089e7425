"""Training-only hyperparameter search.

Random search over the interpretable coefficients, scored by stratified
cross-validation drawn solely from the training set. The training-set
homophily estimate constrains the sign of the neighbor-agreement coefficient
(a2): clearly homophilic graphs search a2 >= 0, clearly heterophilic graphs
a2 <= 0, and graphs near the random baseline search both signs. Validation
and test indices are never touched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import Graph
from .predictor import HyperParams, accuracy, predict
from .stats import TrainStats, compute_train_stats

StatsBuilder = Callable[[Graph, np.ndarray], TrainStats]


@dataclass(frozen=True)
class SearchSpace:
    budget: int = 200
    folds: int = 3
    seed: int = 0
    coef_bound: float = 2.0  # a1,a3,a8,b1..b3 in [0, bound]; a2 within +-bound
    a7_bound: float = 1.0
    delta_h: float = 0.05  # dead band around 1/C inside which a2 keeps both signs
    k0_choices: tuple[int, ...] = (1, 2, 3, 5)
    tau_defer_choices: tuple[float, ...] = (0.0,)
    adapt_a2: bool = True
    adapt_a8: bool = True
    use_two_hop: bool = False
    standardize: bool = True

    def validate(self) -> None:
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if not self.k0_choices or not self.tau_defer_choices:
            raise ValueError("choice sets must be nonempty")
        if self.coef_bound <= 0.0 or not 0.0 <= self.a7_bound <= 1.0:
            raise ValueError("invalid sampling bounds")


@dataclass(frozen=True)
class TuneResult:
    best: HyperParams
    cv_mean_accuracy: float
    per_candidate_log: list[tuple[HyperParams, float]]
    a2_range: tuple[float, float]
    warnings: list[str]


def a2_sign_range(h: float, num_classes: int, delta_h: float, bound: float) -> tuple[float, float]:
    """Admissible a2 interval given the shrunk training homophily."""
    baseline = 1.0 / num_classes
    if h > baseline + delta_h:
        return (0.0, bound)
    if h < baseline - delta_h:
        return (-bound, 0.0)
    return (-bound, bound)


def stratified_folds(
    train: np.ndarray, labels: np.ndarray, k: int, seed: int
) -> list[np.ndarray]:
    """Partition the train set into k folds with per-class counts within one.

    Classes are dealt round-robin with a running offset so fold sizes stay
    balanced too. Deterministic given the seed.
    """
    train = np.asarray(train, dtype=np.int64)
    if k > train.size:
        raise ValueError(f"cannot make {k} folds from {train.size} training nodes")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for c in np.unique(labels[train]):
        members = train[labels[train] == c]
        members = members[rng.permutation(members.size)]
        for idx, node in enumerate(members.tolist()):
            folds[(offset + idx) % k].append(node)
        offset = (offset + members.size) % k
    return [np.asarray(sorted(f), dtype=np.int64) for f in folds]


def sample_hyperparams(
    rng: np.random.Generator, space: SearchSpace, a2_range: tuple[float, float]
) -> HyperParams:
    b = space.coef_bound
    return HyperParams(
        a1=float(rng.uniform(0.0, b)),
        a2=float(rng.uniform(*a2_range)),
        a3=float(rng.uniform(0.0, b)),
        a7=float(rng.uniform(0.0, space.a7_bound)),
        a8=float(rng.uniform(0.0, b)),
        b1=float(rng.uniform(0.0, b)),
        b2=float(rng.uniform(0.0, b)),
        b3=float(rng.uniform(0.0, b)),
        k0=int(space.k0_choices[rng.integers(len(space.k0_choices))]),
        tau_defer=float(space.tau_defer_choices[rng.integers(len(space.tau_defer_choices))]),
        use_two_hop=space.use_two_hop,
        adapt_a2=space.adapt_a2,
        adapt_a8=space.adapt_a8,
        standardize=space.standardize,
        seed=space.seed,
    )


def tune(
    graph: Graph,
    train: np.ndarray,
    space: SearchSpace,
    stats_builder: StatsBuilder | None = None,
) -> TuneResult:
    """Random search scored by training-only cross-validation.

    Per-fold statistics are recomputed from the reduced training set, so a
    held-out fold's labels never enter priors, compatibility, homophily, or
    prototypes. Ties in mean CV accuracy keep the earliest-sampled candidate.
    """
    space.validate()
    train = np.asarray(train, dtype=np.int64)
    if stats_builder is None:
        stats_builder = compute_train_stats
    warnings: list[str] = []

    full_stats = stats_builder(graph, train)
    a2_range = a2_sign_range(full_stats.h, full_stats.num_classes, space.delta_h, space.coef_bound)

    k = space.folds
    if k > train.size:
        if train.size < 2:
            raise ValueError("need at least 2 training nodes to cross-validate")
        k = train.size
        warnings.append(f"folds reduced to {k} for a training set of {train.size}")
    folds = stratified_folds(train, graph.labels, k, space.seed)
    folds = [f for f in folds if f.size]
    if len(folds) < k:
        warnings.append(f"{k - len(folds)} empty folds dropped")
    fold_stats = [stats_builder(graph, np.setdiff1d(train, fold)) for fold in folds]

    rng = np.random.default_rng(space.seed)
    log: list[tuple[HyperParams, float]] = []
    best_idx = -1
    best_score = -np.inf
    for idx in range(space.budget):
        hp = sample_hyperparams(rng, space, a2_range)
        fold_accs = []
        for fold, stats_f in zip(folds, fold_stats):
            result = predict(graph, np.setdiff1d(train, fold), fold, hp, stats_f)
            fold_accs.append(accuracy(result.predicted, graph.labels, fold))
        mean_acc = float(np.mean(fold_accs))
        log.append((hp, mean_acc))
        if mean_acc > best_score:
            best_score = mean_acc
            best_idx = idx

    return TuneResult(
        best=log[best_idx][0],
        cv_mean_accuracy=best_score,
        per_candidate_log=log,
        a2_range=a2_range,
        warnings=warnings,
    )


def tuning_log_json(result: TuneResult) -> list[dict]:
    """Per-candidate log in the diagnostic JSON shape."""
    from dataclasses import asdict

    return [{"params": asdict(hp), "cv_accuracy": acc} for hp, acc in result.per_candidate_log]
