"""Output equivalence between the incremental predictor and the from-scratch
reference: same assignments, same order, same diagnostics."""

import numpy as np

from greedylabel.predictor import HyperParams, predict
from greedylabel.stats import compute_train_stats

from conftest import random_graph
from oracle import reference_predict


def random_hyperparams(rng: np.random.Generator) -> HyperParams:
    return HyperParams(
        a1=float(rng.uniform(0, 2)),
        a2=float(rng.uniform(-2, 2)),
        a3=float(rng.uniform(0, 2)),
        a7=float(rng.uniform(0, 1)),
        a8=float(rng.uniform(0, 2)),
        a9=float(rng.uniform(0, 1)),
        b1=float(rng.uniform(0, 2)),
        b2=float(rng.uniform(0, 2)),
        b3=float(rng.uniform(0, 2)),
        k0=int(rng.choice([1, 2, 3, 5])),
        tau_defer=float(rng.choice([0.0, 0.01, 0.05, 0.3])),
        use_two_hop=bool(rng.random() < 0.5),
        adapt_a2=bool(rng.random() < 0.8),
        adapt_a8=bool(rng.random() < 0.8),
    )


def random_instance(rng: np.random.Generator):
    n = int(rng.integers(4, 13))
    num_classes = int(rng.integers(2, min(5, n - 1)))
    graph = random_graph(rng, n, num_classes, d=3, edge_p=float(rng.uniform(0.15, 0.6)))
    perm = rng.permutation(n)
    n_train = int(rng.integers(num_classes, n))
    train = np.sort(perm[:n_train])
    target = np.sort(perm[n_train:])
    return graph, train, target


def check_equivalence(seed: int) -> None:
    rng = np.random.default_rng(seed)
    graph, train, target = random_instance(rng)
    if target.size == 0:
        return
    hp = random_hyperparams(rng)
    stats = compute_train_stats(graph, train)
    fast = predict(graph, train, target, hp, stats)
    slow = reference_predict(graph, train, target, hp, stats)
    assert fast.predicted == slow.predicted, f"seed {seed}: assignments differ"
    assert fast.assignment_order == slow.assignment_order, f"seed {seed}: order differs"
    assert fast.diagnostics == slow.diagnostics, f"seed {seed}: diagnostics differ"


def test_incremental_matches_reference_on_200_random_instances():
    for seed in range(200):
        check_equivalence(seed)
