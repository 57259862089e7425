import os
from pathlib import Path

import numpy as np
import pytest

from greedylabel.graph import build_graph
from greedylabel.stats import compute_train_stats

# Real benchmark datasets are not bundled; point GREEDYLABEL_DATA at a
# directory containing <name>/{edges.txt,features.csv,labels.csv,splits.json}
# to enable the dataset-dependent acceptance tests.
DATA_ROOT = Path(os.environ.get("GREEDYLABEL_DATA", Path(__file__).resolve().parents[1] / "data"))


def dataset_dir(name: str) -> Path:
    path = DATA_ROOT / name
    if not (path / "edges.txt").exists():
        pytest.skip(f"dataset {name!r} not available under {DATA_ROOT}")
    return path


def random_graph(rng: np.random.Generator, n: int, num_classes: int, d: int = 4, edge_p: float = 0.35):
    """Small random labeled graph for property tests."""
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < edge_p:
                edges.append((u, v))
    features = rng.normal(size=(n, d))
    labels = rng.integers(0, num_classes, size=n)
    # make sure every class has at least one node so priors stay meaningful
    labels[:num_classes] = np.arange(num_classes)
    return build_graph(edges, features, labels, num_classes=num_classes)


@pytest.fixture
def path_graph():
    """Path 0-1-2-3 with class-aligned features; train = {0: A, 3: B}."""
    features = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
    labels = np.array([0, -1, -1, 1])
    graph = build_graph([(0, 1), (1, 2), (2, 3)], features, labels, num_classes=2)
    train = np.array([0, 3])
    return graph, train, compute_train_stats(graph, train)
