"""Stochastic-block synthetic graphs for property tests and benchmarks.

Nodes are partitioned into C near-equal contiguous classes. Each intra-class
pair is joined with probability ``p_in`` and each inter-class pair with
``p_out``. Features are a one-hot class prototype (first C dimensions of a
d >= C space) plus Gaussian noise whose overall level is one scalar; the
nuisance columns carry a geometric scale ramp, mimicking the heterogeneous
column scales of real bag-of-words features (without it, standardization
would be a no-op for cosine similarity and untestable). Everything is
deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, SplitSpec, build_graph


@dataclass(frozen=True)
class SynthConfig:
    n: int
    num_classes: int
    d: int
    p_in: float
    p_out: float
    feature_noise: float
    seed: int

    def validate(self) -> None:
        if not (self.n >= self.num_classes >= 2):
            raise ValueError("need n >= num_classes >= 2")
        if self.d < self.num_classes:
            raise ValueError("need d >= num_classes for one-hot prototypes")
        for name, p in (("p_in", self.p_in), ("p_out", self.p_out)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.feature_noise < 0.0:
            raise ValueError("feature_noise must be nonnegative")


def _draw_distinct_pairs(rng: np.random.Generator, count: int, draw_batch) -> list[tuple[int, int]]:
    # Sequential rejection sampling: uniform over distinct pairs, stops at count.
    seen: set[tuple[int, int]] = set()
    out: list[tuple[int, int]] = []
    while len(out) < count:
        for pair in draw_batch(2 * (count - len(out)) + 16):
            if pair not in seen:
                seen.add(pair)
                out.append(pair)
                if len(out) == count:
                    break
    return out


def _sample_block_edges(
    rng: np.random.Generator, a_start: int, a_size: int, b_start: int, b_size: int, p: float
) -> list[tuple[int, int]]:
    """Edges between contiguous node blocks a and b (a == b for intra-class)."""
    intra = a_start == b_start
    total = a_size * (a_size - 1) // 2 if intra else a_size * b_size
    if total == 0 or p <= 0.0:
        return []
    count = int(rng.binomial(total, p))
    if count == 0:
        return []
    if 2 * count >= total:
        # dense regime: enumerate and subsample without replacement
        if intra:
            i, j = np.triu_indices(a_size, k=1)
        else:
            i, j = np.divmod(np.arange(total), b_size)
        chosen = rng.choice(total, size=count, replace=False)
        return [(a_start + int(i[t]), b_start + int(j[t])) for t in chosen]

    def draw_batch(m: int) -> list[tuple[int, int]]:
        i = rng.integers(0, a_size, size=m)
        j = rng.integers(0, b_size, size=m)
        if intra:
            keep = i != j
            i, j = i[keep], j[keep]
            lo, hi = np.minimum(i, j), np.maximum(i, j)
        else:
            lo, hi = i, j
        return list(zip((a_start + lo).tolist(), (b_start + hi).tolist()))

    return _draw_distinct_pairs(rng, count, draw_batch)


def stratified_split(
    labels: np.ndarray,
    rng: np.random.Generator,
    train_frac: float = 0.48,
    val_frac: float = 0.32,
) -> SplitSpec:
    """Random per-class split of all labeled nodes into train/val/test."""
    train, val, test = [], [], []
    for c in np.unique(labels[labels >= 0]):
        members = np.flatnonzero(labels == c)
        members = members[rng.permutation(members.size)]
        s = members.size
        n_train = max(1, round(train_frac * s))
        n_val = min(s - n_train, round(val_frac * s))
        train.extend(members[:n_train].tolist())
        val.extend(members[n_train : n_train + n_val].tolist())
        test.extend(members[n_train + n_val :].tolist())
    spec = SplitSpec(
        train=np.asarray(sorted(train), dtype=np.int64),
        val=np.asarray(sorted(val), dtype=np.int64),
        test=np.asarray(sorted(test), dtype=np.int64),
    )
    spec.validate(len(labels))
    return spec


def generate_synthetic(cfg: SynthConfig) -> tuple[Graph, SplitSpec]:
    """Sample a stochastic-block graph plus a stratified 48/32/20 split."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    C = cfg.num_classes
    sizes = [cfg.n // C + (1 if c < cfg.n % C else 0) for c in range(C)]
    starts = np.concatenate([[0], np.cumsum(sizes)])[:-1]
    labels = np.repeat(np.arange(C, dtype=np.int64), sizes)

    edges: list[tuple[int, int]] = []
    for a in range(C):
        for b in range(a, C):
            p = cfg.p_in if a == b else cfg.p_out
            edges.extend(
                _sample_block_edges(rng, int(starts[a]), sizes[a], int(starts[b]), sizes[b], p)
            )

    # per-column noise scale: 1.0 on the signal dimensions, geometric ramp up
    # to 10x on the nuisance dimensions
    scales = np.ones(cfg.d)
    if cfg.d > C:
        scales[C:] = np.geomspace(1.0, 10.0, cfg.d - C)
    features = cfg.feature_noise * scales * rng.standard_normal((cfg.n, cfg.d))
    features[np.arange(cfg.n), labels] += 1.0

    graph = build_graph(edges, features, labels, num_classes=C)
    split = stratified_split(labels, rng)
    return graph, split
