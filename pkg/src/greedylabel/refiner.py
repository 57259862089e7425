"""Shallow graph-convolutional refiner with hand-derived gradients.

Two symmetric-normalized graph convolutions feed a small MLP head. Training
minimizes softmax cross-entropy restricted to the training rows (plus an L2
penalty on the weight matrices) with Adam updates, all in plain numpy so the
gradients stay checkable against finite differences. Combinatorial
predictions enter only as an additive logit bias on target rows; since the
loss never touches target rows, injection has no effect on optimization and
acts purely as an evaluation-time prior.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .graph import Graph
from .stats import TrainStats

WEIGHT_FIELDS = ("w1", "w2", "w3", "w4")
PARAM_FIELDS = ("w1", "b1", "w2", "b2", "w3", "b3", "w4", "b4")


@dataclass(frozen=True)
class RefinerParams:
    w1: np.ndarray  # (d, h1) first graph convolution
    b1: np.ndarray
    w2: np.ndarray  # (h1, h2) second graph convolution
    b2: np.ndarray
    w3: np.ndarray  # (h2, h3) MLP hidden layer
    b3: np.ndarray
    w4: np.ndarray  # (h3, C) MLP output layer
    b4: np.ndarray
    learning_rate: float = 0.01
    epochs: int = 200
    weight_decay: float = 5e-4
    seed: int = 0


@dataclass(frozen=True)
class InjectionConfig:
    lambda_max: float = 2.0
    gamma_lambda: float = 50.0


@dataclass(frozen=True)
class GateDecision:
    chosen: str  # "combinatorial" or "hybrid"
    val_acc_comb: float
    val_acc_hybrid: float
    margin: float


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_refiner_params(
    d: int,
    num_classes: int,
    h1: int = 64,
    h2: int = 64,
    h3: int = 32,
    learning_rate: float = 0.01,
    epochs: int = 200,
    weight_decay: float = 5e-4,
    seed: int = 0,
) -> RefinerParams:
    """Seeded uniform Glorot weights, zero biases."""
    rng = np.random.default_rng(seed)
    return RefinerParams(
        w1=_glorot(rng, d, h1),
        b1=np.zeros(h1),
        w2=_glorot(rng, h1, h2),
        b2=np.zeros(h2),
        w3=_glorot(rng, h2, h3),
        b3=np.zeros(h3),
        w4=_glorot(rng, h3, num_classes),
        b4=np.zeros(num_classes),
        learning_rate=learning_rate,
        epochs=epochs,
        weight_decay=weight_decay,
        seed=seed,
    )


def normalized_adjacency(graph: Graph) -> sp.csr_matrix:
    """Symmetric normalization of the adjacency with self-loops added."""
    src = np.repeat(np.arange(graph.n, dtype=np.int64), graph.degrees)
    adj = sp.coo_matrix(
        (np.ones(graph.indices.size), (src, graph.indices)), shape=(graph.n, graph.n)
    )
    adj = (adj + sp.eye(graph.n, format="coo")).tocsr()
    inv_sqrt = 1.0 / np.sqrt(np.asarray(adj.sum(axis=1)).ravel())
    scale = sp.diags(inv_sqrt)
    return (scale @ adj @ scale).tocsr()


def _forward_cache(params: RefinerParams, a_hat: sp.csr_matrix, features: np.ndarray) -> dict:
    p1 = a_hat @ features
    s1 = p1 @ params.w1 + params.b1
    h1 = np.maximum(s1, 0.0)
    p2 = a_hat @ h1
    s2 = p2 @ params.w2 + params.b2
    s3 = s2 @ params.w3 + params.b3
    h3 = np.maximum(s3, 0.0)
    logits = h3 @ params.w4 + params.b4
    return {"p1": p1, "s1": s1, "p2": p2, "s2": s2, "s3": s3, "h3": h3, "logits": logits}


def forward(params: RefinerParams, graph: Graph, features: np.ndarray) -> np.ndarray:
    """Full-graph forward pass returning (n, C) logits."""
    if features.shape[1] != params.w1.shape[0]:
        raise ValueError(
            f"feature dimension {features.shape[1]} does not match w1 {params.w1.shape}"
        )
    return _forward_cache(params, normalized_adjacency(graph), features)["logits"]


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(
    params: RefinerParams,
    a_hat: sp.csr_matrix,
    features: np.ndarray,
    train: np.ndarray,
    labels: np.ndarray,
) -> tuple[float, dict[str, np.ndarray]]:
    """Training objective and its analytic gradients.

    Objective: mean softmax cross-entropy over the train rows plus
    0.5 * weight_decay * ||W||^2 over the four weight matrices. Only
    labels[train] is ever read.
    """
    train = np.asarray(train, dtype=np.int64)
    cache = _forward_cache(params, a_hat, features)
    y = labels[train]
    probs = _softmax(cache["logits"][train])
    nll = float(-np.log(probs[np.arange(train.size), y] + 1e-300).mean())
    l2 = 0.5 * params.weight_decay * sum(
        float((getattr(params, f) ** 2).sum()) for f in WEIGHT_FIELDS
    )
    loss = nll + l2

    d_logits = np.zeros_like(cache["logits"])
    delta = probs.copy()
    delta[np.arange(train.size), y] -= 1.0
    d_logits[train] = delta / train.size

    grads: dict[str, np.ndarray] = {}
    grads["w4"] = cache["h3"].T @ d_logits
    grads["b4"] = d_logits.sum(axis=0)
    d_h3 = d_logits @ params.w4.T
    d_s3 = d_h3 * (cache["s3"] > 0.0)
    grads["w3"] = cache["s2"].T @ d_s3
    grads["b3"] = d_s3.sum(axis=0)
    d_s2 = d_s3 @ params.w3.T
    grads["w2"] = cache["p2"].T @ d_s2
    grads["b2"] = d_s2.sum(axis=0)
    d_p2 = d_s2 @ params.w2.T
    d_h1 = a_hat.T @ d_p2
    d_s1 = d_h1 * (cache["s1"] > 0.0)
    grads["w1"] = cache["p1"].T @ d_s1
    grads["b1"] = d_s1.sum(axis=0)
    for f in WEIGHT_FIELDS:
        grads[f] = grads[f] + params.weight_decay * getattr(params, f)
    return loss, grads


def train_refiner(
    graph: Graph,
    features: np.ndarray,
    train: np.ndarray,
    labels: np.ndarray,
    params: RefinerParams,
) -> RefinerParams:
    """Full-batch Adam on the train-restricted objective; deterministic."""
    train = np.asarray(train, dtype=np.int64)
    if np.any(labels[train] < 0):
        raise ValueError("every training node must be labeled")
    a_hat = normalized_adjacency(graph)
    values = {f: getattr(params, f).copy() for f in PARAM_FIELDS}
    moment1 = {f: np.zeros_like(v) for f, v in values.items()}
    moment2 = {f: np.zeros_like(v) for f, v in values.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    current = params
    for step in range(1, params.epochs + 1):
        loss, grads = loss_and_grads(current, a_hat, features, train, labels)
        if not np.isfinite(loss):
            raise RuntimeError(f"non-finite training loss at epoch {step}")
        if params.learning_rate != 0.0:
            for f in PARAM_FIELDS:
                g = grads[f]
                moment1[f] = beta1 * moment1[f] + (1.0 - beta1) * g
                moment2[f] = beta2 * moment2[f] + (1.0 - beta2) * g * g
                m_hat = moment1[f] / (1.0 - beta1**step)
                v_hat = moment2[f] / (1.0 - beta2**step)
                values[f] = values[f] - params.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
            current = replace(current, **values)
    return current


def compute_lambda(stats: TrainStats, cfg: InjectionConfig) -> float:
    """Injection strength from training-derived evidence only.

    The first factor saturates with the train-train edge count; the second
    measures how far the shrunk homophily sits from the random baseline,
    normalized so a pure regime maps to 1. No evidence means no injection.
    """
    m = stats.train_edges
    if m == 0:
        return 0.0
    baseline = 1.0 / stats.num_classes
    evidence = m / (m + cfg.gamma_lambda)
    strength = abs(stats.h - baseline) / (1.0 - baseline)
    return cfg.lambda_max * evidence * strength


def inject_and_refine(
    logits: np.ndarray, comb_predictions: dict[int, int], lam: float
) -> np.ndarray:
    """Add lam to each target node's logit at its combinatorial class.

    Rows not covered by comb_predictions are returned bit-identical.
    """
    out = logits.copy()
    for u, c in comb_predictions.items():
        out[u, c] += lam
    return out


def gate(val_acc_comb: float, val_acc_hybrid: float, margin: float) -> GateDecision:
    """Select hybrid only when it beats the combinatorial baseline by margin."""
    chosen = "hybrid" if val_acc_hybrid >= val_acc_comb + margin else "combinatorial"
    return GateDecision(
        chosen=chosen,
        val_acc_comb=val_acc_comb,
        val_acc_hybrid=val_acc_hybrid,
        margin=margin,
    )
