"""Dataset and split file I/O.

Dataset directory layout (UTF-8 text, LF line endings):

* ``edges.txt``    one edge per line, two whitespace-separated node ids;
                   may be directed or duplicated — loading normalizes.
* ``features.csv`` header ``node_id,f0,...,f{d-1}``, one row per node.
* ``labels.csv``   header ``node_id,label``; ids absent from the file are
                   unlabeled.
* ``splits.json``  array of objects with integer-array fields ``train``,
                   ``val``, ``test``.

Labels may be any nonnegative integers; they are remapped to a dense
``[0, C)`` range in sorted order, with C the number of distinct labels
present.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DataFormatError
from .graph import UNLABELED, Graph, SplitSpec, build_graph, edge_endpoints


def _read_edges(path: Path, n: int) -> list[tuple[int, int]]:
    edges = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataFormatError(f"{path}:{lineno}: expected two node ids, got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: non-integer node id in {line!r}") from None
            if not (0 <= u < n and 0 <= v < n):
                raise DataFormatError(f"{path}:{lineno}: node id out of range [0, {n})")
            edges.append((u, v))
    return edges


def _read_features(path: Path) -> np.ndarray:
    try:
        frame = pd.read_csv(path)
    except Exception as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if frame.shape[1] < 2 or frame.columns[0] != "node_id":
        raise DataFormatError(f"{path}:1: header must be node_id,f0,...")
    try:
        ids = frame["node_id"].to_numpy(dtype=np.int64)
        values = frame.iloc[:, 1:].to_numpy(dtype=np.float64)
    except (ValueError, TypeError) as exc:
        raise DataFormatError(f"{path}: non-numeric entry ({exc})") from exc
    if not np.isfinite(values).all():
        row = int(np.argwhere(~np.isfinite(values).all(axis=1))[0][0])
        raise DataFormatError(f"{path}:{row + 2}: non-finite feature value")
    n = len(ids)
    if sorted(ids.tolist()) != list(range(n)):
        raise DataFormatError(f"{path}: node ids must be a permutation of 0..{n - 1}")
    features = np.empty_like(values)
    features[ids] = values
    return features


def _read_labels(path: Path, n: int) -> np.ndarray:
    try:
        frame = pd.read_csv(path)
    except Exception as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if list(frame.columns[:2]) != ["node_id", "label"]:
        raise DataFormatError(f"{path}:1: header must be node_id,label")
    labels = np.full(n, UNLABELED, dtype=np.int64)
    for row, (node_id, label) in enumerate(zip(frame["node_id"], frame["label"]), start=2):
        try:
            node_id, label = int(node_id), int(label)
        except (ValueError, TypeError):
            raise DataFormatError(f"{path}:{row}: non-integer entry") from None
        if not 0 <= node_id < n:
            raise DataFormatError(f"{path}:{row}: node id {node_id} out of range [0, {n})")
        if label < 0:
            raise DataFormatError(f"{path}:{row}: negative label {label}")
        labels[node_id] = label
    return labels


def load_dataset(directory: str | Path) -> Graph:
    """Load and validate a dataset directory into a Graph."""
    directory = Path(directory)
    for name in ("edges.txt", "features.csv", "labels.csv"):
        if not (directory / name).exists():
            raise DataFormatError(f"missing dataset file: {directory / name}")
    features = _read_features(directory / "features.csv")
    n = features.shape[0]
    labels = _read_labels(directory / "labels.csv", n)
    edges = _read_edges(directory / "edges.txt", n)

    present = np.unique(labels[labels != UNLABELED])
    if present.size == 0:
        raise DataFormatError(f"{directory / 'labels.csv'}: no labeled nodes")
    remap = {int(lab): i for i, lab in enumerate(present.tolist())}
    dense = labels.copy()
    for i in range(n):
        if labels[i] != UNLABELED:
            dense[i] = remap[int(labels[i])]
    return build_graph(edges, features, dense, num_classes=len(remap))


def load_splits(path: str | Path, n: int) -> list[SplitSpec]:
    """Load and validate all splits from a splits.json file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if not isinstance(raw, list) or not raw:
        raise DataFormatError(f"{path}: expected a nonempty array of split objects")
    splits = []
    for i, obj in enumerate(raw):
        if not isinstance(obj, dict) or not {"train", "val", "test"} <= set(obj):
            raise DataFormatError(f"{path}: split {i} missing train/val/test fields")
        try:
            spec = SplitSpec(
                train=np.asarray(sorted(obj["train"]), dtype=np.int64),
                val=np.asarray(sorted(obj["val"]), dtype=np.int64),
                test=np.asarray(sorted(obj["test"]), dtype=np.int64),
            )
        except (TypeError, ValueError) as exc:
            raise DataFormatError(f"{path}: split {i}: {exc}") from exc
        try:
            spec.validate(n)
        except ValueError as exc:
            raise DataFormatError(f"{path}: split {i}: {exc}") from exc
        splits.append(spec)
    return splits


def save_dataset(graph: Graph, directory: str | Path, splits: list[SplitSpec] | None = None) -> None:
    """Write a Graph (and optional splits) in the dataset directory format."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    src, dst = edge_endpoints(graph)
    with (directory / "edges.txt").open("w", encoding="utf-8", newline="\n") as fh:
        for u, v in zip(src.tolist(), dst.tolist()):
            fh.write(f"{u} {v}\n")
    d = graph.features.shape[1]
    header = "node_id," + ",".join(f"f{j}" for j in range(d))
    with (directory / "features.csv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for i in range(graph.n):
            row = ",".join(repr(float(x)) for x in graph.features[i])
            fh.write(f"{i},{row}\n")
    with (directory / "labels.csv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("node_id,label\n")
        for i in range(graph.n):
            if graph.labels[i] != UNLABELED:
                fh.write(f"{i},{int(graph.labels[i])}\n")
    if splits is not None:
        save_splits(splits, directory / "splits.json")


def save_splits(splits: list[SplitSpec], path: str | Path) -> None:
    payload = [
        {"train": s.train.tolist(), "val": s.val.tolist(), "test": s.test.tolist()}
        for s in splits
    ]
    Path(path).write_text(json.dumps(payload), encoding="utf-8")
