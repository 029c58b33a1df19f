"""Dataset bundles on disk and the two split protocols.

A bundle is a directory:

    meta.json       {"name", "num_nodes", "num_features", "num_classes"}
    edges.tsv       two tab-separated 0-based node ids per line, undirected
    features.tsv    node <TAB> feature_index <TAB> value
    labels.tsv      node <TAB> class, exactly one line per node
    splits.json     optional fixed splits (same schema save_split writes)

Counts in the descriptor must match the files exactly; every parse error
reports file and line. Duplicate and reversed edge lines collapse;
self-loop lines are dropped at load (models add self-loops explicitly).
"""

import json
import math
import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DataError
from .graph import Graph, build_adjacency
from .rng import STREAM_SPLIT, make_rng

META_FILE = "meta.json"
EDGE_FILE = "edges.tsv"
FEATURE_FILE = "features.tsv"
LABEL_FILE = "labels.tsv"
SPLIT_FILE = "splits.json"


@dataclass
class SplitSpec:
    """Disjoint node-index sets for one experimental protocol."""

    mode: str  # "supervised" or "semi"
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray

    def validate(self, num_nodes: int) -> None:
        seen: set[int] = set()
        for part_name, part in (("train", self.train), ("validation", self.validation), ("test", self.test)):
            part = np.asarray(part)
            if part.size and (part.min() < 0 or part.max() >= num_nodes):
                raise DataError(f"{part_name} split contains an out-of-range node index")
            ids = set(int(i) for i in part)
            if len(ids) != part.size:
                raise DataError(f"{part_name} split contains duplicate nodes")
            if ids & seen:
                raise DataError(f"{part_name} split overlaps another split")
            seen |= ids


def _parse_fields(path: str, lineno: int, line: str, count: int, caster, what: str):
    fields = line.rstrip("\n").split("\t")
    if len(fields) != count:
        raise DataError(f"{path}:{lineno}: expected {count} tab-separated {what} fields, got {len(fields)}")
    try:
        return [c(f) for c, f in zip(caster, fields)]
    except ValueError as exc:
        raise DataError(f"{path}:{lineno}: {exc}") from exc


def load_dataset(path: str) -> Graph:
    """Read a bundle directory into a Graph, validating it against meta.json."""
    meta_path = os.path.join(path, META_FILE)
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
    except FileNotFoundError as exc:
        raise DataError(f"{meta_path}: missing dataset descriptor") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{meta_path}: {exc}") from exc
    for key in ("name", "num_nodes", "num_features", "num_classes"):
        if key not in meta:
            raise DataError(f"{meta_path}: descriptor lacks '{key}'")
    n = int(meta["num_nodes"])
    d = int(meta["num_features"])
    c = int(meta["num_classes"])

    edge_path = os.path.join(path, EDGE_FILE)
    edges = []
    with open(edge_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            u, v = _parse_fields(edge_path, lineno, line, 2, (int, int), "edge")
            if not (0 <= u < n and 0 <= v < n):
                raise DataError(f"{edge_path}:{lineno}: node id out of range for {n} nodes")
            if u == v:
                continue  # self-loops are a modeling step, not data
            edges.append((u, v))
    adjacency = build_adjacency(np.array(edges, dtype=np.int64).reshape(-1, 2), n)

    feat_path = os.path.join(path, FEATURE_FILE)
    rows, cols, vals = [], [], []
    with open(feat_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            node, idx, value = _parse_fields(feat_path, lineno, line, 3, (int, int, float), "feature")
            if not 0 <= node < n:
                raise DataError(f"{feat_path}:{lineno}: node id out of range for {n} nodes")
            if not 0 <= idx < d:
                raise DataError(f"{feat_path}:{lineno}: feature index out of range for {d} features")
            rows.append(node)
            cols.append(idx)
            vals.append(value)
    features = sp.coo_matrix((vals, (rows, cols)), shape=(n, d), dtype=np.float64).tocsr()
    features.sum_duplicates()

    label_path = os.path.join(path, LABEL_FILE)
    labels = np.full(n, -1, dtype=np.int64)
    count = 0
    with open(label_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            node, label = _parse_fields(label_path, lineno, line, 2, (int, int), "label")
            if not 0 <= node < n:
                raise DataError(f"{label_path}:{lineno}: node id out of range for {n} nodes")
            if not 0 <= label < c:
                raise DataError(f"{label_path}:{lineno}: class out of range for {c} classes")
            if labels[node] != -1:
                raise DataError(f"{label_path}:{lineno}: node {node} labeled twice")
            labels[node] = label
            count += 1
    if count != n:
        raise DataError(f"{label_path}: {count} labeled nodes but descriptor says {n}")

    return Graph(adjacency=adjacency, features=features, labels=labels, num_classes=c, name=str(meta["name"]))


def write_dataset(graph: Graph, path: str, name: str | None = None) -> None:
    """Write a Graph as a bundle directory (inverse of load_dataset)."""
    os.makedirs(path, exist_ok=True)
    meta = {
        "name": name if name is not None else graph.name,
        "num_nodes": graph.num_nodes,
        "num_features": graph.num_features,
        "num_classes": graph.num_classes,
    }
    with open(os.path.join(path, META_FILE), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    upper = sp.triu(graph.adjacency, k=1).tocoo()
    with open(os.path.join(path, EDGE_FILE), "w") as fh:
        for u, v in zip(upper.row, upper.col):
            fh.write(f"{u}\t{v}\n")
    feats = sp.coo_matrix(graph.features)
    with open(os.path.join(path, FEATURE_FILE), "w") as fh:
        for node, idx, val in zip(feats.row, feats.col, feats.data):
            fh.write(f"{node}\t{idx}\t{float(val)!r}\n")
    with open(os.path.join(path, LABEL_FILE), "w") as fh:
        for node, label in enumerate(graph.labels):
            fh.write(f"{node}\t{int(label)}\n")


def dataset_info(graph: Graph) -> dict:
    """Table-style dataset statistics."""
    n = graph.num_nodes
    m = graph.num_edges
    return {
        "name": graph.name,
        "nodes": n,
        "edges": m,
        "average_degree": (2.0 * m / n) if n else 0.0,
        "attributes": graph.num_features,
        "classes": graph.num_classes,
    }


# ---------------------------------------------------------------------------
# Split protocols
# ---------------------------------------------------------------------------


def supervised_split(graph: Graph, seed: int) -> SplitSpec:
    """Random half split: ceil(n/2) training nodes, the rest test."""
    rng = make_rng(seed, STREAM_SPLIT)
    perm = rng.permutation(graph.num_nodes)
    k = math.ceil(graph.num_nodes / 2)
    split = SplitSpec(
        mode="supervised",
        train=np.sort(perm[:k]),
        validation=np.array([], dtype=np.int64),
        test=np.sort(perm[k:]),
    )
    split.validate(graph.num_nodes)
    return split


def semi_supervised_split(
    graph: Graph,
    seed: int,
    per_class: int = 20,
    small_class_per: int = 5,
    val_size: int = 500,
    test_size: int = 1000,
) -> SplitSpec:
    """Few-label protocol: per_class labeled nodes per class (small_class_per
    for classes below per_class members), then val_size validation and
    test_size test nodes sampled uniformly from the remainder."""
    rng = make_rng(seed, STREAM_SPLIT)
    labels = graph.labels
    train_parts = []
    for k in range(graph.num_classes):
        members = np.flatnonzero(labels == k)
        if members.size < small_class_per:
            raise DataError(
                f"class {k} has {members.size} members, fewer than the minimum {small_class_per}"
            )
        take = per_class if members.size >= per_class else small_class_per
        train_parts.append(rng.choice(members, size=take, replace=False))
    train = np.sort(np.concatenate(train_parts))

    rest = np.setdiff1d(np.arange(graph.num_nodes), train)
    if rest.size < val_size + test_size:
        raise DataError(
            f"{rest.size} unlabeled nodes remain but the protocol needs {val_size + test_size}"
        )
    rest = rng.permutation(rest)
    split = SplitSpec(
        mode="semi",
        train=train,
        validation=np.sort(rest[:val_size]),
        test=np.sort(rest[val_size : val_size + test_size]),
    )
    split.validate(graph.num_nodes)
    return split


def make_split(graph: Graph, mode: str, seed: int) -> SplitSpec:
    if mode == "supervised":
        return supervised_split(graph, seed)
    if mode == "semi":
        return semi_supervised_split(graph, seed)
    raise DataError(f"unknown split mode '{mode}'")


def save_split(split: SplitSpec, path: str) -> None:
    payload = {
        "mode": split.mode,
        "train": [int(i) for i in split.train],
        "validation": [int(i) for i in split.validation],
        "test": [int(i) for i in split.test],
    }
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")
    os.replace(tmp, path)


def load_split(path: str, num_nodes: int) -> SplitSpec:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except FileNotFoundError as exc:
        raise DataError(f"{path}: missing split file") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: {exc}") from exc
    try:
        split = SplitSpec(
            mode=str(payload["mode"]),
            train=np.asarray(payload["train"], dtype=np.int64),
            validation=np.asarray(payload["validation"], dtype=np.int64),
            test=np.asarray(payload["test"], dtype=np.int64),
        )
    except KeyError as exc:
        raise DataError(f"{path}: split file lacks {exc}") from exc
    split.validate(num_nodes)
    return split
