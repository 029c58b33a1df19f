"""Synthetic attributed graphs for experiments, demos, and benchmarks."""

import time

import numpy as np
import scipy.sparse as sp

from .graph import Graph, build_adjacency, gcn_normalize
from .layers import GcnLayer
from .rng import make_rng

STREAM_SYNTHETIC = 101


def _random_edges(n: int, num_edges: int, rng) -> np.ndarray:
    """num_edges distinct undirected pairs, every node with degree >= 1."""
    seen = set()
    edges = []
    while len(edges) < num_edges:
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        edges.append(key)
    degree = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    for node in np.flatnonzero(degree == 0):
        partner = int(rng.integers(0, n - 1))
        partner += partner >= node
        edges.append((min(node, partner), max(node, partner)))
    return np.array(edges, dtype=np.int64)


def _homophilous_edges(n: int, labels: np.ndarray, avg_degree: float, p_same: float, rng) -> np.ndarray:
    """Random pairs kept with probability p_same when labels agree, else 1 - p_same."""
    target = int(n * avg_degree / 2)
    seen = set()
    edges = []
    while len(edges) < target:
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        keep = p_same if labels[u] == labels[v] else 1.0 - p_same
        if rng.random() > keep:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        edges.append(key)
    degree = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    for node in np.flatnonzero(degree == 0):
        partner = int(rng.integers(0, n - 1))
        partner += partner >= node
        edges.append((min(node, partner), max(node, partner)))
    return np.array(edges, dtype=np.int64)


def make_classification_graph(
    n: int,
    num_classes: int,
    seed: int = 0,
    *,
    structure: str = "random",
    avg_degree: float = 4.0,
    p_same: float = 0.9,
    prototype_dims: int = 20,
    noise_pool: int = 60,
    noise_per_node: int = 5,
    name: str = "synthetic",
) -> Graph:
    """Attributed graph whose labels are decodable from the features.

    Each class owns a disjoint block of ``prototype_dims`` always-on
    feature columns; every node adds ``noise_per_node`` random columns
    from a shared noise pool. Same-class pairs therefore have cosine
    similarity well above 0.5 and cross-class pairs well below it, so a
    content graph thresholded at 0.5 recovers the classes exactly.

    ``structure`` picks the edge process: "random" ignores labels (the
    graph then carries no label information), "homophily" favors
    same-class pairs with probability ``p_same``.
    """
    rng = make_rng(seed, STREAM_SYNTHETIC)
    labels = np.arange(n, dtype=np.int64) % num_classes
    d = num_classes * prototype_dims + noise_pool
    rows, cols = [], []
    for node in range(n):
        start = labels[node] * prototype_dims
        block = np.arange(start, start + prototype_dims)
        noise = num_classes * prototype_dims + rng.choice(noise_pool, size=noise_per_node, replace=False)
        for col in np.concatenate([block, noise]):
            rows.append(node)
            cols.append(col)
    features = sp.coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(n, d), dtype=np.float64
    ).tocsr()

    if structure == "random":
        edges = _random_edges(n, int(n * avg_degree / 2), rng)
    elif structure == "homophily":
        edges = _homophilous_edges(n, labels, avg_degree, p_same, rng)
    else:
        raise ValueError(f"unknown structure '{structure}'")
    return Graph(
        adjacency=build_adjacency(edges, n),
        features=features,
        labels=labels,
        num_classes=num_classes,
        name=name,
    )


def make_structure_only_graph(n: int, num_classes: int, seed: int = 0, avg_degree: float = 6.0) -> Graph:
    """Homophilous graph with constant features: labels live in the structure only."""
    rng = make_rng(seed, STREAM_SYNTHETIC, 1)
    labels = np.arange(n, dtype=np.int64) % num_classes
    edges = _homophilous_edges(n, labels, avg_degree, 0.95, rng)
    features = sp.csr_matrix(np.ones((n, 4)))
    return Graph(
        adjacency=build_adjacency(edges, n),
        features=features,
        labels=labels,
        num_classes=num_classes,
        name="structure-only",
    )


def make_timing_graph(n: int, num_edges: int, width: int, seed: int = 0) -> Graph:
    """Dense-feature graph with an exact edge count, for timing runs."""
    rng = make_rng(seed, STREAM_SYNTHETIC, 2)
    edges = _random_edges(n, num_edges, rng)
    features = rng.standard_normal((n, width))
    labels = rng.integers(0, 2, size=n).astype(np.int64)
    return Graph(
        adjacency=build_adjacency(edges, n),
        features=features,
        labels=labels,
        num_classes=2,
        name="timing",
    )


def per_epoch_seconds(n: int, num_edges: int, width: int, seed: int = 0, repeats: int = 5) -> float:
    """Median wall time of one full-batch epoch of a two-layer width x width
    convolution stack (forward + backward), the shape whose cost carries
    both the edge-linear and the width-quadratic terms."""
    graph = make_timing_graph(n, num_edges, width, seed)
    norm = gcn_normalize(graph.adjacency)
    rng = make_rng(seed, STREAM_SYNTHETIC, 3)
    layer1 = GcnLayer(width, width, rng, activation="relu", name="t1")
    layer2 = GcnLayer(width, width, rng, activation="identity", name="t2")
    x = np.asarray(graph.features)
    dout = rng.standard_normal((n, width))

    def epoch():
        c1, c2 = {}, {}
        h = layer1.forward(norm, x, c1)
        layer2.forward(norm, h, c2)
        layer1.weight.zero_grad()
        layer2.weight.zero_grad()
        dh = layer2.backward(c2, dout)
        layer1.backward(c1, dh, need_input_grad=False)

    epoch()  # warm up
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        epoch()
        times.append(time.perf_counter() - start)
    return float(np.median(times))
