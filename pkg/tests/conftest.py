"""Shared fixtures: small deterministic graphs and dataset bundles."""

import numpy as np
import pytest

from cagnn.graph import Graph, build_adjacency
from cagnn.rng import make_rng


def random_graph(seed: int, n: int = 8, num_classes: int = 3, d: int = 4, p: float = 0.4) -> Graph:
    """Connected-ish random graph with dense features, for unit tests."""
    rng = make_rng(seed, 900)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    pairs += [(i, (i + 1) % n) for i in range(n - 1)]  # spanning path: no isolated nodes
    edges = np.array(sorted(set(pairs)), dtype=np.int64)
    return Graph(
        adjacency=build_adjacency(edges, n),
        features=rng.standard_normal((n, d)),
        labels=rng.integers(0, num_classes, size=n).astype(np.int64),
        num_classes=num_classes,
        name=f"random-{seed}",
    )


@pytest.fixture
def two_node_graph() -> Graph:
    """Single edge (0,1); with self-loops its normalized adjacency is all 0.5."""
    return Graph(
        adjacency=build_adjacency(np.array([[0, 1]]), 2),
        features=np.array([[2.0, 0.0], [0.0, 4.0]]),
        labels=np.array([0, 1]),
        num_classes=2,
        name="two-node",
    )


@pytest.fixture
def path_graph() -> Graph:
    """Path 0-1-2, the hand-normalization example."""
    return Graph(
        adjacency=build_adjacency(np.array([[0, 1], [1, 2]]), 3),
        features=np.eye(3),
        labels=np.array([0, 1, 0]),
        num_classes=2,
        name="path",
    )
