"""Graph container and structural operators.

Adjacency matrices are scipy CSR with binary float64 entries. Graphs are
undirected: construction symmetrizes the edge list, drops duplicates and
self-loops, and later stages add self-loops back explicitly where the
model calls for them.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DataError, DegenerateNodeError, check_shapes


@dataclass
class Graph:
    """An attributed graph: structure, node features, and integer labels."""

    adjacency: sp.csr_matrix
    features: object  # csr_matrix or ndarray, shape (num_nodes, d)
    labels: np.ndarray
    num_classes: int
    name: str = "graph"

    @property
    def num_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        """Undirected edge count (self-loops excluded)."""
        a = self.adjacency
        off_diag = a.nnz - np.count_nonzero(a.diagonal())
        return off_diag // 2

    @property
    def num_features(self) -> int:
        return self.features.shape[1]


def build_adjacency(edges: np.ndarray, num_nodes: int) -> sp.csr_matrix:
    """Symmetric binary adjacency from an (m, 2) edge array.

    Duplicate edges, reversed duplicates, and self-loops in the input all
    collapse or vanish; the result has a_uv = a_vu in {0, 1} and zero
    diagonal.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= num_nodes):
        raise DataError(f"edge endpoint out of range for {num_nodes} nodes")
    keep = edges[:, 0] != edges[:, 1]
    edges = edges[keep]
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    data = np.ones(rows.shape[0], dtype=np.float64)
    adj = sp.coo_matrix((data, (rows, cols)), shape=(num_nodes, num_nodes)).tocsr()
    adj.data[:] = 1.0  # collapse duplicates to binary
    return adj


def with_self_loops(adj: sp.csr_matrix) -> sp.csr_matrix:
    """A + I with entries kept binary even if loops were already present."""
    n = adj.shape[0]
    out = (adj + sp.identity(n, format="csr", dtype=np.float64)).tocsr()
    out.data[:] = np.minimum(out.data, 1.0)
    return out


def add_self_loops(graph: Graph) -> Graph:
    """The same graph with edge (v, v) present for every node; idempotent."""
    return Graph(
        adjacency=with_self_loops(graph.adjacency),
        features=graph.features,
        labels=graph.labels,
        num_classes=graph.num_classes,
        name=graph.name,
    )


def degrees(adj: sp.csr_matrix) -> np.ndarray:
    return np.asarray(adj.sum(axis=1)).reshape(-1)


def symmetric_normalize(adj: sp.csr_matrix) -> sp.csr_matrix:
    """D^{-1/2} A D^{-1/2} for the given adjacency.

    Raises DegenerateNodeError naming the first zero-degree node; callers
    that want every node reachable should add self-loops first.
    """
    deg = degrees(adj)
    zero = np.flatnonzero(deg == 0.0)
    if zero.size:
        raise DegenerateNodeError(f"node {int(zero[0])} has degree 0 and cannot be normalized")
    inv_sqrt = 1.0 / np.sqrt(deg)
    d_half = sp.diags(inv_sqrt)
    return (d_half @ adj @ d_half).tocsr()


def sym_normalize(graph: Graph, with_loops: bool) -> sp.csr_matrix:
    """Normalized adjacency of a graph, optionally self-looped first."""
    adj = with_self_loops(graph.adjacency) if with_loops else graph.adjacency
    return symmetric_normalize(adj)


def gcn_normalize(adj: sp.csr_matrix) -> sp.csr_matrix:
    """Symmetrically normalized adjacency with self-loops added first."""
    return symmetric_normalize(with_self_loops(adj))


def cosine_similarity(x: np.ndarray, y: np.ndarray) -> float:
    """Cosine of the angle between two vectors; 0 if either has zero norm."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    check_shapes(x.shape == y.shape, f"vector lengths differ: {x.shape[0]} vs {y.shape[0]}")
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return float(x @ y / (nx * ny))


def cosine_similarity_matrix(features) -> np.ndarray:
    """Dense pairwise cosine similarity; all-zero rows get similarity 0."""
    if sp.issparse(features):
        x = features.tocsr().astype(np.float64)
        norms = np.sqrt(np.asarray(x.multiply(x).sum(axis=1)).reshape(-1))
        safe = np.where(norms == 0.0, 1.0, norms)
        unit = sp.diags(1.0 / safe) @ x
        sim = np.asarray((unit @ unit.T).todense())
    else:
        x = np.asarray(features, dtype=np.float64)
        norms = np.linalg.norm(x, axis=1)
        safe = np.where(norms == 0.0, 1.0, norms)
        unit = x / safe[:, None]
        sim = unit @ unit.T
    return sim


def content_adjacency(features, eps: float) -> sp.csr_matrix:
    """Adjacency linking node pairs whose cosine similarity exceeds ``eps``.

    The comparison is strict, self-pairs are excluded, and symmetry is
    inherited from the similarity itself.
    """
    if not -1.0 <= eps <= 1.0:
        raise ValueError(f"similarity threshold must lie in [-1, 1], got {eps}")
    sim = cosine_similarity_matrix(features)
    mask = sim > eps
    np.fill_diagonal(mask, False)
    return sp.csr_matrix(mask.astype(np.float64))


def build_content_graph(source, eps: float) -> Graph:
    """Graph over feature-similar nodes: edge (u, v) iff cos(x_u, x_v) > eps.

    ``source`` is a Graph (features, labels, and class count carry through
    unchanged) or a bare feature matrix (labels default to zeros).
    """
    if isinstance(source, Graph):
        features, labels, num_classes, name = (
            source.features,
            source.labels,
            source.num_classes,
            source.name,
        )
    else:
        features = source
        labels = np.zeros(features.shape[0], dtype=np.int64)
        num_classes = 1
        name = "content"
    return Graph(
        adjacency=content_adjacency(features, eps),
        features=features,
        labels=labels,
        num_classes=num_classes,
        name=f"{name}-content",
    )


def grid_search_epsilon(features, candidates, evaluate) -> tuple[float, float]:
    """Candidate threshold maximizing ``evaluate(build_content_graph(...))``.

    Ties go to the smaller threshold (denser content graph), so candidates
    are scanned in ascending order and replaced only on strict improvement.
    """
    if len(candidates) == 0:
        raise ValueError("candidate list must be non-empty")
    best_eps = None
    best_score = None
    for eps in sorted(candidates):
        score = float(evaluate(build_content_graph(features, eps)))
        if best_score is None or score > best_score:
            best_eps, best_score = eps, score
    return best_eps, best_score


DEFAULT_EPSILON_GRID = [round(0.05 * k, 2) for k in range(20)]


def neighbor_arrays(adj: sp.csr_matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Edge arrays grouped by target node, for attention layers.

    Returns (offsets, targets, sources): edges e in [offsets[v], offsets[v+1])
    all point at target v; ``sources`` lists the corresponding neighbors.
    """
    adj = adj.tocsr()
    adj.sort_indices()
    offsets = adj.indptr.astype(np.int64)
    sources = adj.indices.astype(np.int64)
    targets = np.repeat(np.arange(adj.shape[0], dtype=np.int64), np.diff(offsets))
    return offsets, targets, sources
