"""Weighted undirected graphs, the combinatorial Laplacian and graph builders."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Graph:
    """Symmetric, nonnegative, loop-free weighted graph.

    ``weights`` is stored dense. A CSR-like neighbour view (``indptr``,
    ``indices``, ``edge_weights``) is derived once for per-node iteration;
    directed edge ``e`` runs from row ``v`` to ``indices[e]`` for
    ``indptr[v] <= e < indptr[v + 1]``.
    """

    weights: np.ndarray
    degrees: np.ndarray = field(init=False)
    indptr: np.ndarray = field(init=False)
    indices: np.ndarray = field(init=False)
    edge_weights: np.ndarray = field(init=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] == 0:
            raise ValueError(f"weights must be a non-empty square matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise ValueError("graph must not have self-loops")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        w.setflags(write=False)
        rows, cols = np.nonzero(w)
        indptr = np.zeros(w.shape[0] + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        for name, value in (
            ("weights", w),
            ("degrees", w.sum(axis=1)),
            ("indptr", indptr),
            ("indices", cols.astype(np.int64)),
            ("edge_weights", w[rows, cols]),
        ):
            if value is not w:
                value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_edges(self) -> int:
        """Number of undirected edges."""
        return len(self.indices) // 2

    @property
    def mean_degree(self) -> float:
        return float(self.degrees.mean())

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edge_sources(self) -> np.ndarray:
        """Row index of every directed edge, aligned with ``indices``."""
        return np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))

    def edge_list(self) -> list[tuple[int, int, float]]:
        """Undirected edges as ``(u, v, w)`` with ``u < v``."""
        rows, cols = np.nonzero(np.triu(self.weights))
        return [(int(u), int(v), float(self.weights[u, v])) for u, v in zip(rows, cols)]

    @classmethod
    def from_edges(cls, n_nodes: int, edges) -> "Graph":
        """Build from ``(u, v)`` or ``(u, v, w)`` tuples; duplicates accumulate."""
        w = np.zeros((n_nodes, n_nodes))
        for edge in edges:
            u, v = int(edge[0]), int(edge[1])
            weight = float(edge[2]) if len(edge) > 2 else 1.0
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < n_nodes and 0 <= v < n_nodes):
                raise ValueError(f"edge ({u}, {v}) out of range for {n_nodes} nodes")
            w[u, v] += weight
            w[v, u] += weight
        return cls(w)

    @classmethod
    def empty(cls, n_nodes: int) -> "Graph":
        return cls(np.zeros((n_nodes, n_nodes)))


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian ``diag(d) - W``."""
    return np.diag(g.degrees) - g.weights


def smoothness(g: Graph, x) -> float:
    """Laplacian quadratic form ``x^T L x``."""
    x = _check_signal(g, x)
    return float(x @ laplacian(g) @ x)


def smoothness_pairwise(g: Graph, x) -> float:
    """Same quantity as :func:`smoothness`, as ``1/2 sum_uv W_uv (x_u - x_v)^2``."""
    x = _check_signal(g, x)
    diff = x[:, None] - x[None, :]
    return float(0.5 * np.sum(g.weights * diff**2))


def _check_signal(g: Graph, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n_nodes,):
        raise ValueError(f"signal has shape {x.shape}, expected ({g.n_nodes},)")
    return x


def sample_sbm(n_clusters: int, cluster_size: int, p_intra: float, p_inter: float, seed=None):
    """Unit-weight stochastic block model with equal cluster sizes.

    Returns ``(graph, labels)`` where ``labels[v]`` is the cluster of node ``v``.
    Nodes are numbered cluster by cluster.
    """
    for p in (p_intra, p_inter):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"edge probability {p} outside [0, 1]")
    if n_clusters < 1 or cluster_size < 1:
        raise ValueError("n_clusters and cluster_size must be positive")
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(n_clusters), cluster_size)
    n = labels.size
    probs = np.where(labels[:, None] == labels[None, :], p_intra, p_inter)
    draws = rng.random((n, n))
    upper = np.triu(draws < probs, k=1)
    w = (upper | upper.T).astype(float)
    return Graph(w), labels


def knn_graph(points, k: int) -> Graph:
    """Symmetrised (union) k-nearest-neighbour graph with unit weights.

    Distances are Euclidean; ties are broken towards the lower node index.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n_points ({n}), got {k}")
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1))
    w = np.zeros((n, n))
    for u in range(n):
        others = np.delete(np.arange(n), u)
        order = np.argsort(dist[u, others], kind="stable")
        nearest = others[order[:k]]
        w[u, nearest] = 1.0
    w = np.maximum(w, w.T)
    return Graph(w)


def write_edge_list(g: Graph, path) -> None:
    lines = [f"# n_nodes {g.n_nodes}"]
    lines += [f"{u} {v} {w!r}" for u, v, w in g.edge_list()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path, n_nodes: int | None = None) -> Graph:
    """Parse ``u v w`` lines (0-based, ``#`` comments ignored).

    The node count comes from ``n_nodes``, else from a ``# n_nodes N`` header,
    else from the largest index seen.
    """
    edges = []
    header_n = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "n_nodes":
                header_n = int(parts[1])
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"{path}:{lineno}: expected 'u v [w]', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        edges.append((u, v, w))
    if n_nodes is not None and header_n is not None and n_nodes != header_n:
        raise ValueError(f"{path}: header declares {header_n} nodes, expected {n_nodes}")
    if n_nodes is None:
        n_nodes = header_n
    if n_nodes is None:
        n_nodes = 1 + max((max(u, v) for u, v, _ in edges), default=-1)
    if n_nodes == 0:
        raise ValueError(f"{path}: no nodes")
    # stored once per unordered pair; mirror on construction
    w = np.zeros((n_nodes, n_nodes))
    for u, v, weight in edges:
        if not (0 <= u < n_nodes and 0 <= v < n_nodes):
            raise ValueError(f"{path}: edge ({u}, {v}) out of range for {n_nodes} nodes")
        if u == v:
            raise ValueError(f"{path}: self-loop on node {u}")
        w[u, v] = weight
        w[v, u] = weight
    return Graph(w)
