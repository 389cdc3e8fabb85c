"""Joint likelihood-ratio estimation: window statistics, the quadratic cost,
block gradient updates and the detection score.

Parameters are held as a zero-padded ``(n_nodes, width)`` array together with
the per-node dictionary sizes; :func:`pack` and :func:`unpack` convert to and
from the flat length-``sum(sizes)`` vector used by the dense routines.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _hot
from .graph import Graph

DENSE_EIG_LIMIT = 64


@dataclass
class SufficientStats:
    """Window averages of dictionary features.

    ``cross_pre[e]`` is the pre-window average of ``k_v k_u^T`` for directed
    edge ``e = (v, u)`` in the graph's CSR order.
    """

    sizes: np.ndarray
    h_pre: np.ndarray
    h_post: np.ndarray
    H_pre: np.ndarray
    cross_pre: np.ndarray
    n_pre: int
    n_post: int

    @property
    def n_nodes(self) -> int:
        return len(self.sizes)

    @property
    def width(self) -> int:
        return self.h_pre.shape[1]

    def h_pre_block(self, v):
        return self.h_pre[v, : self.sizes[v]]

    def h_post_block(self, v):
        return self.h_post[v, : self.sizes[v]]

    def H_pre_block(self, v):
        lv = self.sizes[v]
        return self.H_pre[v, :lv, :lv]

    def cross_block(self, graph: Graph, v, u):
        """Pre-window average of ``k_v k_u^T``; zero matrix if ``(v, u)`` is no edge."""
        lo, hi = graph.indptr[v], graph.indptr[v + 1]
        hit = np.nonzero(graph.indices[lo:hi] == u)[0]
        if hit.size == 0:
            return np.zeros((self.sizes[v], self.sizes[u]))
        return self.cross_pre[lo + hit[0], : self.sizes[v], : self.sizes[u]]


def pad_features(blocks, width: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Stack per-node ``(n, L_v)`` feature matrices into ``(N, n, width)``."""
    sizes = np.array([b.shape[1] for b in blocks], dtype=np.int64)
    n = blocks[0].shape[0]
    if any(b.shape[0] != n for b in blocks):
        raise ValueError("every node needs the same number of window samples")
    width = int(sizes.max()) if width is None else width
    out = np.zeros((len(blocks), n, width))
    for v, b in enumerate(blocks):
        out[v, :, : b.shape[1]] = b
    return out, sizes


def stats_from_features(f_pre, f_post, sizes, graph: Graph) -> SufficientStats:
    """Sufficient statistics from padded window features ``(N, n, width)``."""
    if f_pre.shape[0] != graph.n_nodes or f_post.shape[0] != graph.n_nodes:
        raise ValueError("feature arrays do not match the graph's node count")
    if f_pre.shape[1] == 0 or f_post.shape[1] == 0:
        raise ValueError("windows must be non-empty")
    h_pre, h_post, H_pre, cross = _hot.compute_stats(
        np.ascontiguousarray(f_pre, dtype=float),
        np.ascontiguousarray(f_post, dtype=float),
        graph.edge_sources(),
        graph.indices,
    )
    return SufficientStats(
        sizes=np.asarray(sizes, dtype=np.int64),
        h_pre=h_pre,
        h_post=h_post,
        H_pre=H_pre,
        cross_pre=cross,
        n_pre=f_pre.shape[1],
        n_post=f_post.shape[1],
    )


def window_features(dicts, window) -> list[np.ndarray]:
    """Per-node feature matrices for a list of frames."""
    if len(window) == 0:
        raise ValueError("window is empty")
    blocks = []
    for v, d in enumerate(dicts):
        try:
            obs = np.stack([np.atleast_1d(np.asarray(frame[v], dtype=float)) for frame in window])
        except (IndexError, ValueError) as exc:
            raise ValueError(f"frames do not supply a valid observation for node {v}: {exc}") from None
        blocks.append(d.featurize_many(obs))
    return blocks


def compute_stats(dicts, window_pre, window_post, graph: Graph) -> SufficientStats:
    """Sufficient statistics of the reference and test windows.

    Each frame is a sequence with one observation per node.
    """
    if len(dicts) != graph.n_nodes:
        raise ValueError(f"{len(dicts)} dictionaries for a graph of {graph.n_nodes} nodes")
    for frame in list(window_pre) + list(window_post):
        if len(frame) != graph.n_nodes:
            raise ValueError(f"frame with {len(frame)} observations for {graph.n_nodes} nodes")
    width = max(len(d) for d in dicts)
    f_pre, sizes = pad_features(window_features(dicts, window_pre), width)
    f_post, _ = pad_features(window_features(dicts, window_post), width)
    return stats_from_features(f_pre, f_post, sizes, graph)


# flat <-> padded parameter layout

def offsets(sizes) -> np.ndarray:
    return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)


def pack(theta, sizes) -> np.ndarray:
    return np.concatenate([theta[v, :lv] for v, lv in enumerate(sizes)])


def unpack(flat, sizes, width: int | None = None) -> np.ndarray:
    sizes = np.asarray(sizes)
    width = int(sizes.max()) if width is None else width
    off = offsets(sizes)
    if len(flat) != off[-1]:
        raise ValueError(f"flat vector of length {len(flat)} does not match total size {off[-1]}")
    theta = np.zeros((len(sizes), width))
    for v, lv in enumerate(sizes):
        theta[v, :lv] = flat[off[v]:off[v + 1]]
    return theta


def assemble_quadratic(stats: SufficientStats, graph: Graph, lam: float, gamma: float):
    """Dense ``(A, b)`` with cost ``1/2 theta^T A theta + theta^T b``."""
    if lam < 0 or gamma <= 0:
        raise ValueError("need lam >= 0 and gamma > 0")
    sizes = stats.sizes
    off = offsets(sizes)
    total = int(off[-1])
    A = np.zeros((total, total))
    b = np.zeros(total)
    for v in range(stats.n_nodes):
        sl = slice(off[v], off[v + 1])
        A[sl, sl] = (1.0 + lam * graph.degrees[v]) * stats.H_pre_block(v) + gamma * np.eye(sizes[v])
        b[sl] = stats.h_pre_block(v) - stats.h_post_block(v)
        for e in range(graph.indptr[v], graph.indptr[v + 1]):
            u = graph.indices[e]
            A[sl, off[u]:off[u + 1]] = -lam * graph.edge_weights[e] * stats.cross_pre[e, : sizes[v], : sizes[u]]
    return A, b


def objective(A, b, theta_flat) -> float:
    return float(0.5 * theta_flat @ A @ theta_flat + theta_flat @ b)


def solve_exact(A, b) -> np.ndarray:
    """Unique minimiser ``-A^{-1} b`` of the strongly convex quadratic."""
    try:
        factor = scipy.linalg.cho_factor(A)
    except np.linalg.LinAlgError:
        raise ValueError("A is not positive definite") from None
    return -scipy.linalg.cho_solve(factor, b)


def block_gradient(theta, stats: SufficientStats, graph: Graph, lam: float, gamma: float, v: int):
    """``B_v theta_v + c_v``: gradient of the cost with respect to block ``v``."""
    lv = stats.sizes[v]
    g = (1.0 + lam * graph.degrees[v]) * stats.H_pre_block(v) @ theta[v, :lv] + gamma * theta[v, :lv]
    g = g + stats.h_pre_block(v) - stats.h_post_block(v)
    for e in range(graph.indptr[v], graph.indptr[v + 1]):
        u = graph.indices[e]
        lu = stats.sizes[u]
        g = g - lam * graph.edge_weights[e] * stats.cross_pre[e, :lv, :lu] @ theta[u, :lu]
    return g


def bsgd_step(theta, stats: SufficientStats, graph: Graph, lam: float, gamma: float, step_sizes, order=None):
    """One sweep of block updates in ``order`` (ascending node index by default).

    Blocks updated earlier in the sweep feed their new values to later ones.
    Returns a new array; ``theta`` is left untouched.
    """
    alpha = np.asarray(step_sizes, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("step sizes must be positive")
    order = np.arange(stats.n_nodes, dtype=np.int64) if order is None else np.asarray(order, dtype=np.int64)
    out = np.array(theta, dtype=float, copy=True)
    if out.shape[1] < stats.width:
        out = np.pad(out, ((0, 0), (0, stats.width - out.shape[1])))
    return _hot.sweep(out, stats.H_pre, stats.h_pre, stats.h_post, stats.cross_pre, stats.sizes,
                      graph.indptr, graph.indices, graph.edge_weights, graph.degrees,
                      lam, gamma, alpha, order)


def spectral_norm(H, tol: float = 1e-6, max_iter: int = 500, seed: int = 0) -> float:
    """Largest eigenvalue of a symmetric PSD matrix.

    Dense eigensolver up to ``DENSE_EIG_LIMIT`` rows, power iteration beyond.
    """
    H = np.asarray(H, dtype=float)
    if H.size == 0:
        return 0.0
    if H.shape[0] <= DENSE_EIG_LIMIT:
        return float(max(np.linalg.eigvalsh(H)[-1], 0.0))
    x = np.random.default_rng(seed).standard_normal(H.shape[0])
    x /= np.linalg.norm(x)
    value = 0.0
    for _ in range(max_iter):
        y = H @ x
        new = float(np.linalg.norm(y))
        if new == 0.0:
            return 0.0
        x = y / new
        if abs(new - value) <= tol * new:
            return new
        value = new
    return value


def block_spectral_norms(stats: SufficientStats) -> np.ndarray:
    """``||H_v||_2`` for every node; zero padding leaves the top eigenvalue unchanged."""
    if stats.width <= DENSE_EIG_LIMIT:
        return np.maximum(np.linalg.eigvalsh(stats.H_pre)[:, -1], 0.0)
    return np.array([spectral_norm(stats.H_pre_block(v)) for v in range(stats.n_nodes)])


def lipschitz_constants(h_norms, graph: Graph, lam: float, gamma: float, bounds=None) -> np.ndarray:
    """Per-block constants ``(1 + lam d_v) ||H_v|| + gamma + lam M_v sum_u W_uv M_u``."""
    m = np.ones(graph.n_nodes) if bounds is None else np.asarray(bounds, dtype=float)
    coupling = lam * m * (graph.weights @ m)
    return (1.0 + lam * graph.degrees) * np.asarray(h_norms) + gamma + coupling


def step_size(t: int, c: float, bp: int, n_post: int, lipschitz: float) -> float:
    """``min(c / (t - (bp + n_post - 1)), 1 / C)``; valid from ``t = bp + n_post``."""
    k = t - (bp + n_post - 1)
    if k < 1:
        raise ValueError(f"time {t} precedes the first scored step {bp + n_post}")
    return min(c / k, 1.0 / lipschitz)


def score(theta, stats: SufficientStats) -> np.ndarray:
    """Per-node score ``theta_v . h_pre_v``."""
    width = min(theta.shape[1], stats.width)
    return np.einsum("nl,nl->n", theta[:, :width], stats.h_pre[:, :width])


def score_from_window(theta, dicts, window_pre) -> np.ndarray:
    """Same score, averaging ``theta_v . k_v(y_vj)`` over the reference window."""
    out = np.zeros(len(dicts))
    for v, block in enumerate(window_features(dicts, window_pre)):
        out[v] = np.mean(block @ theta[v, : block.shape[1]])
    return out
