"""Random problem instances shared by several test modules."""
import numpy as np

from okgd import estimator
from okgd.dictionary import NodeDictionary
from okgd.graph import Graph
from okgd.kernels import KernelSpec


def random_graph(rng, n, p=0.6, weighted=True):
    upper = np.triu(rng.random((n, n)) < p, 1)
    w = upper * (rng.uniform(0.5, 2.0, (n, n)) if weighted else 1.0)
    return Graph(w + w.T)


def random_stats(rng, graph, sizes, n_pre=7, n_post=5):
    """Statistics of random feature windows with entries in (0, 1]."""
    width = max(sizes)
    f_pre = np.zeros((graph.n_nodes, n_pre, width))
    f_post = np.zeros((graph.n_nodes, n_post, width))
    for v, lv in enumerate(sizes):
        f_pre[v, :, :lv] = rng.uniform(0.01, 1.0, (n_pre, lv))
        f_post[v, :, :lv] = rng.uniform(0.01, 1.0, (n_post, lv))
    return estimator.stats_from_features(f_pre, f_post, np.array(sizes), graph), f_pre, f_post


def random_theta(rng, sizes):
    theta = np.zeros((len(sizes), max(sizes)))
    for v, lv in enumerate(sizes):
        theta[v, :lv] = rng.standard_normal(lv)
    return theta


def random_dicts(rng, dims, n_atoms=3, bandwidth=1.0):
    dicts = []
    for d in dims:
        nd = NodeDictionary(KernelSpec("gaussian", bandwidth, d), rng.standard_normal(d), 0.99)
        while len(nd) < n_atoms:
            nd.maybe_add(3 * rng.standard_normal(d))
        dicts.append(nd)
    return dicts


def random_frames(rng, dims, n):
    return [[rng.standard_normal(d) for d in dims] for _ in range(n)]


def naive_quadratic(dicts, window_pre, window_post, graph, lam, gamma):
    """Dense A and b built literally from per-sample K_G matrices."""
    sizes = [len(d) for d in dicts]
    off = np.concatenate([[0], np.cumsum(sizes)])
    n = graph.n_nodes
    L = np.diag(graph.weights.sum(axis=1)) - graph.weights

    def K_G(frame):
        K = np.zeros((off[-1], n))
        for v, d in enumerate(dicts):
            K[off[v]:off[v + 1], v] = [np.exp(-np.sum((frame[v] - a) ** 2) / (2 * d.kernel.bandwidth ** 2))
                                       for a in d.atoms]
        return K

    A = gamma * np.eye(off[-1])
    for frame in window_pre:
        K = K_G(frame)
        A += (K @ K.T + lam * K @ L @ K.T) / len(window_pre)
    h_pre = sum(K_G(f).sum(axis=1) for f in window_pre) / len(window_pre)
    h_post = sum(K_G(f).sum(axis=1) for f in window_post) / len(window_post)
    return A, h_pre - h_post
