"""Inner loops of the online update, in numba and numpy flavours.

All arrays use a zero-padded layout: node ``v`` owns the first ``sizes[v]``
entries along every parameter axis, the rest are zero. Zero padding is
preserved by every routine here, so the numpy versions can operate on whole
padded blocks while the loop versions stop at ``sizes[v]``.

Directed edges follow the graph's CSR view: edge ``e`` runs from
``src[e]`` to ``dst[e]``, with ``indptr`` delimiting each source's edges.
"""
import numpy as np

from . import _accel


def stats_numpy(f_pre, f_post, src, dst):
    n_pre = f_pre.shape[1]
    h_pre = f_pre.mean(axis=1)
    h_post = f_post.mean(axis=1)
    H_pre = np.einsum("njl,njm->nlm", f_pre, f_pre) / n_pre
    cross = np.einsum("ejl,ejm->elm", f_pre[src], f_pre[dst]) / n_pre
    return h_pre, h_post, H_pre, cross


@_accel.njit
def stats_loops(f_pre, f_post, src, dst):
    n_nodes, n_pre, width = f_pre.shape
    n_post = f_post.shape[1]
    h_pre = np.zeros((n_nodes, width))
    h_post = np.zeros((n_nodes, width))
    H_pre = np.zeros((n_nodes, width, width))
    cross = np.zeros((src.shape[0], width, width))
    for v in range(n_nodes):
        for j in range(n_pre):
            for a in range(width):
                fa = f_pre[v, j, a]
                if fa == 0.0:
                    continue
                h_pre[v, a] += fa
                for b in range(width):
                    H_pre[v, a, b] += fa * f_pre[v, j, b]
        for j in range(n_post):
            for a in range(width):
                h_post[v, a] += f_post[v, j, a]
    for e in range(src.shape[0]):
        v = src[e]
        u = dst[e]
        for j in range(n_pre):
            for a in range(width):
                fa = f_pre[v, j, a]
                if fa == 0.0:
                    continue
                for b in range(width):
                    cross[e, a, b] += fa * f_pre[u, j, b]
    h_pre /= n_pre
    h_post /= n_post
    H_pre /= n_pre
    cross /= n_pre
    return h_pre, h_post, H_pre, cross


def sweep_numpy(theta, H_pre, h_pre, h_post, cross, sizes, indptr, indices, edge_weights,
                degrees, lam, gamma, alpha, order):
    """One Gauss-Seidel pass of block gradient steps, updating ``theta`` in place."""
    for v in order:
        lo, hi = indptr[v], indptr[v + 1]
        grad = (1.0 + lam * degrees[v]) * (H_pre[v] @ theta[v]) + gamma * theta[v] + h_pre[v] - h_post[v]
        if hi > lo and lam != 0.0:
            coupled = np.einsum("elm,em->l", cross[lo:hi], theta[indices[lo:hi]] * edge_weights[lo:hi, None])
            grad -= lam * coupled
        theta[v] -= alpha[v] * grad
    return theta


@_accel.njit
def sweep_loops(theta, H_pre, h_pre, h_post, cross, sizes, indptr, indices, edge_weights,
                degrees, lam, gamma, alpha, order):
    width = theta.shape[1]
    grad = np.zeros(width)
    for v in order:
        lv = sizes[v]
        scale = 1.0 + lam * degrees[v]
        for a in range(lv):
            acc = 0.0
            for b in range(lv):
                acc += H_pre[v, a, b] * theta[v, b]
            grad[a] = scale * acc + gamma * theta[v, a] + h_pre[v, a] - h_post[v, a]
        if lam != 0.0:
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                lu = sizes[u]
                we = lam * edge_weights[e]
                for a in range(lv):
                    acc = 0.0
                    for b in range(lu):
                        acc += cross[e, a, b] * theta[u, b]
                    grad[a] -= we * acc
        step = alpha[v]
        for a in range(lv):
            theta[v, a] -= step * grad[a]
    return theta


def compute_stats(f_pre, f_post, src, dst):
    impl = stats_loops if _accel.USE_NUMBA else stats_numpy
    return impl(f_pre, f_post, src, dst)


def sweep(theta, H_pre, h_pre, h_post, cross, sizes, indptr, indices, edge_weights,
          degrees, lam, gamma, alpha, order):
    impl = sweep_loops if _accel.USE_NUMBA else sweep_numpy
    return impl(theta, H_pre, h_pre, h_post, cross, sizes, indptr, indices, edge_weights,
                degrees, float(lam), float(gamma), alpha, order)
