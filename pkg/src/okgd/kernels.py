"""Bounded positive-definite kernels and the median bandwidth heuristic."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from . import _accel

FAMILIES = ("gaussian", "laplacian")


@dataclass(frozen=True)
class KernelSpec:
    family: str
    bandwidth: float
    input_dim: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not (self.bandwidth > 0 and np.isfinite(self.bandwidth)):
            raise ValueError(f"bandwidth must be positive and finite, got {self.bandwidth}")
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be positive, got {self.input_dim}")


def _as_point(spec: KernelSpec, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (spec.input_dim,):
        raise ValueError(f"expected a point of dimension {spec.input_dim}, got shape {x.shape}")
    return x


def _as_batch(spec: KernelSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and spec.input_dim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ValueError(f"expected points of dimension {spec.input_dim}, got shape {x.shape}")
    return x


def evaluate(spec: KernelSpec, x, y) -> float:
    """k(x, y) for a single pair of points."""
    x = _as_point(spec, x)
    y = _as_point(spec, y)
    if spec.family == "gaussian":
        return float(np.exp(-np.sum((x - y) ** 2) / (2.0 * spec.bandwidth**2)))
    return float(np.exp(-np.sum(np.abs(x - y)) / spec.bandwidth))


def kernel_bound(spec: KernelSpec) -> float:
    """Uniform bound sup k(x, y); both supported families peak at 1."""
    return 1.0


def median_heuristic(samples) -> float:
    """Median Euclidean distance over all unordered pairs of ``samples``."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ValueError("median heuristic needs at least 2 samples")
    bw = float(np.median(pdist(x)))
    if bw <= 0:
        raise ValueError("median pairwise distance is zero; samples are (mostly) identical")
    return bw


def _features_numpy(x, atoms, bandwidth, laplacian):
    diff = x[:, None, :] - atoms[None, :, :]
    if laplacian:
        return np.exp(-np.abs(diff).sum(axis=-1) / bandwidth)
    return np.exp(-(diff**2).sum(axis=-1) / (2.0 * bandwidth * bandwidth))


@_accel.njit
def _features_loops(x, atoms, bandwidth, laplacian):
    n, d = x.shape
    m = atoms.shape[0]
    out = np.empty((n, m))
    scale = bandwidth if laplacian else 2.0 * bandwidth * bandwidth
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(d):
                delta = x[i, k] - atoms[j, k]
                acc += abs(delta) if laplacian else delta * delta
            out[i, j] = np.exp(-acc / scale)
    return out


def cross_kernel(spec: KernelSpec, x, atoms) -> np.ndarray:
    """Matrix ``K[i, l] = k(x_i, atom_l)`` for batches of points."""
    x = _as_batch(spec, x)
    atoms = _as_batch(spec, atoms)
    impl = _features_loops if _accel.USE_NUMBA else _features_numpy
    return impl(x, atoms, float(spec.bandwidth), spec.family == "laplacian")


def gram(spec: KernelSpec, x) -> np.ndarray:
    return cross_kernel(spec, x, x)
