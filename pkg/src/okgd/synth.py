"""Synthetic heterogeneous streams on a stochastic block model graph.

Four cluster models are available: C1 and C3 emit 2-d Gaussian vectors
(independent vs. correlated coordinates), C2 and C4 emit Poisson counts
(means 5 and 10). At the change time each affected node switches to its
cluster's target model.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, sample_sbm


@dataclass(frozen=True)
class ClusterModel:
    label: str
    kind: str  # "gaussian" or "poisson"
    mean: float = 0.0
    correlation: float = 0.0

    @property
    def dim(self) -> int:
        return 2 if self.kind == "gaussian" else 1

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` draws as an ``(n, dim)`` float array."""
        if self.kind == "poisson":
            return rng.poisson(self.mean, size=(n, 1)).astype(float)
        chol = np.linalg.cholesky(np.array([[1.0, self.correlation], [self.correlation, 1.0]]))
        return rng.standard_normal((n, 2)) @ chol.T + self.mean

    def analytic_mean(self) -> np.ndarray:
        return np.full(self.dim, float(self.mean))

    def analytic_var(self) -> np.ndarray:
        return np.full(self.dim, float(self.mean) if self.kind == "poisson" else 1.0)


C1 = ClusterModel("C1", "gaussian", correlation=0.0)
C2 = ClusterModel("C2", "poisson", mean=5.0)
C3 = ClusterModel("C3", "gaussian", correlation=0.75)
C4 = ClusterModel("C4", "poisson", mean=10.0)
MODELS = {m.label: m for m in (C1, C2, C3, C4)}

# C4 drops to C2's mean: a Poisson stream cannot switch to the Gaussian C1.
DEFAULT_TARGETS = {"C1": "C3", "C3": "C1", "C2": "C4", "C4": "C2"}

DEFAULT_TAU = 500
DEFAULT_HORIZON = 1500


@dataclass
class Scenario:
    graph: Graph
    labels: np.ndarray
    pre_models: list
    post_models: list
    tau: int | None
    changed: list
    horizon: int
    params: dict = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes

    @property
    def dims(self) -> list[int]:
        return [m.dim for m in self.pre_models]


def _cluster_models(n_clusters, cluster_models):
    if cluster_models is None:
        cluster_models = [("C1", "C2", "C3", "C4")[i % 4] for i in range(n_clusters)]
    if len(cluster_models) != n_clusters:
        raise ValueError(f"{len(cluster_models)} cluster models for {n_clusters} clusters")
    return [MODELS[m] if isinstance(m, str) else m for m in cluster_models]


def _build(graph, labels, per_cluster, changed, tau, horizon, targets, params):
    targets = DEFAULT_TARGETS if targets is None else targets
    pre = [per_cluster[c] for c in labels]
    changed = sorted(int(v) for v in changed)
    changed_set = set(changed)
    post = [MODELS[targets[m.label]] if v in changed_set else m for v, m in enumerate(pre)]
    for v in changed:
        if post[v].dim != pre[v].dim:
            raise ValueError(f"node {v}: target {post[v].label} changes the observation dimension")
    return Scenario(graph, labels, pre, post, tau if changed else None, changed, horizon, params)


def make_cluster_swap_scenario(seed=None, n_clusters=4, cluster_size=20, p_intra=0.5, p_inter=0.01,
                               tau=DEFAULT_TAU, horizon=DEFAULT_HORIZON, changed_clusters=None,
                               cluster_models=None, targets=None) -> Scenario:
    """Every node of the ``changed_clusters`` (all clusters by default) switches at ``tau``."""
    graph, labels = sample_sbm(n_clusters, cluster_size, p_intra, p_inter, seed)
    per_cluster = _cluster_models(n_clusters, cluster_models)
    if changed_clusters is None:
        changed_clusters = list(range(n_clusters))
    changed = [v for v in range(labels.size) if labels[v] in set(changed_clusters)]
    params = dict(kind="cluster-swap", seed=seed, n_clusters=n_clusters, cluster_size=cluster_size,
                  p_intra=p_intra, p_inter=p_inter, tau=tau, horizon=horizon,
                  changed_clusters=list(changed_clusters),
                  cluster_models=[m.label for m in per_cluster])
    return _build(graph, labels, per_cluster, changed, tau, horizon, targets, params)


def make_random_location_scenario(n_changed=10, seed=None, n_clusters=4, cluster_size=20, p_intra=0.5,
                                  p_inter=0.01, tau=DEFAULT_TAU, horizon=DEFAULT_HORIZON,
                                  cluster_models=None, targets=None) -> Scenario:
    """``n_changed`` nodes drawn uniformly at random switch to their cluster's target."""
    graph, labels = sample_sbm(n_clusters, cluster_size, p_intra, p_inter, seed)
    n = labels.size
    if not 0 <= n_changed <= n:
        raise ValueError(f"n_changed must lie in [0, {n}], got {n_changed}")
    per_cluster = _cluster_models(n_clusters, cluster_models)
    rng = np.random.default_rng([0 if seed is None else seed, 1])
    changed = rng.choice(n, size=n_changed, replace=False)
    params = dict(kind="random-locations" if n_changed else "null", seed=seed, n_clusters=n_clusters,
                  cluster_size=cluster_size, p_intra=p_intra, p_inter=p_inter, tau=tau, horizon=horizon,
                  n_changed=n_changed, cluster_models=[m.label for m in per_cluster])
    return _build(graph, labels, per_cluster, changed, tau, horizon, targets, params)


def make_null_scenario(seed=None, **kwargs) -> Scenario:
    return make_random_location_scenario(0, seed, **kwargs)


def emit_frames(sc: Scenario, seed=None, horizon: int | None = None) -> list[np.ndarray]:
    """Per-node streams ``(horizon, d_v)``; frame ``t`` (1-based) is post-change iff ``t >= tau``."""
    horizon = sc.horizon if horizon is None else horizon
    rng = np.random.default_rng(seed)
    n_before = horizon if sc.tau is None else min(max(sc.tau - 1, 0), horizon)
    streams = []
    for pre, post in zip(sc.pre_models, sc.post_models):
        first = pre.sample(rng, n_before)
        second = post.sample(rng, horizon - n_before)
        streams.append(np.concatenate([first, second]))
    return streams
