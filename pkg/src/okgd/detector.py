"""Online change-point detection over a graph of heterogeneous streams.

The detector keeps, per node, a coherence dictionary, the features of every
frame in the reference pool and in the sliding test window. When a dictionary
grows, the new atom's column is filled in for all cached frames, so the window
statistics always match a from-scratch computation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import estimator
from .dictionary import NodeDictionary
from .graph import Graph
from .kernels import KernelSpec, cross_kernel, kernel_bound, median_heuristic

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectorConfig:
    """Detector hyper-parameters.

    ``lam=None`` selects ``10 / mean degree`` for the graph being monitored.
    ``bandwidth=None`` tunes each node's kernel by the median heuristic over
    its burn-in observations; a float or per-node sequence fixes it instead.
    ``threshold_warmup=None`` means ``n_post`` scored steps.
    """

    lam: float | None = None
    gamma: float = 10.0
    mu0: float = 0.5
    bp: int = 100
    n_pre: int = 100
    n_post: int = 100
    c: float = 1.0
    kappa: float = 1.5
    threshold_warmup: int | None = None
    seed: int = 0
    kernel: str = "gaussian"
    bandwidth: float | tuple | None = None

    def __post_init__(self):
        if self.n_pre < 1 or self.n_post < 1:
            raise ValueError("window sizes must be at least 1")
        if self.bp < self.n_pre:
            raise ValueError(f"burn-in length bp={self.bp} must be >= n_pre={self.n_pre}")
        if self.lam is not None and self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not 0.0 < self.mu0 < 1.0:
            raise ValueError("mu0 must lie in (0, 1)")
        if self.c <= 0 or self.kappa <= 0:
            raise ValueError("c and kappa must be positive")
        if self.threshold_warmup is not None and self.threshold_warmup < 0:
            raise ValueError("threshold_warmup must be nonnegative")

    @property
    def warmup(self) -> int:
        return self.n_post if self.threshold_warmup is None else self.threshold_warmup

    def resolve_lambda(self, graph: Graph) -> float:
        if self.lam is not None:
            return float(self.lam)
        return default_lambda(graph)

    def with_(self, **changes) -> "DetectorConfig":
        return replace(self, **changes)


def default_lambda(graph: Graph) -> float:
    """``10 / mean degree``; zero for an edgeless graph."""
    d = graph.mean_degree
    return 10.0 / d if d > 0 else 0.0


@dataclass
class StepResult:
    t: int
    scores: np.ndarray
    norm: float
    threshold: float
    alarm: bool


@dataclass
class DetectionResult:
    detected: bool
    tau_hat: int | None
    alarms: list = field(default_factory=list)
    times: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    score_norms: np.ndarray = field(default_factory=lambda: np.zeros(0))
    scores: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    thresholds: np.ndarray = field(default_factory=lambda: np.zeros(0))
    alarm_flags: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    dictionary_sizes: list = field(default_factory=list)


class OKGDDetector:
    """Stateful detector consuming one frame (one observation per node) at a time.

    Frame indices start at 1. Frames ``1..bp`` are burn-in, the next
    ``n_post - 1`` only fill the test window, and frame ``bp + n_post`` is the
    first scored step.
    """

    def __init__(self, graph: Graph, config: DetectorConfig, continue_after_alarm: bool = False):
        self.graph = graph
        self.config = config
        self.lam = config.resolve_lambda(graph)
        self.continue_after_alarm = continue_after_alarm
        self.rng = np.random.default_rng(config.seed)
        self.t = 0
        self.dicts: list[NodeDictionary] | None = None
        self._order = np.arange(graph.n_nodes, dtype=np.int64)
        self._origin = config.bp  # scored-step clock: k = t - origin - n_post + 1
        self.alarms: list[int] = []
        self._history: list[float] = []

    # -- burn-in -----------------------------------------------------------

    def _bandwidths(self, per_node_obs):
        bw = self.config.bandwidth
        n = self.graph.n_nodes
        if bw is None:
            out = []
            for v, obs in enumerate(per_node_obs):
                try:
                    out.append(median_heuristic(obs))
                except ValueError as exc:
                    raise ValueError(f"node {v}: cannot tune kernel bandwidth ({exc})") from None
            return out
        if np.isscalar(bw):
            return [float(bw)] * n
        if len(bw) != n:
            raise ValueError(f"{len(bw)} bandwidths given for {n} nodes")
        return [float(b) for b in bw]

    def burn_in(self, frames) -> None:
        """Seed dictionaries, bandwidths and the reference pool from ``bp`` frames."""
        cfg = self.config
        if self.dicts is not None:
            raise RuntimeError("burn-in already done")
        if len(frames) != cfg.bp:
            raise ValueError(f"burn-in needs exactly bp={cfg.bp} frames, got {len(frames)}")
        n = self.graph.n_nodes
        per_node = []
        for v in range(n):
            try:
                obs = np.stack([np.atleast_1d(np.asarray(f[v], dtype=float)) for f in frames])
            except (IndexError, ValueError) as exc:
                raise ValueError(f"node {v}: malformed burn-in observations ({exc})") from None
            if obs.ndim != 2:
                raise ValueError(f"node {v}: observations must be vectors")
            per_node.append(obs)
        bws = self._bandwidths(per_node)
        self.dicts = []
        for v, obs in enumerate(per_node):
            spec = KernelSpec(cfg.kernel, bws[v], obs.shape[1])
            d = NodeDictionary(spec, obs[0], cfg.mu0)
            for y in obs[1:]:
                d.maybe_add(y)
            self.dicts.append(d)
        self.dims = [obs.shape[1] for obs in per_node]
        self.bounds = np.array([kernel_bound(d.kernel) for d in self.dicts])

        width = max(len(d) for d in self.dicts)
        self._cap_w = max(8, 2 * width)
        self._cap_pool = max(64, 2 * cfg.bp)
        self._pool_obs = [np.zeros((self._cap_pool, dim)) for dim in self.dims]
        self._pool_feat = np.zeros((n, self._cap_pool, self._cap_w))
        self._pool_index = np.zeros(self._cap_pool, dtype=np.int64)
        self._pool_size = 0
        for v, obs in enumerate(per_node):
            self._pool_obs[v][: cfg.bp] = obs
            self._pool_feat[v, : cfg.bp, : len(self.dicts[v])] = self.dicts[v].featurize_many(obs)
        self._pool_index[: cfg.bp] = np.arange(1, cfg.bp + 1)
        self._pool_size = cfg.bp

        self._post_obs = [np.zeros((cfg.n_post, dim)) for dim in self.dims]
        self._post_feat = np.zeros((n, cfg.n_post, self._cap_w))
        self._post_index = np.zeros(cfg.n_post, dtype=np.int64)
        self._post_count = 0
        self.theta = np.zeros((n, width))
        self.t = cfg.bp
        log.debug("burn-in done: dictionary sizes %s", self.dictionary_sizes)

    # -- bookkeeping ---------------------------------------------------------

    @property
    def dictionary_sizes(self) -> list[int]:
        return [len(d) for d in self.dicts]

    @property
    def width(self) -> int:
        return max(len(d) for d in self.dicts)

    @property
    def pool_indices(self) -> np.ndarray:
        return self._pool_index[: self._pool_size].copy()

    @property
    def post_indices(self) -> np.ndarray:
        return np.sort(self._post_index[: min(self._post_count, self.config.n_post)])

    def _ensure_width(self, needed):
        if needed > self._cap_w:
            extra = max(needed, 2 * self._cap_w) - self._cap_w
            self._pool_feat = np.pad(self._pool_feat, ((0, 0), (0, 0), (0, extra)))
            self._post_feat = np.pad(self._post_feat, ((0, 0), (0, 0), (0, extra)))
            self._cap_w += extra
        if needed > self.theta.shape[1]:
            self.theta = np.pad(self.theta, ((0, 0), (0, needed - self.theta.shape[1])))

    def _append_pool(self, obs_per_node, index):
        if self._pool_size == self._cap_pool:
            self._cap_pool *= 2
            self._pool_obs = [np.concatenate([p, np.zeros_like(p)]) for p in self._pool_obs]
            self._pool_feat = np.concatenate([self._pool_feat, np.zeros_like(self._pool_feat)], axis=1)
            self._pool_index = np.concatenate([self._pool_index, np.zeros_like(self._pool_index)])
        i = self._pool_size
        for v, obs in enumerate(obs_per_node):
            self._pool_obs[v][i] = obs
            self._pool_feat[v, i, :] = 0.0
            self._pool_feat[v, i, : len(self.dicts[v])] = self.dicts[v].featurize(obs)
        self._pool_index[i] = index
        self._pool_size += 1

    def _grow_dictionary(self, v, obs):
        """Try to add ``obs`` to node ``v``'s dictionary; extend cached features on growth."""
        d = self.dicts[v]
        if not d.maybe_add(obs):
            return False
        col = len(d) - 1
        self._ensure_width(len(d))
        atom = d.atoms[col:col + 1]
        p = self._pool_size
        self._pool_feat[v, :p, col] = _column(d, self._pool_obs[v][:p], atom)
        filled = min(self._post_count, self.config.n_post)
        self._post_feat[v, :filled, col] = _column(d, self._post_obs[v][:filled], atom)
        return True

    def _frame_obs(self, frame):
        if len(frame) != self.graph.n_nodes:
            raise ValueError(f"frame has {len(frame)} observations, graph has {self.graph.n_nodes} nodes")
        out = []
        for v, y in enumerate(frame):
            y = np.atleast_1d(np.asarray(y, dtype=float))
            if y.shape != (self.dims[v],):
                raise ValueError(f"node {v}: observation shape {y.shape}, expected ({self.dims[v]},)")
            out.append(y)
        return out

    # -- online update -------------------------------------------------------

    def step(self, frame) -> StepResult | None:
        """Consume the next frame; returns ``None`` while the test window fills."""
        if self.dicts is None:
            raise RuntimeError("step() called before burn_in()")
        cfg = self.config
        obs = self._frame_obs(frame)
        self.t += 1
        t = self.t
        scored = t - self._origin >= cfg.n_post

        pre_idx = None
        if scored:
            if self._pool_size < cfg.n_pre:
                raise RuntimeError(f"reference pool has {self._pool_size} frames, need {cfg.n_pre}")
            pre_idx = self.rng.choice(self._pool_size, size=cfg.n_pre, replace=False)

        slot = self._post_count % cfg.n_post
        evicted = None
        if self._post_count >= cfg.n_post:
            evicted = ([self._post_obs[v][slot].copy() for v in range(len(obs))], int(self._post_index[slot]))
        for v, y in enumerate(obs):
            self._post_obs[v][slot] = y
        self._post_index[slot] = t
        self._post_feat[:, slot, :] = 0.0

        if scored:
            for v, y in enumerate(obs):
                self._grow_dictionary(v, y)
        for v, y in enumerate(obs):
            self._post_feat[v, slot, : len(self.dicts[v])] = self.dicts[v].featurize(y)
        self._post_count += 1
        if not scored:
            return None

        w = self.width
        stats = estimator.stats_from_features(
            self._pool_feat[:, pre_idx, :w], self._post_feat[:, :, :w],
            self.dictionary_sizes, self.graph,
        )
        k = t - self._origin - cfg.n_post + 1
        lipschitz = estimator.lipschitz_constants(
            estimator.block_spectral_norms(stats), self.graph, self.lam, cfg.gamma, self.bounds
        )
        alpha = np.minimum(cfg.c / k, 1.0 / lipschitz)
        self.theta = estimator.bsgd_step(self.theta, stats, self.graph, self.lam, cfg.gamma, alpha, self._order)
        g = estimator.score(self.theta, stats)
        norm = float(np.linalg.norm(g))

        self._history.append(norm)
        threshold = cfg.kappa * float(np.mean(self._history))
        alarm = len(self._history) > cfg.warmup and norm > threshold
        if alarm:
            self.alarms.append(t)
            if self.continue_after_alarm:
                self._reset_after_alarm()
        elif evicted is not None and evicted[1] > cfg.bp:
            self._append_pool(*evicted)
        return StepResult(t, g, norm, threshold, alarm)

    def _reset_after_alarm(self):
        """Restart estimation from the most recent ``n_pre`` validated frames."""
        cfg = self.config
        keep = slice(self._pool_size - cfg.n_pre, self._pool_size)
        self._pool_obs = [p[keep].copy() for p in self._pool_obs]
        self._pool_feat = self._pool_feat[:, keep, :].copy()
        self._pool_index = self._pool_index[keep].copy()
        self._pool_size = self._cap_pool = cfg.n_pre
        self._post_count = 0
        self._post_feat[:] = 0.0
        self._post_index[:] = 0
        self.theta = np.zeros_like(self.theta)
        self._history = []
        self._origin = self.t


def _column(d: NodeDictionary, observations, atom) -> np.ndarray:
    if len(observations) == 0:
        return np.zeros(0)
    return cross_kernel(d.kernel, observations, atom)[:, 0]


def as_frames(streams):
    """Validate per-node stream arrays ``(T, d_v)`` and return them as 2-D float arrays."""
    out = []
    for v, s in enumerate(streams):
        a = np.asarray(s, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2:
            raise ValueError(f"node {v}: stream must be 1-D or 2-D")
        out.append(a)
    lengths = {a.shape[0] for a in out}
    if len(lengths) != 1:
        raise ValueError(f"node streams have different lengths: {sorted(lengths)}")
    return out


def run(streams, graph: Graph, config: DetectorConfig, continue_after_alarm: bool = False) -> DetectionResult:
    """Burn in, then score frames until the first alarm or the end of the stream.

    ``streams[v]`` holds node ``v``'s observations with shape ``(T, d_v)``.
    With ``continue_after_alarm`` the detector resets and keeps going, and
    every alarm is reported.
    """
    streams = as_frames(streams)
    if len(streams) != graph.n_nodes:
        raise ValueError(f"{len(streams)} node streams for a graph of {graph.n_nodes} nodes")
    n_frames = streams[0].shape[0]
    if n_frames < config.bp + config.n_post:
        raise ValueError(f"stream has {n_frames} frames, need at least bp + n_post = {config.bp + config.n_post}")

    def frame(i):
        return [s[i] for s in streams]

    det = OKGDDetector(graph, config, continue_after_alarm=continue_after_alarm)
    det.burn_in([frame(i) for i in range(config.bp)])
    times, norms, scores, thresholds, flags = [], [], [], [], []
    for i in range(config.bp, n_frames):
        res = det.step(frame(i))
        if res is None:
            continue
        times.append(res.t)
        norms.append(res.norm)
        scores.append(res.scores)
        thresholds.append(res.threshold)
        flags.append(res.alarm)
        if res.alarm and not continue_after_alarm:
            break
    return DetectionResult(
        detected=bool(det.alarms),
        tau_hat=det.alarms[0] if det.alarms else None,
        alarms=list(det.alarms),
        times=np.array(times, dtype=int),
        score_norms=np.array(norms),
        scores=np.array(scores).reshape(len(times), graph.n_nodes),
        thresholds=np.array(thresholds),
        alarm_flags=np.array(flags, dtype=bool),
        dictionary_sizes=det.dictionary_sizes,
    )
