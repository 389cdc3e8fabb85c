"""Per-node kernel dictionaries grown by the coherence criterion."""
from __future__ import annotations

import numpy as np

from .kernels import KernelSpec, cross_kernel


class NodeDictionary:
    """Ordered set of kernel atoms for one node.

    A candidate is admitted when its largest kernel value against the current
    atoms is at most ``coherence_threshold``. Atoms are never removed.
    """

    def __init__(self, kernel: KernelSpec, first_observation, coherence_threshold: float = 0.5):
        if not 0.0 < coherence_threshold < 1.0:
            raise ValueError(f"coherence threshold must lie in (0, 1), got {coherence_threshold}")
        self.kernel = kernel
        self.coherence_threshold = float(coherence_threshold)
        first = self._check(first_observation)
        self._atoms = np.empty((8, kernel.input_dim))
        self._atoms[0] = first
        self._size = 1

    def __len__(self) -> int:
        return self._size

    @property
    def atoms(self) -> np.ndarray:
        return self._atoms[: self._size]

    def _check(self, obs) -> np.ndarray:
        obs = np.atleast_1d(np.asarray(obs, dtype=float))
        if obs.shape != (self.kernel.input_dim,):
            raise ValueError(
                f"observation of shape {obs.shape} does not match kernel input_dim {self.kernel.input_dim}"
            )
        return obs

    def coherence(self, obs) -> float:
        """Largest kernel value between ``obs`` and the current atoms."""
        return float(self.featurize(obs).max())

    def maybe_add(self, obs) -> bool:
        obs = self._check(obs)
        if self.coherence(obs) > self.coherence_threshold:
            return False
        if self._size == self._atoms.shape[0]:
            self._atoms = np.concatenate([self._atoms, np.empty_like(self._atoms)])
        self._atoms[self._size] = obs
        self._size += 1
        return True

    def featurize(self, obs) -> np.ndarray:
        obs = self._check(obs)
        return cross_kernel(self.kernel, obs[None, :], self.atoms)[0]

    def featurize_many(self, observations) -> np.ndarray:
        """Feature rows for a batch, shape ``(n, len(self))``."""
        return cross_kernel(self.kernel, observations, self.atoms)
