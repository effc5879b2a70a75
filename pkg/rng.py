"""Seeded random number generation for reproducible runs."""

from __future__ import annotations

import numpy as np


class SeededRNG:
    """Wrapper around numpy.random.Generator so one seed fixes every draw of a run."""

    def __init__(self, seed: int):
        self._seed = int(seed)
        self._rng = np.random.default_rng(self._seed)

    @property
    def seed(self) -> int:
        return self._seed

    def random_complex(self, shape=()) -> np.ndarray:
        """Unit-circle phase scaled by a modulus uniform in [0.5, 1.5]."""
        phase = self._rng.uniform(0.0, 2.0 * np.pi, shape)
        modulus = self._rng.uniform(0.5, 1.5, shape)
        return modulus * np.exp(1j * phase)

    def fork(self) -> SeededRNG:
        """Create a child RNG with a derived seed for sub-tasks."""
        child_seed = int(self._rng.integers(0, 2 ** 63 - 1))
        return SeededRNG(child_seed)


def make_rng(seed=None) -> SeededRNG:
    """Build the run RNG; None falls back to config.DEFAULT_SEED."""
    if seed is None:
        from config import DEFAULT_SEED
        seed = DEFAULT_SEED
    return SeededRNG(seed)
