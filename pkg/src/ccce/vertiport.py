"""Vertiport occupancy game.

Each of ``n`` queue agents picks, for every one of ``m`` vertiports, whether to
occupy it or yield. Action index ``a`` encodes the occupancy vector in binary
with vertiport 0 as the least significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .game import Game

WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True)
class VertiportScenario:
    n: int = 4
    m: int = 2
    gamma: float = 1.5
    seed: int = 0
    yield_penalty: float = 5.0
    congestion_penalty: float = 5.0
    sigma_scale: float = 0.3
    max_profiles: int = 10**6

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if self.yield_penalty < 0 or self.congestion_penalty < 0 or self.sigma_scale < 0:
            raise ValueError("penalties and sigma_scale must be nonnegative")

    @property
    def num_actions(self) -> int:
        return 2**self.m

    @property
    def sigma_max(self) -> float:
        return self.sigma_scale * (self.gamma - 1.0)


class ScenarioTooLargeError(ValueError):
    pass


def occupancy_bits(m: int) -> np.ndarray:
    """``bits[a, v] = 1`` iff action ``a`` occupies vertiport ``v``."""
    a = np.arange(2**m)
    return (a[:, None] >> np.arange(m)[None, :]) & 1


def occupancy_cost(scenario: VertiportScenario, agent: int, profile: Sequence[int]) -> float:
    """Delay in minutes for ``agent`` at joint action ``profile``."""
    bits = occupancy_bits(scenario.m)
    x = bits[np.asarray(profile)]
    counts = x.sum(axis=0)
    own = x[agent]
    congestion = scenario.congestion_penalty * scenario.gamma * np.sum(own * (counts - 1))
    waiting = scenario.yield_penalty * np.sum(1 - own)
    return float(congestion + waiting)


def build_game(scenario: VertiportScenario) -> Game:
    n, k = scenario.n, scenario.num_actions
    if k**n > scenario.max_profiles:
        raise ScenarioTooLargeError(
            f"{k}^{n} = {k**n} profiles exceeds the cap of {scenario.max_profiles}"
        )
    bits = occupancy_bits(scenario.m)
    profiles = np.array(list(np.ndindex(*(k,) * n)), dtype=int).reshape(-1, n)
    x = bits[profiles]  # (P, n, m)
    counts = x.sum(axis=1, keepdims=True)
    congestion = scenario.congestion_penalty * scenario.gamma * np.sum(x * (counts - 1), axis=2)
    waiting = scenario.yield_penalty * np.sum(1 - x, axis=2)
    return Game((k,) * n, (congestion + waiting).T)


def sample_sigmas(scenario: VertiportScenario, rng: np.random.Generator) -> np.ndarray:
    """Agent noise levels drawn from U(0, sigma_scale * (gamma - 1))."""
    return rng.uniform(0.0, 1.0, size=scenario.n) * scenario.sigma_max


def weights_from_sigmas(sigmas) -> np.ndarray:
    """Normalised inverse-sigma weights; sigmas below 1e-6 are floored."""
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.size == 0 or np.any(sigmas < 0) or not np.all(np.isfinite(sigmas)):
        raise ValueError(f"sigmas must be finite and >= 0, got {sigmas}")
    inv = 1.0 / np.maximum(sigmas, WEIGHT_FLOOR)
    return inv / inv.sum()
