"""Uncoordinated (pure Nash) and uncertainty-ignorant (naive CE) baselines."""

from __future__ import annotations

import numpy as np

from .game import Game
from .solver import CcceSolution, nominal_model, solve_ccce

NE_TOL = 1e-12


class NoPureNashError(ValueError):
    pass


def pure_nash_equilibria(game: Game) -> list[tuple[int, ...]]:
    """All profiles where no agent lowers its cost by a unilateral switch."""
    ok = np.ones(game.action_counts, dtype=bool)
    for i in range(game.n):
        t = game.cost_tensor(i)
        best = t.min(axis=i, keepdims=True)
        ok &= t <= best + NE_TOL * (1.0 + np.abs(best))
    return [tuple(int(a) for a in p) for p in np.argwhere(ok)]


def select_ne(profiles, rng: np.random.Generator) -> tuple[int, ...]:
    if len(profiles) == 0:
        raise NoPureNashError("game has no pure Nash equilibrium")
    return tuple(profiles[int(rng.integers(len(profiles)))])


def naive_ce(game: Game, weights) -> CcceSolution:
    """Best correlated equilibrium for the nominal costs (all sigma = 0)."""
    return solve_ccce(game, nominal_model(game.n), weights)
