"""Finite strategic games, deviation costs and correlated-equilibrium margins.

Joint action profiles are indexed lexicographically with agent 0 as the
outermost digit, i.e. the order of :func:`numpy.ndindex`. Every probability
vector, cost row and CSV file in the package follows this order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

FEAS_EPS = 1e-9
MARGINAL_EPS = 1e-12


class DeviationConstraint(NamedTuple):
    """Incentive constraint: ``agent`` told ``recommended`` considers ``deviation``."""

    agent: int
    recommended: int
    deviation: int

    def label(self) -> str:
        return f"{self.agent}:{self.recommended}>{self.deviation}"


@dataclass(frozen=True, eq=False)
class Game:
    """Cost-minimisation game with dense per-agent cost tables.

    ``costs[i, k]`` is agent ``i``'s cost at profile index ``k``.
    """

    action_counts: tuple[int, ...]
    costs: np.ndarray

    def __post_init__(self):
        counts = tuple(int(a) for a in self.action_counts)
        if not counts or any(a < 1 for a in counts):
            raise ValueError(f"action_counts must be non-empty and >= 1, got {counts}")
        costs = np.array(self.costs, dtype=float)
        expected = (len(counts), math.prod(counts))
        if costs.shape != expected:
            raise ValueError(f"costs must have shape {expected}, got {costs.shape}")
        if not np.all(np.isfinite(costs)):
            raise ValueError("costs must be finite")
        costs.setflags(write=False)
        object.__setattr__(self, "action_counts", counts)
        object.__setattr__(self, "costs", costs)

    @property
    def n(self) -> int:
        return len(self.action_counts)

    @property
    def num_profiles(self) -> int:
        return self.costs.shape[1]

    def cost_tensor(self, agent: int) -> np.ndarray:
        return self.costs[agent].reshape(self.action_counts)

    def profile_index(self, profile: Sequence[int]) -> int:
        check_profile(self, profile)
        return int(np.ravel_multi_index(tuple(profile), self.action_counts))

    def profile(self, index: int) -> tuple[int, ...]:
        return tuple(int(a) for a in np.unravel_index(index, self.action_counts))

    def constraints(self) -> list[DeviationConstraint]:
        """All deviation constraints, ordered by (agent, recommended, deviation)."""
        return [
            DeviationConstraint(i, a, b)
            for i, k in enumerate(self.action_counts)
            for a in range(k)
            for b in range(k)
            if a != b
        ]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "action_counts": list(self.action_counts),
            "costs": [row.tolist() for row in self.costs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Game":
        unknown = set(data) - {"n", "action_counts", "costs"}
        if unknown:
            raise ValueError(f"unknown game field(s): {sorted(unknown)}")
        for key in ("n", "action_counts", "costs"):
            if key not in data:
                raise ValueError(f"game is missing field {key!r}")
        game = cls(tuple(data["action_counts"]), np.asarray(data["costs"], dtype=float))
        if int(data["n"]) != game.n:
            raise ValueError(f"n={data['n']} disagrees with {game.n} action counts")
        return game

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "Game":
        return cls.from_dict(json.loads(Path(path).read_text()))


def enumerate_profiles(game: Game) -> list[tuple[int, ...]]:
    return list(np.ndindex(*game.action_counts))


def check_profile(game: Game, profile: Sequence[int]) -> None:
    if len(profile) != game.n:
        raise ValueError(f"profile has length {len(profile)}, game has {game.n} agents")
    for i, (a, k) in enumerate(zip(profile, game.action_counts)):
        if not 0 <= a < k:
            raise ValueError(f"action {a} out of range for agent {i} ({k} actions)")


def check_constraint(game: Game, c: DeviationConstraint) -> None:
    if not 0 <= c.agent < game.n:
        raise ValueError(f"agent {c.agent} out of range")
    k = game.action_counts[c.agent]
    if not (0 <= c.recommended < k and 0 <= c.deviation < k):
        raise ValueError(f"constraint {c} has an action outside [0, {k})")


def as_distribution(game: Game, z) -> np.ndarray:
    """Validate a joint distribution and clamp tiny negatives to zero."""
    z = np.asarray(z, dtype=float)
    if z.shape != (game.num_profiles,):
        raise ValueError(f"distribution has shape {z.shape}, expected ({game.num_profiles},)")
    if np.any(z < -FEAS_EPS):
        raise ValueError("distribution has negative entries")
    if abs(z.sum() - 1.0) > FEAS_EPS:
        raise ValueError(f"distribution sums to {z.sum():.12g}, not 1")
    return np.maximum(z, 0.0)


def point_mass(game: Game, profile: Sequence[int]) -> np.ndarray:
    z = np.zeros(game.num_profiles)
    z[game.profile_index(profile)] = 1.0
    return z


def _others_index(game: Game, agent: int, others: Sequence[int]) -> tuple:
    if len(others) != game.n - 1:
        raise ValueError(f"expected {game.n - 1} other actions, got {len(others)}")
    counts = [k for j, k in enumerate(game.action_counts) if j != agent]
    for a, k in zip(others, counts):
        if not 0 <= a < k:
            raise ValueError(f"other-agent action {a} out of range [0, {k})")
    return tuple(others)


def deviation_cost(game: Game, c: DeviationConstraint, others: Sequence[int]) -> float:
    """Cost change J_i(x_i, x_-i) - J_i(x_i', x_-i) for constraint ``c``."""
    check_constraint(game, c)
    idx = _others_index(game, c.agent, others)
    t = np.moveaxis(game.cost_tensor(c.agent), c.agent, 0)
    return float(t[c.recommended][idx] - t[c.deviation][idx])


def deviation_table(game: Game, c: DeviationConstraint) -> np.ndarray:
    """Deviation cost over all x_-i, shaped like the other agents' action grid."""
    check_constraint(game, c)
    t = np.moveaxis(game.cost_tensor(c.agent), c.agent, 0)
    return t[c.recommended] - t[c.deviation]


def _joint_slice(game: Game, z: np.ndarray, agent: int, action: int) -> np.ndarray:
    return np.moveaxis(z.reshape(game.action_counts), agent, 0)[action]


def marginal(game: Game, z, agent: int, action: int) -> float:
    return float(_joint_slice(game, np.asarray(z, dtype=float), agent, action).sum())


def marginals(game: Game, z, agent: int) -> np.ndarray:
    t = np.asarray(z, dtype=float).reshape(game.action_counts)
    axes = tuple(j for j in range(game.n) if j != agent)
    return t.sum(axis=axes)


def conditional_distribution(game: Game, z, agent: int, recommended: int) -> np.ndarray | None:
    """z(x_-i | x_i) over the other agents' grid, or ``None`` if x_i is (numerically) never recommended."""
    z = as_distribution(game, z)
    joint = _joint_slice(game, z, agent, recommended)
    mass = joint.sum()
    if mass <= MARGINAL_EPS:
        return None
    return joint / mass


def unconditional_margin(game: Game, z, c: DeviationConstraint) -> float:
    z = as_distribution(game, z)
    joint = _joint_slice(game, z, c.agent, c.recommended)
    return float(np.sum(joint * deviation_table(game, c)))


def nominal_margin(game: Game, z, c: DeviationConstraint) -> float | None:
    """Conditional expected deviation cost m_c(z); ``None`` when undefined."""
    cond = conditional_distribution(game, z, c.agent, c.recommended)
    if cond is None:
        return None
    return float(np.sum(cond * deviation_table(game, c)))


def margin_tables(game: Game, z) -> list[np.ndarray]:
    """Per agent, a ``(k_i, k_i)`` array of m_c(z) indexed [recommended, deviation].

    Diagonal entries are 0; rows whose recommendation is never drawn are NaN.
    """
    z = as_distribution(game, z)
    zt = z.reshape(game.action_counts)
    out = []
    for i, k in enumerate(game.action_counts):
        zi = np.moveaxis(zt, i, 0).reshape(k, -1)
        ci = np.moveaxis(game.cost_tensor(i), i, 0).reshape(k, -1)
        mass = zi.sum(axis=1)
        # E[J_i(a, x_-i) | rec b] for all (b, a)
        cross = zi @ ci.T
        own = np.diag(cross)
        table = own[:, None] - cross
        with np.errstate(invalid="ignore", divide="ignore"):
            table = table / mass[:, None]
        table[mass <= MARGINAL_EPS] = np.nan
        out.append(table)
    return out


def expected_system_cost(game: Game, z, weights) -> float:
    z = np.asarray(z, dtype=float)
    return float(z @ system_cost_vector(game, weights))


def system_cost_vector(game: Game, weights) -> np.ndarray:
    """Weighted cost sum_i w_i J_i(x) for every profile x."""
    w = check_weights(game, weights)
    return w @ game.costs


def check_weights(game: Game, weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (game.n,):
        raise ValueError(f"weights must have length {game.n}")
    if np.any(w < 0) or not np.any(w > 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite, nonnegative and not all zero")
    return w
