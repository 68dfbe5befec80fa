"""Coordination LP under classical or chance-constrained CE incentive rows.

Two linear forms of the Gaussian deterministic equivalent are supported:

``constant``
    ``sum_{x_-i} z(x_i, x_-i) dJ(x_i, x_i', x_-i) <= -q(alpha) sigma_i``.
    The margin is a constant right-hand side, so LP sensitivity in ``sigma``
    and ``alpha`` is read off the duals exactly. A recommendation carrying the
    margin must be drawn with positive probability, and the implied
    conditional margin is at least as tight as the chance constraint.

``conditional``
    ``sum_{x_-i} z(x_i, x_-i) (dJ(x_i, x_i', x_-i) + q(alpha) sigma_i) <= 0``,
    i.e. ``z_marg(x_i) * (m_c(z) + q sigma_i) <= 0``: the exact conditional
    chance constraint wherever ``x_i`` is recommended, vacuous elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal, Mapping

import numpy as np

from . import lp as lpmod
from .game import DeviationConstraint, Game, check_constraint, deviation_table, nominal_margin, system_cost_vector
from .gaussian import std_normal_quantile

ACTIVE_TOL = 1e-7

Form = Literal["constant", "conditional"]
FORMS = ("constant", "conditional")


class InfeasibleCcceError(RuntimeError):
    """No distribution satisfies the chance-constrained rows at this (alpha, sigma)."""

    def __init__(self, alpha: float, sigmas):
        self.alpha = float(alpha)
        self.sigmas = tuple(float(s) for s in sigmas)
        sig = ", ".join(f"{s:.6g}" for s in self.sigmas)
        super().__init__(f"no CC-CE at alpha={self.alpha:.6g}, sigma=({sig})")


@dataclass(frozen=True)
class UncertaintyModel:
    """Agent-level Gaussian noise on deviation costs plus a confidence level.

    ``sigma_overrides`` replaces the agent's sigma for individual constraints;
    setting an entry to 0 models acquired information about that constraint.
    """

    sigmas: tuple[float, ...]
    alpha: float = 0.9
    form: Form = "constant"
    sigma_overrides: Mapping[DeviationConstraint, float] = field(default_factory=dict)

    def __post_init__(self):
        sig = tuple(float(s) for s in np.atleast_1d(np.asarray(self.sigmas, dtype=float)))
        if any(not np.isfinite(s) or s < 0 for s in sig):
            raise ValueError(f"sigmas must be finite and >= 0, got {sig}")
        if not 0.0 < float(self.alpha) < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}, got {self.form!r}")
        overrides = {DeviationConstraint(*c): float(s) for c, s in dict(self.sigma_overrides).items()}
        if any(s < 0 for s in overrides.values()):
            raise ValueError("sigma overrides must be >= 0")
        object.__setattr__(self, "sigmas", sig)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "sigma_overrides", overrides)

    @property
    def q(self) -> float:
        return std_normal_quantile(self.alpha)

    def constraint_sigma(self, c: DeviationConstraint) -> float:
        return self.sigma_overrides.get(c, self.sigmas[c.agent])

    def with_alpha(self, alpha: float) -> "UncertaintyModel":
        return replace(self, alpha=alpha)

    def with_sigma(self, agent: int, sigma: float) -> "UncertaintyModel":
        sig = list(self.sigmas)
        sig[agent] = sigma
        return replace(self, sigmas=tuple(sig))

    def with_overrides(self, overrides: Mapping[DeviationConstraint, float]) -> "UncertaintyModel":
        merged = dict(self.sigma_overrides)
        merged.update(overrides)
        return replace(self, sigma_overrides=merged)

    def zeroed(self, constraints) -> "UncertaintyModel":
        return self.with_overrides({c: 0.0 for c in constraints})


def nominal_model(n: int) -> UncertaintyModel:
    return UncertaintyModel(sigmas=(0.0,) * n, alpha=0.5)


def build_constraints(game: Game, model: UncertaintyModel):
    """Incentive rows as ``(ids, A, b)`` with ``A @ z <= b``, one row per id."""
    if len(model.sigmas) != game.n:
        raise ValueError(f"model has {len(model.sigmas)} sigmas, game has {game.n} agents")
    ids = game.constraints()
    q = model.q
    A = np.zeros((len(ids), game.num_profiles))
    b = np.zeros(len(ids))
    for r, c in enumerate(ids):
        row = np.zeros(game.action_counts)
        view = np.moveaxis(row, c.agent, 0)
        margin = q * model.constraint_sigma(c)
        if model.form == "constant":
            view[c.recommended] = deviation_table(game, c)
            b[r] = -margin
        else:
            view[c.recommended] = deviation_table(game, c) + margin
        A[r] = row.ravel()
    return ids, A, b


@dataclass(frozen=True, eq=False)
class CcceSolution:
    game: Game
    model: UncertaintyModel
    weights: np.ndarray
    constraints: list[DeviationConstraint]
    z: np.ndarray
    j_sys: float
    duals: np.ndarray
    slacks: np.ndarray
    degenerate: bool
    lp: lpmod.LinearProgram = field(repr=False)
    lp_solution: lpmod.LpSolution = field(repr=False)

    @property
    def active(self) -> np.ndarray:
        return self.slacks <= ACTIVE_TOL

    @property
    def active_set(self) -> set[DeviationConstraint]:
        return {c for c, a in zip(self.constraints, self.active) if a}

    @property
    def lambda_agent(self) -> np.ndarray:
        out = np.zeros(self.game.n)
        for c, lam in zip(self.constraints, self.duals):
            out[c.agent] += lam
        return out

    def dual(self, c: DeviationConstraint) -> float:
        return float(self.duals[self.constraints.index(c)])

    def constraint_sigmas(self) -> np.ndarray:
        return np.array([self.model.constraint_sigma(c) for c in self.constraints])


def coordination_lp(game: Game, model: UncertaintyModel, weights):
    ids, A, b = build_constraints(game, model)
    lp = lpmod.LinearProgram(
        objective=system_cost_vector(game, weights),
        ineq_matrix=A,
        ineq_rhs=b,
        eq_matrix=np.ones((1, game.num_profiles)),
        eq_rhs=np.ones(1),
    )
    return ids, lp


def solve_ccce(game: Game, model: UncertaintyModel, weights) -> CcceSolution:
    """Minimum weighted expected cost over the CC-CE polytope.

    Raises
    ------
    InfeasibleCcceError
        When the uncertainty margins leave no feasible distribution.
    """
    weights = np.asarray(weights, dtype=float)
    ids, lp = coordination_lp(game, model, weights)
    sol = lpmod.solve(lp)
    if sol.status is lpmod.Status.INFEASIBLE:
        raise InfeasibleCcceError(model.alpha, model.sigmas)
    if sol.status is not lpmod.Status.OPTIMAL:
        raise lpmod.LpNumericalError(f"coordination LP returned {sol.status.value}")
    z = np.maximum(sol.primal, 0.0)
    z = z / z.sum()
    return CcceSolution(
        game=game,
        model=model,
        weights=weights,
        constraints=ids,
        z=z,
        j_sys=sol.objective_value,
        duals=sol.ineq_duals,
        slacks=lpmod.ineq_slack(lp, sol.primal),
        degenerate=sol.degenerate,
        lp=lp,
        lp_solution=sol,
    )


@dataclass(frozen=True)
class Bottleneck:
    constraint: DeviationConstraint
    label: Literal["structural", "informational"]
    ratio: float
    nominal: float
    uncertainty: float


def classify_bottleneck(solution: CcceSolution, c: DeviationConstraint) -> Bottleneck:
    """Split an active constraint into structural vs. uncertainty-driven.

    ``ratio = |q| sigma_c / (|m_c(z*)| + |q| sigma_c)`` with the conditional
    nominal margin ``m_c``; a never-recommended ``x_i`` counts as ``m_c = 0``.
    """
    c = DeviationConstraint(*c)
    check_constraint(solution.game, c)
    if c not in solution.active_set:
        raise ValueError(f"constraint {c.label()} is not active")
    return _bottleneck(solution, c)


def _bottleneck(solution: CcceSolution, c: DeviationConstraint) -> Bottleneck:
    margin = nominal_margin(solution.game, solution.z, c)
    nominal = 0.0 if margin is None else margin
    unc = abs(solution.model.q) * solution.model.constraint_sigma(c)
    denom = abs(nominal) + unc
    ratio = unc / denom if denom > 0 else 0.0
    label = "informational" if ratio >= 0.5 else "structural"
    return Bottleneck(c, label, ratio, nominal, unc)
