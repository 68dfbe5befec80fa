"""Dual-based sensitivity of the CC-CE optimum and value-of-information ranking.

All derivatives here are exact for the ``constant`` constraint form, where the
uncertainty margin ``q(alpha) * sigma_c`` is a right-hand side of the LP:

* ``dJ*/dsigma_i = q(alpha) * Lambda_i`` with ``Lambda_i`` the sum of agent i's duals,
* ``dJ*/dsigma_c = q(alpha) * lambda_c`` per constraint,
* ``dJ*/dalpha = sum_c sigma_c lambda_c / phi(q(alpha))``.

At a degenerate basis the duals are one of several subgradients; results then
carry ``one_sided=True`` and a :class:`OneSidedSensitivityWarning` is issued.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal

import numpy as np

from .csvio import write_csv
from .game import DeviationConstraint, Game
from .gaussian import std_normal_pdf
from .solver import CcceSolution, InfeasibleCcceError, UncertaintyModel, _bottleneck, solve_ccce

Strategy = Literal["random", "shadow_price", "infogain"]
STRATEGIES: tuple[Strategy, ...] = ("random", "shadow_price", "infogain")


class OneSidedSensitivityWarning(UserWarning):
    """Sensitivity evaluated at a degenerate LP basis."""


def _warn_if_degenerate(solution: CcceSolution) -> None:
    if solution.degenerate:
        warnings.warn(
            "degenerate LP optimum: dual-based sensitivities are one-sided",
            OneSidedSensitivityWarning,
            stacklevel=3,
        )


def sigma_sensitivity(solution: CcceSolution, agent: int) -> float:
    _warn_if_degenerate(solution)
    return solution.model.q * float(solution.lambda_agent[agent])


def constraint_sensitivity(solution: CcceSolution, c: DeviationConstraint) -> float:
    _warn_if_degenerate(solution)
    return solution.model.q * solution.dual(DeviationConstraint(*c))


def info_gain(solution: CcceSolution, c: DeviationConstraint) -> float:
    c = DeviationConstraint(*c)
    return solution.model.constraint_sigma(c) * solution.dual(c)


def info_gains(solution: CcceSolution) -> np.ndarray:
    """InfoGain for every constraint, aligned with ``solution.constraints``."""
    return solution.constraint_sigmas() * solution.duals


def alpha_sensitivity(solution: CcceSolution) -> float:
    """dJ*/dalpha from the aggregate information gain.

    Without per-constraint overrides this equals ``sum_i Lambda_i sigma_i /
    phi(q)``; the two groupings are checked against each other.
    """
    _warn_if_degenerate(solution)
    total = math.fsum(info_gains(solution))
    if not solution.model.sigma_overrides:
        by_agent = math.fsum(np.asarray(solution.model.sigmas) * solution.lambda_agent)
        if not math.isclose(by_agent, total, rel_tol=1e-12, abs_tol=1e-12):
            raise AssertionError(f"agent-grouped {by_agent!r} != constraint-grouped {total!r}")
    return total / std_normal_pdf(solution.model.q)


@dataclass(frozen=True)
class SensitivityReport:
    constraints: list[DeviationConstraint]
    dj_dsigma_agent: np.ndarray
    dj_dsigma_constraint: np.ndarray
    dj_dalpha: float
    infogain: np.ndarray
    one_sided: bool


def sensitivity_report(solution: CcceSolution) -> SensitivityReport:
    q = solution.model.q
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OneSidedSensitivityWarning)
        dalpha = alpha_sensitivity(solution)
    return SensitivityReport(
        constraints=list(solution.constraints),
        dj_dsigma_agent=q * solution.lambda_agent,
        dj_dsigma_constraint=q * solution.duals,
        dj_dalpha=dalpha,
        infogain=info_gains(solution),
        one_sided=solution.degenerate,
    )


def effective_cost(j_sys: float, alpha: float, c_dev: float) -> float:
    """System cost plus the expected loss from deviations, ``(1 - alpha) * c_dev``."""
    if c_dev < 0:
        raise ValueError(f"c_dev must be >= 0, got {c_dev}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return j_sys + (1.0 - alpha) * c_dev


@dataclass(frozen=True)
class EffectiveCostCurve:
    alphas: np.ndarray
    feasible: np.ndarray
    j_sys: np.ndarray
    j_eff: np.ndarray
    c_dev: float
    stationarity_residual: np.ndarray
    best_alpha: float

    def sign_change_brackets(self) -> list[tuple[float, float]]:
        """Adjacent feasible grid pairs across which the residual changes sign."""
        idx = np.flatnonzero(self.feasible)
        out = []
        for a, b in zip(idx[:-1], idx[1:]):
            ra, rb = self.stationarity_residual[a], self.stationarity_residual[b]
            if ra == 0 or rb == 0 or (ra < 0) != (rb < 0):
                out.append((float(self.alphas[a]), float(self.alphas[b])))
        return out


def optimal_alpha(game: Game, model: UncertaintyModel, weights, c_dev: float, alpha_grid) -> tuple[float, EffectiveCostCurve]:
    """Grid minimiser of the effective cost; ``model.alpha`` is ignored.

    Infeasible grid points are kept in the curve as NaN. Ties go to the
    smaller alpha.
    """
    if c_dev < 0:
        raise ValueError(f"c_dev must be >= 0, got {c_dev}")
    alphas = np.asarray(alpha_grid, dtype=float)
    if alphas.ndim != 1 or alphas.size == 0 or np.any(np.diff(alphas) <= 0):
        raise ValueError("alpha_grid must be a non-empty increasing sequence")
    if np.any(alphas <= 0) or np.any(alphas >= 1):
        raise ValueError("alpha_grid must lie in (0, 1)")
    j_sys = np.full(alphas.size, np.nan)
    resid = np.full(alphas.size, np.nan)
    for k, a in enumerate(alphas):
        try:
            sol = solve_ccce(game, model.with_alpha(a), weights)
        except InfeasibleCcceError:
            continue
        j_sys[k] = sol.j_sys
        resid[k] = math.fsum(info_gains(sol)) / std_normal_pdf(sol.model.q) - c_dev
    feasible = np.isfinite(j_sys)
    if not feasible.any():
        raise InfeasibleCcceError(alphas[0], model.sigmas)
    j_eff = np.where(feasible, j_sys + (1.0 - alphas) * c_dev, np.nan)
    best = np.nanmin(j_eff)
    tol = 1e-12 * (1.0 + abs(best))
    k_best = int(np.flatnonzero(feasible & (j_eff <= best + tol))[0])
    curve = EffectiveCostCurve(alphas, feasible, j_sys, j_eff, float(c_dev), resid, float(alphas[k_best]))
    return curve.best_alpha, curve


def rank_for_acquisition(solution: CcceSolution, k: int, strategy: Strategy, rng: np.random.Generator | None = None) -> list[DeviationConstraint]:
    """Pick ``k`` constraints whose uncertainty to remove.

    ``shadow_price`` ranks by lambda_c, ``infogain`` by sigma_c * lambda_c,
    ``random`` draws uniformly without replacement. Score ties fall back to
    constraint-id order.
    """
    ids = solution.constraints
    if not 0 <= k <= len(ids):
        raise ValueError(f"k must lie in [0, {len(ids)}], got {k}")
    if strategy == "random":
        if rng is None:
            raise ValueError("random strategy needs an rng")
        picks = rng.choice(len(ids), size=k, replace=False)
        return [ids[p] for p in picks]
    if strategy == "shadow_price":
        scores = solution.duals
    elif strategy == "infogain":
        scores = info_gains(solution)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    # roundoff-level scores count as exact zeros so that ties fall back to id order
    scores = np.where(scores <= 1e-12 * max(1.0, float(np.max(scores, initial=0.0))), 0.0, scores)
    order = sorted(range(len(ids)), key=lambda r: (-scores[r], ids[r]))
    return [ids[r] for r in order[:k]]


def zero_uncertainty(game: Game, solution: CcceSolution, constraints: Iterable[DeviationConstraint]) -> CcceSolution:
    """Re-solve with the margins of ``constraints`` removed."""
    return solve_ccce(game, solution.model.zeroed(constraints), solution.weights)


def zero_agent_uncertainty(game: Game, solution: CcceSolution, agent: int) -> CcceSolution:
    return solve_ccce(game, solution.model.with_sigma(agent, 0.0), solution.weights)


REPORT_COLUMNS = ("agent", "recommended", "deviation", "lambda", "sigma", "infogain",
                  "dj_dsigma_c", "active", "bottleneck", "rho")


def report_rows(solution: CcceSolution) -> list[dict]:
    gains = info_gains(solution)
    sig = solution.constraint_sigmas()
    q = solution.model.q
    rows = []
    for r, c in enumerate(solution.constraints):
        active = bool(solution.active[r])
        if active:
            bn = _bottleneck(solution, c)
            label, rho = bn.label, bn.ratio
        else:
            label, rho = "", float("nan")
        rows.append({
            "agent": c.agent,
            "recommended": c.recommended,
            "deviation": c.deviation,
            "lambda": float(solution.duals[r]),
            "sigma": float(sig[r]),
            "infogain": float(gains[r]),
            "dj_dsigma_c": q * float(solution.duals[r]),
            "active": int(active),
            "bottleneck": label,
            "rho": rho,
        })
    return rows


def write_report(solution: CcceSolution, path: str | Path) -> None:
    write_csv(path, REPORT_COLUMNS, report_rows(solution))
