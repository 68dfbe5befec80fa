"""Monte Carlo evaluation of coordination under noisy deviation costs.

A coordinator samples a joint recommendation from ``z``; every agent then
compares its conditional deviation margins, shifted by its own noise draw
``eta_i ~ N(0, sigma_i^2)``, and switches to its most profitable deviation if
that margin is positive. All agents respond simultaneously.

Seeding: trial ``t`` uses ``numpy.random.default_rng([seed, t])`` and draws,
in order, the sigmas, the NE pick, the recommendation uniforms and the noise.
Every method and every alpha of a trial reuses the same uniforms and noise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analysis import STRATEGIES, rank_for_acquisition
from .baselines import NoPureNashError, naive_ce, pure_nash_equilibria, select_ne
from .game import DeviationConstraint, Game, margin_tables, nominal_margin, point_mass, system_cost_vector
from .solver import FORMS, InfeasibleCcceError, UncertaintyModel, solve_ccce
from .vertiport import VertiportScenario, build_game, sample_sigmas, weights_from_sigmas

log = logging.getLogger(__name__)

DEFAULT_ALPHA_GRID = (0.75, 0.80, 0.85, 0.90, 0.95, 0.99)
METHODS = ("ne", "naive_ce", "cc_ce")


@dataclass(frozen=True)
class TrialConfig:
    trials: int = 50
    samples_per_trial: int = 1
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    seed: int = 0
    constraint_form: str = "constant"
    k_acquire: int = 5
    alpha: float = 0.9

    def __post_init__(self):
        grid = tuple(float(a) for a in self.alpha_grid)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.samples_per_trial < 1:
            raise ValueError("samples_per_trial must be >= 1")
        if not grid or any(not 0 < a < 1 for a in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError(f"alpha_grid must be increasing inside (0, 1), got {grid}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.constraint_form not in FORMS:
            raise ValueError(f"constraint_form must be one of {FORMS}")
        if self.k_acquire < 0:
            raise ValueError("k_acquire must be >= 0")
        object.__setattr__(self, "alpha_grid", grid)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(trial)])


def sample_profile_indices(z, u) -> np.ndarray:
    """Inverse-CDF lookup of uniforms ``u`` in the lexicographic profile order."""
    cdf = np.cumsum(np.asarray(z, dtype=float))
    idx = np.searchsorted(cdf, np.asarray(u) * cdf[-1], side="right")
    return np.minimum(idx, len(cdf) - 1)


def sample_recommendation(game: Game, z, rng: np.random.Generator) -> tuple[int, ...]:
    return game.profile(int(sample_profile_indices(z, rng.random())))


def agent_response(game: Game, z, profile: Sequence[int], eta, tables=None) -> tuple[int, ...]:
    """Joint action actually played after every agent reacts to its recommendation.

    ``tables`` may carry precomputed :func:`margin_tables` for ``z``.
    """
    if tables is None:
        tables = margin_tables(game, z)
    out = list(profile)
    for i, rec in enumerate(profile):
        row = tables[i][rec]
        if np.isnan(row).any():
            continue  # never-recommended action: nothing to compare against
        perturbed = np.delete(row, rec) + eta[i]
        if perturbed.size and perturbed.max() > 0:
            j = int(np.argmax(perturbed))
            out[i] = j if j < rec else j + 1
    return tuple(out)


def deviation_frequency(game: Game, z, c: DeviationConstraint, sigma: float, draws: int, rng: np.random.Generator) -> float | None:
    """Share of noise draws under which deviating along ``c`` is profitable."""
    m = nominal_margin(game, z, c)
    if m is None:
        return None
    eta = rng.standard_normal(draws) * sigma
    return float(np.mean(m + eta > 0))


@dataclass(frozen=True)
class Evaluation:
    expected_cost: float
    realized_cost: float
    realized_cost_unweighted: float
    deviation_rate: float


def evaluate(game: Game, z, weights, u, eta) -> Evaluation:
    """Expected and sample-averaged realized cost of recommending from ``z``."""
    z = np.asarray(z, dtype=float)
    cost_w = system_cost_vector(game, weights)
    cost_u = game.costs.sum(axis=0)
    tables = margin_tables(game, z)
    realized_w, realized_u, deviated = [], [], 0
    for idx, e in zip(sample_profile_indices(z, u), eta):
        rec = game.profile(int(idx))
        played = agent_response(game, z, rec, e, tables)
        deviated += sum(a != b for a, b in zip(rec, played))
        k = game.profile_index(played)
        realized_w.append(cost_w[k])
        realized_u.append(cost_u[k])
    return Evaluation(
        expected_cost=float(z @ cost_w),
        realized_cost=float(np.mean(realized_w)),
        realized_cost_unweighted=float(np.mean(realized_u)),
        deviation_rate=deviated / (len(realized_w) * game.n),
    )


SWEEP_COLUMNS = ("trial", "alpha", "method", "expected_cost", "realized_cost",
                 "realized_cost_unweighted", "normalized_score_ratio_to_first_alpha",
                 "deviation_rate", "feasible")
SUMMARY_STATS = ("mean", "median", "q25", "q75")


@dataclass
class SweepResult:
    rows: list[dict] = field(default_factory=list)
    infeasible: list[tuple[int, float]] = field(default_factory=list)
    skipped_ne: list[int] = field(default_factory=list)

    def values(self, method: str, alpha: float, column: str) -> np.ndarray:
        return np.array([r[column] for r in self.rows
                         if r["method"] == method and r["alpha"] == alpha and r["feasible"]], dtype=float)

    def summary(self) -> list[dict]:
        out = []
        alphas = sorted({r["alpha"] for r in self.rows})
        for a in alphas:
            for method in METHODS:
                row = {"alpha": a, "method": method}
                vals = {col: self.values(method, a, col)
                        for col in ("expected_cost", "realized_cost", "normalized_score_ratio_to_first_alpha")}
                row["n"] = len(vals["realized_cost"])
                for col, v in vals.items():
                    v = v[np.isfinite(v)]
                    for stat, fn in zip(SUMMARY_STATS, (np.mean, np.median, lambda x: np.quantile(x, 0.25), lambda x: np.quantile(x, 0.75))):
                        row[f"{col}_{stat}"] = float(fn(v)) if v.size else float("nan")
                out.append(row)
        return out

    def smallest_infeasible_alpha(self) -> float | None:
        return min((a for _, a in self.infeasible), default=None)


def summary_columns() -> tuple[str, ...]:
    cols = ["alpha", "method", "n"]
    for col in ("expected_cost", "realized_cost", "normalized_score_ratio_to_first_alpha"):
        cols += [f"{col}_{s}" for s in SUMMARY_STATS]
    return tuple(cols)


def _trial_draws(scenario: VertiportScenario, config: TrialConfig, trial: int, ne_set):
    rng = trial_rng(config.seed, trial)
    sigmas = sample_sigmas(scenario, rng)
    ne = select_ne(ne_set, rng) if ne_set else None
    u = rng.random(config.samples_per_trial)
    eta = rng.standard_normal((config.samples_per_trial, scenario.n)) * sigmas
    return rng, sigmas, ne, u, eta


def run_alpha_sweep(scenario: VertiportScenario, config: TrialConfig, game: Game | None = None) -> SweepResult:
    """NE, naive CE and CC-CE per trial and alpha, evaluated on shared noise."""
    game = build_game(scenario) if game is None else game
    ne_set = pure_nash_equilibria(game)
    result = SweepResult()
    for t in range(config.trials):
        _, sigmas, ne, u, eta = _trial_draws(scenario, config, t, ne_set)
        weights = weights_from_sigmas(sigmas)
        evals = {}
        if ne is None:
            result.skipped_ne.append(t)
            log.warning("trial %d: no pure NE, excluded from NE statistics", t)
        else:
            evals["ne"] = evaluate(game, point_mass(game, ne), weights, u, eta)
        evals["naive_ce"] = evaluate(game, naive_ce(game, weights).z, weights, u, eta)
        per_alpha = {}
        for a in config.alpha_grid:
            model = UncertaintyModel(tuple(sigmas), a, config.constraint_form)
            try:
                per_alpha[a] = evaluate(game, solve_ccce(game, model, weights).z, weights, u, eta)
            except InfeasibleCcceError:
                result.infeasible.append((t, a))
                log.warning("trial %d: no CC-CE at alpha=%.4g", t, a)
        ref = {m: e.realized_cost for m, e in evals.items()}
        first = config.alpha_grid[0]
        ref["cc_ce"] = per_alpha[first].realized_cost if first in per_alpha else float("nan")
        for a in config.alpha_grid:
            for method in METHODS:
                ev = per_alpha.get(a) if method == "cc_ce" else evals.get(method)
                row = {"trial": t, "alpha": a, "method": method}
                if ev is None:
                    row.update(expected_cost=float("nan"), realized_cost=float("nan"),
                               realized_cost_unweighted=float("nan"),
                               normalized_score_ratio_to_first_alpha=float("nan"),
                               deviation_rate=float("nan"), feasible=False)
                else:
                    r0 = ref[method]
                    row.update(expected_cost=ev.expected_cost, realized_cost=ev.realized_cost,
                               realized_cost_unweighted=ev.realized_cost_unweighted,
                               normalized_score_ratio_to_first_alpha=ev.realized_cost / r0 if r0 > 0 else float("nan"),
                               deviation_rate=ev.deviation_rate, feasible=True)
                result.rows.append(row)
    return result


ACQUIRE_COLUMNS = ("trial", "strategy", "normalized_cost", "expected_cost", "baseline_cost", "selected")


@dataclass
class AcquisitionResult:
    rows: list[dict] = field(default_factory=list)
    infeasible: list[int] = field(default_factory=list)

    def normalized(self, strategy: str) -> np.ndarray:
        return np.array([r["normalized_cost"] for r in self.rows if r["strategy"] == strategy])

    def summary(self) -> list[dict]:
        out = []
        for s in STRATEGIES:
            v = self.normalized(s)
            out.append({
                "strategy": s,
                "n": v.size,
                "mean": float(np.mean(v)) if v.size else float("nan"),
                "sem": float(np.std(v, ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("nan"),
                "median": float(np.median(v)) if v.size else float("nan"),
                "q25": float(np.quantile(v, 0.25)) if v.size else float("nan"),
                "q75": float(np.quantile(v, 0.75)) if v.size else float("nan"),
            })
        return out


ACQUIRE_SUMMARY_COLUMNS = ("strategy", "n", "mean", "sem", "median", "q25", "q75")


def run_info_acquisition(scenario: VertiportScenario, config: TrialConfig, game: Game | None = None) -> AcquisitionResult:
    """Remove the uncertainty of ``k_acquire`` constraints per strategy and re-solve once."""
    game = build_game(scenario) if game is None else game
    n_constraints = len(game.constraints())
    if config.k_acquire > n_constraints:
        raise ValueError(f"k_acquire={config.k_acquire} exceeds {n_constraints} constraints")
    result = AcquisitionResult()
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        sigmas = sample_sigmas(scenario, rng)
        weights = weights_from_sigmas(sigmas)
        model = UncertaintyModel(tuple(sigmas), config.alpha, config.constraint_form)
        try:
            base = solve_ccce(game, model, weights)
        except InfeasibleCcceError:
            result.infeasible.append(t)
            log.warning("trial %d: no CC-CE at alpha=%.4g", t, config.alpha)
            continue
        for strategy in STRATEGIES:
            picks = rank_for_acquisition(base, config.k_acquire, strategy, rng)
            j = solve_ccce(game, model.zeroed(picks), weights).j_sys if picks else base.j_sys
            result.rows.append({
                "trial": t,
                "strategy": strategy,
                "normalized_cost": j / base.j_sys if base.j_sys != 0 else 1.0,
                "expected_cost": j,
                "baseline_cost": base.j_sys,
                "selected": ";".join(c.label() for c in picks),
            })
    return result
