"""Chance-constrained correlated equilibria for multi-agent coordination."""

from .analysis import (alpha_sensitivity, constraint_sensitivity, effective_cost, info_gain, info_gains,
                       optimal_alpha, rank_for_acquisition, sensitivity_report, sigma_sensitivity)
from .baselines import naive_ce, pure_nash_equilibria, select_ne
from .game import DeviationConstraint, Game
from .gaussian import std_normal_cdf, std_normal_pdf, std_normal_quantile
from .lp import LinearProgram, LpSolution, Status, solve
from .solver import CcceSolution, InfeasibleCcceError, UncertaintyModel, classify_bottleneck, solve_ccce
from .vertiport import VertiportScenario, build_game

__all__ = [
    "CcceSolution", "DeviationConstraint", "Game", "InfeasibleCcceError", "LinearProgram", "LpSolution",
    "Status", "UncertaintyModel", "VertiportScenario", "alpha_sensitivity", "build_game",
    "classify_bottleneck", "constraint_sensitivity", "effective_cost", "info_gain", "info_gains",
    "naive_ce", "optimal_alpha", "pure_nash_equilibria", "rank_for_acquisition", "select_ne",
    "sensitivity_report", "sigma_sensitivity", "solve", "solve_ccce", "std_normal_cdf",
    "std_normal_pdf", "std_normal_quantile",
]
