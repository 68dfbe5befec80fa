"""Command-line entry point: ``ccce {solve,sweep-alpha,acquire,nash} --config FILE``.

Exit codes: 0 success, 2 configuration error, 3 infeasible CC-CE.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from .analysis import REPORT_COLUMNS, optimal_alpha, report_rows, sensitivity_report
from .baselines import pure_nash_equilibria, select_ne
from .config import ConfigError, RunConfig, load_config
from .csvio import fmt, write_csv
from .game import Game, expected_system_cost, point_mass
from .montecarlo import (ACQUIRE_COLUMNS, ACQUIRE_SUMMARY_COLUMNS, SWEEP_COLUMNS, run_alpha_sweep,
                         run_info_acquisition, summary_columns)
from .solver import InfeasibleCcceError, UncertaintyModel, solve_ccce
from .vertiport import build_game, sample_sigmas, weights_from_sigmas

log = logging.getLogger("ccce")

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def instance(cfg: RunConfig) -> tuple[Game, np.ndarray, np.ndarray]:
    """Game, sigmas and weights for the single-instance commands."""
    if cfg.game_file is not None:
        try:
            game = Game.load(cfg.game_file)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load game file {cfg.game_file}: {exc}") from exc
    elif cfg.scenario is not None:
        game = build_game(cfg.scenario)
    else:
        raise ConfigError("config needs a 'scenario' block or a 'game_file'")
    if cfg.uncertainty.sigmas is not None:
        sigmas = np.asarray(cfg.uncertainty.sigmas, dtype=float)
    elif cfg.scenario is not None:
        sigmas = sample_sigmas(cfg.scenario, np.random.default_rng(cfg.seed))
    else:
        raise ConfigError("a game_file config needs uncertainty.sigmas")
    if sigmas.shape != (game.n,):
        raise ConfigError(f"uncertainty.sigmas must have {game.n} entries")
    weights = np.asarray(cfg.weights, dtype=float) if cfg.weights is not None else weights_from_sigmas(sigmas)
    if weights.shape != (game.n,):
        raise ConfigError(f"weights must have {game.n} entries")
    return game, sigmas, weights


def _model(cfg: RunConfig, sigmas, alpha: float | None = None) -> UncertaintyModel:
    return UncertaintyModel(tuple(sigmas), cfg.uncertainty.alpha if alpha is None else alpha,
                            cfg.uncertainty.constraint_form)


def _write_kv(path: Path, items: list[tuple[str, object]]) -> None:
    write_csv(path, ("key", "value"), [{"key": k, "value": v} for k, v in items])


def cmd_solve(cfg: RunConfig) -> int:
    game, sigmas, weights = instance(cfg)
    model = _model(cfg, sigmas)
    try:
        sol = solve_ccce(game, model, weights)
    except InfeasibleCcceError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    actions = [f"a{i}" for i in range(game.n)]
    rows = []
    for k, p in enumerate(np.ndindex(*game.action_counts)):
        row = {"profile": k, "probability": float(sol.z[k])}
        row.update({a: v for a, v in zip(actions, p)})
        rows.append(row)
    write_csv(out / "solution.csv", ("profile", *actions, "probability"), rows)
    write_csv(out / "duals.csv", REPORT_COLUMNS, report_rows(sol))
    rep = sensitivity_report(sol)
    items = [
        ("alpha", model.alpha), ("q_alpha", model.q), ("constraint_form", model.form),
        ("j_sys", sol.j_sys), ("active_count", len(sol.active_set)),
        ("degenerate", sol.degenerate), ("dj_dalpha", rep.dj_dalpha),
    ]
    for i in range(game.n):
        items += [(f"sigma_{i}", float(sigmas[i])), (f"weight_{i}", float(weights[i])),
                  (f"lambda_agent_{i}", float(sol.lambda_agent[i])),
                  (f"dj_dsigma_{i}", float(rep.dj_dsigma_agent[i]))]
    _write_kv(out / "summary.csv", items)
    print(f"J*_sys = {fmt(sol.j_sys)}  active = {len(sol.active_set)}  degenerate = {sol.degenerate}")
    return 0


def cmd_sweep_alpha(cfg: RunConfig) -> int:
    if cfg.scenario is None:
        raise ConfigError("sweep-alpha needs a 'scenario' block")
    tc = cfg.trial_config()
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    res = run_alpha_sweep(cfg.scenario, tc)
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, res.rows)
    write_csv(out / "sweep_summary.csv", summary_columns(), res.summary())
    infeasible = set(res.infeasible)
    feas_rows = [{"trial": t, "alpha": a, "feasible": (t, a) not in infeasible}
                 for t in range(tc.trials) for a in tc.alpha_grid]
    write_csv(out / "feasibility.csv", ("trial", "alpha", "feasible"), feas_rows)
    worst = res.smallest_infeasible_alpha()
    print(f"infeasible (trial, alpha) pairs: {len(res.infeasible)}"
          + (f"; smallest infeasible alpha = {fmt(worst)}" if worst is not None else ""))
    if res.skipped_ne:
        print(f"trials without a pure NE (excluded from NE statistics): {res.skipped_ne}")
    meds = [r["normalized_score_ratio_to_first_alpha_median"] for r in res.summary() if r["method"] == "cc_ce"]
    if len(meds) > 1 and np.all(np.isfinite(meds)) and np.ptp(meds) > 0:
        rho = spearmanr(tc.alpha_grid, meds).statistic
        print(f"CC-CE median normalized realized cost vs alpha: Spearman rho = {fmt(float(rho))}")
    if cfg.experiment.c_dev is not None:
        game, sigmas, weights = instance(cfg)
        try:
            best, curve = optimal_alpha(game, _model(cfg, sigmas), weights, cfg.experiment.c_dev, tc.alpha_grid)
        except InfeasibleCcceError as exc:
            print(f"effective cost: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
        rows = [{"alpha": a, "feasible": f, "j_sys": j, "j_eff": e, "c_dev": curve.c_dev,
                 "stationarity_residual": r, "alpha_star": best}
                for a, f, j, e, r in zip(curve.alphas, curve.feasible, curve.j_sys, curve.j_eff,
                                          curve.stationarity_residual)]
        write_csv(out / "effective_cost.csv",
                  ("alpha", "feasible", "j_sys", "j_eff", "c_dev", "stationarity_residual", "alpha_star"), rows)
        print(f"alpha* = {fmt(best)}; residual sign changes in {curve.sign_change_brackets()}")
    return 0


def cmd_acquire(cfg: RunConfig) -> int:
    if cfg.scenario is None:
        raise ConfigError("acquire needs a 'scenario' block")
    tc = cfg.trial_config()
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    res = run_info_acquisition(cfg.scenario, tc)
    write_csv(out / "acquire.csv", ACQUIRE_COLUMNS, res.rows)
    summary = res.summary()
    write_csv(out / "acquire_summary.csv", ACQUIRE_SUMMARY_COLUMNS, summary)
    for row in summary:
        print(f"{row['strategy']:>13}: mean normalized cost {fmt(row['mean'])} (sem {fmt(row['sem'])})")
    if res.infeasible:
        print(f"trials without a CC-CE (skipped): {res.infeasible}")
    return 0


def cmd_nash(cfg: RunConfig) -> int:
    game, _, weights = instance(cfg)
    ne = pure_nash_equilibria(game)
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    rows = [{"profile": game.profile_index(p), "actions": " ".join(map(str, p)),
             "system_cost": expected_system_cost(game, point_mass(game, p), weights)} for p in ne]
    write_csv(out / "nash.csv", ("profile", "actions", "system_cost"), rows)
    print(f"{len(ne)} pure Nash equilibria")
    for r in rows:
        print(f"  ({r['actions']})  weighted cost {fmt(r['system_cost'])}")
    if ne:
        pick = select_ne(ne, np.random.default_rng(cfg.seed))
        cost = expected_system_cost(game, point_mass(game, pick), weights)
        print(f"selected NE {pick}: weighted cost {fmt(cost)}")
    return 0


COMMANDS = {"solve": cmd_solve, "sweep-alpha": cmd_sweep_alpha, "acquire": cmd_acquire, "nash": cmd_nash}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ccce", description="Chance-constrained correlated equilibria")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", help="output directory (overrides config 'out')")
    p.add_argument("--seed", type=int, help="overrides scenario.seed")
    p.add_argument("--form", choices=("constant", "conditional"), help="constraint form override")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config).with_overrides(seed=args.seed, form=args.form, out=args.out)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
