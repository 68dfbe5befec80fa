"""YAML run configuration with strict key checking.

Example::

    out: results/solve
    scenario: {n: 4, m: 2, gamma: 1.5, seed: 0}
    uncertainty: {alpha: 0.9, constraint_form: constant}
    experiment: {trials: 50, k_acquire: 5, c_dev: 10.0}

``game_file`` (a JSON game) may replace ``scenario`` for ``solve`` and
``nash``; it then needs explicit ``uncertainty.sigmas``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from .montecarlo import DEFAULT_ALPHA_GRID, TrialConfig
from .solver import FORMS
from .vertiport import VertiportScenario


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class UncertaintyBlock:
    alpha: float = 0.9
    alpha_grid: tuple[float, ...] | None = None
    constraint_form: str = "constant"
    sigmas: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ExperimentBlock:
    trials: int = 50
    samples_per_trial: int = 1
    k_acquire: int = 5
    c_dev: float | None = None
    alpha_grid: tuple[float, ...] | None = None


@dataclass(frozen=True)
class RunConfig:
    scenario: VertiportScenario | None = None
    game_file: Path | None = None
    uncertainty: UncertaintyBlock = field(default_factory=UncertaintyBlock)
    experiment: ExperimentBlock = field(default_factory=ExperimentBlock)
    weights: tuple[float, ...] | None = None
    out: Path = Path("results")

    @property
    def seed(self) -> int:
        return self.scenario.seed if self.scenario is not None else 0

    @property
    def alpha_grid(self) -> tuple[float, ...]:
        return self.experiment.alpha_grid or self.uncertainty.alpha_grid or DEFAULT_ALPHA_GRID

    def trial_config(self) -> TrialConfig:
        return TrialConfig(
            trials=self.experiment.trials,
            samples_per_trial=self.experiment.samples_per_trial,
            alpha_grid=self.alpha_grid,
            seed=self.seed,
            constraint_form=self.uncertainty.constraint_form,
            k_acquire=self.experiment.k_acquire,
            alpha=self.uncertainty.alpha,
        )

    def with_overrides(self, seed: int | None = None, form: str | None = None, out: str | None = None) -> "RunConfig":
        cfg = self
        if seed is not None and cfg.scenario is not None:
            cfg = replace(cfg, scenario=replace(cfg.scenario, seed=seed))
        if form is not None:
            cfg = replace(cfg, uncertainty=replace(cfg.uncertainty, constraint_form=form))
        if out is not None:
            cfg = replace(cfg, out=Path(out))
        return cfg


_REQUIRED = {"scenario": ("n", "m", "gamma")}
_TOP_KEYS = {"scenario", "game_file", "uncertainty", "experiment", "weights", "out"}
_FORM_ALIASES = {"constant": "constant", "constant-margin": "constant",
                 "conditional": "conditional", "conditional-scaled": "conditional"}


def _block(raw: Any, name: str, cls) -> Any:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"block '{name}' must be a mapping")
    allowed = {f.name for f in fields(cls)}
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in block '{name}'")
    for key in _REQUIRED.get(name, ()):
        if key not in raw:
            raise ConfigError(f"missing required key '{key}' in block '{name}'")
    values = {}
    for key, value in raw.items():
        if isinstance(value, list):
            value = tuple(value)
        values[key] = value
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"block '{name}': {exc}") from exc


def parse_config(raw: Any, base_dir: Path | None = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at top level")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown key '{key}' at top level")
    if "scenario" not in raw and "game_file" not in raw:
        raise ConfigError("config needs a 'scenario' block or a 'game_file'")
    scenario = _block(raw["scenario"], "scenario", VertiportScenario) if "scenario" in raw else None
    unc = _block(raw.get("uncertainty"), "uncertainty", UncertaintyBlock)
    form = _FORM_ALIASES.get(unc.constraint_form)
    if form is None:
        raise ConfigError(f"constraint_form must be one of {FORMS}, got {unc.constraint_form!r}")
    unc = replace(unc, constraint_form=form)
    if not 0 < unc.alpha < 1:
        raise ConfigError(f"alpha must lie in (0, 1), got {unc.alpha}")
    exp = _block(raw.get("experiment"), "experiment", ExperimentBlock)
    if exp.c_dev is not None and exp.c_dev < 0:
        raise ConfigError("c_dev must be >= 0")
    game_file = raw.get("game_file")
    if game_file is not None:
        game_file = Path(game_file)
        if base_dir is not None and not game_file.is_absolute():
            game_file = base_dir / game_file
    weights = raw.get("weights")
    cfg = RunConfig(
        scenario=scenario,
        game_file=game_file,
        uncertainty=unc,
        experiment=exp,
        weights=tuple(weights) if weights is not None else None,
        out=Path(raw.get("out", "results")),
    )
    try:
        cfg.trial_config()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return parse_config(raw, base_dir=path.parent)
