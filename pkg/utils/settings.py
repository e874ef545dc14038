"""Settings resolution: command-line flag > JSON settings file > built-in default.

The settings file is sectioned like `settings_sample.json`:
data, model, tail, risk, study, output.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from Domain.RiskDomain import GarchParams, StudyConfig
from Enums import Convention, OutputFormat, SeriesFormat, StudyTarget, TailChoice, TailSide
from Exceptions import InputDataError, PreconditionError

SETTINGS_ENV_VAR = 'TAILSCALE_RISK_SETTINGS'
SECTIONS = ('data', 'model', 'tail', 'risk', 'study', 'output')


@dataclass(frozen=True)
class RunConfig:
    # data
    input: Path | None = None
    input_format: SeriesFormat = SeriesFormat.PRICE
    column: str | None = None
    date_column: str | None = None
    delimiter: str = ','
    # model
    nu: float = 4.0
    maxiter: int = 500
    ftol: float = 1e-9
    model: Path | None = None
    model_out: Path | None = None
    # tail
    tail_method: TailChoice = TailChoice.HUISMAN
    kappa: int | None = None
    hill_curve: bool = False
    # risk; levels are coverage levels, so 0.95 is the Q95 row
    levels: tuple[float, ...] = (0.95, 0.995)
    thresholds: tuple[float, ...] = (5.0, 2.0)
    horizons: tuple[int, ...] = (1, 2, 4, 5)
    benchmark: bool = True
    tail_side: TailSide = TailSide.LOWER
    # simulation and study
    seed: int = 12345
    n: int = 3700
    burn_in: int = 1000
    convention: Convention = Convention.STANDARDIZED_T
    study: StudyConfig = field(default_factory=StudyConfig)
    big_n: int = 10_000_000
    # output
    format: OutputFormat = OutputFormat.TABLE
    out: Path | None = None

    def __post_init__(self):
        for name in ('input', 'model', 'model_out', 'out'):
            value = getattr(self, name)
            if value is not None and not isinstance(value, Path):
                object.__setattr__(self, name, Path(value))
        for name, enum in (('input_format', SeriesFormat), ('tail_method', TailChoice), ('tail_side', TailSide),
                           ('convention', Convention), ('format', OutputFormat)):
            object.__setattr__(self, name, enum(getattr(self, name)))
        object.__setattr__(self, 'levels', tuple(float(v) for v in self.levels))
        object.__setattr__(self, 'thresholds', tuple(float(v) for v in self.thresholds))
        object.__setattr__(self, 'horizons', tuple(int(v) for v in self.horizons))
        if isinstance(self.study, dict):
            object.__setattr__(self, 'study', StudyConfig.from_dict(self.study))

        if not self.horizons or any(h < 1 for h in self.horizons):
            raise PreconditionError(f"horizons must all be >= 1, got {self.horizons}")
        if any(not 0.0 < level < 1.0 for level in self.levels):
            raise PreconditionError(f"levels must lie in (0, 1), got {self.levels}")
        if any(x <= 0.0 for x in self.thresholds):
            raise PreconditionError(f"thresholds must be > 0, got {self.thresholds}")
        if self.nu <= 2.0:
            raise PreconditionError(f"nu must be > 2, got {self.nu}")


def resolve_settings_path(cli_path: Path | str | None) -> Path | None:
    if cli_path:
        return Path(cli_path)
    env_path = os.environ.get(SETTINGS_ENV_VAR)
    return Path(env_path) if env_path else None


def load_settings(settings_path: Path | None) -> dict[str, dict[str, Any]]:
    if settings_path is None:
        return {}
    if not settings_path.exists():
        raise InputDataError(f"settings file not found: {settings_path}")
    try:
        with open(settings_path, 'r', encoding='utf-8') as file:
            settings = json.load(file)
    except json.JSONDecodeError as e:
        raise InputDataError(f"settings file {settings_path} is not valid JSON: {e}") from e
    unknown = set(settings) - set(SECTIONS)
    if unknown:
        logging.warning("Ignoring unknown settings section(s): %s", sorted(unknown))
    return settings


def _study_config(section: dict[str, Any], overrides: dict[str, Any]) -> StudyConfig:
    values = dict(section)
    if 'params' in values:
        values['params'] = GarchParams(**values['params'])
    for key in ('seed', 'convention', 'horizons', 'kappa'):
        if overrides.get(key) is not None:
            values[key] = overrides[key]
    if overrides.get('levels') is not None:
        values['quantile_levels'] = overrides['levels']
    if overrides.get('thresholds') is not None:
        values['probability_thresholds'] = overrides['thresholds']
    if overrides.get('nu') is not None:
        params = values.get('params', GarchParams())
        values['params'] = GarchParams(phi=params.phi, alpha0=params.alpha0, alpha1=params.alpha1,
                                       beta1=params.beta1, nu=overrides['nu'])
    if overrides.get('quick'):
        values['replications'] = 2
        values['n'] = 500
    if isinstance(values.get('target'), str):
        values['target'] = StudyTarget(values['target'])
    return StudyConfig.from_dict(values)


def build_run_config(settings: dict[str, dict[str, Any]], overrides: dict[str, Any] | None = None) -> RunConfig:
    """Flatten the settings sections, then let every non-None override win."""
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    merged: dict[str, Any] = {}
    for section in SECTIONS:
        if section != 'study':
            merged.update(settings.get(section, {}))
    merged.update(overrides)
    merged['study'] = _study_config(settings.get('study', {}), overrides)

    names = RunConfig.__dataclass_fields__.keys()
    unknown = set(merged) - set(names) - {'quick', 'verbose', 'config', 'command'}
    if unknown:
        logging.warning("Ignoring unknown setting(s): %s", sorted(unknown))
    return RunConfig(**{k: v for k, v in merged.items() if k in names})
