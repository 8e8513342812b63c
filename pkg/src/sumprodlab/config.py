"""Experiment configuration: key=value files plus flag overrides."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ConfigError

DEFAULT_LEVELS = (12,)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved settings for one driver run."""

    family: str = ""
    eta: float = 0.3
    delta_levels: tuple[int, ...] = DEFAULT_LEVELS
    sigma: float = 0.05
    guard: int = 6
    budget_cells: int = 10 ** 8
    seed: int = 0
    trials: int = 1000
    output_path: str = ""

    def __post_init__(self):
        if not self.delta_levels:
            raise ConfigError("levels: at least one level is required")
        for lv in self.delta_levels:
            if not 4 <= lv <= 24:
                raise ConfigError(f"levels: each level must lie in [4, 24], got {lv}")
        if not 0.0 < self.eta < 1.0:
            raise ConfigError(f"eta: must lie in (0, 1), got {self.eta}")
        if self.guard < 4:
            raise ConfigError(f"guard: must be >= 4, got {self.guard}")
        if not 0.0 <= self.sigma < 1.0:
            raise ConfigError(f"sigma: must lie in [0, 1), got {self.sigma}")
        if self.budget_cells < 1:
            raise ConfigError("budget_cells: must be positive")
        if self.trials < 1:
            raise ConfigError("trials: must be positive")

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        clean = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **clean)


_KEYS = {
    "family": ("family", str),
    "eta": ("eta", float),
    "levels": ("delta_levels", None),
    "sigma": ("sigma", float),
    "guard": ("guard", int),
    "budget_cells": ("budget_cells", int),
    "seed": ("seed", int),
    "trials": ("trials", int),
    "out": ("output_path", str),
}


def parse_levels(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"levels: not a comma-separated integer list: {text!r}") from exc


def parse_config(text: str, require_family: bool = True) -> ExperimentConfig:
    """Parse ``key=value`` lines (blank lines and # comments allowed).

    Unknown keys, malformed values and range violations raise
    :class:`ConfigError` naming the offending line or field.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        field_name, caster = _KEYS[key]
        try:
            values[field_name] = parse_levels(val) if caster is None else caster(val)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    cfg = ExperimentConfig(**values)
    if require_family and not cfg.family:
        raise ConfigError("family: required but not given")
    return cfg
