"""Configuration management for experiments.

This module handles loading and validating experiment configuration from YAML
files, command-line overrides and environment variables.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Any, Literal, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from scal_plus.bonus import BonusVariant
from scal_plus.errors import ConfigError

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class FileEnvSpec(BaseModel):
    """Discrete MDP loaded from a text file."""

    kind: Literal["file"] = "file"
    path: str
    reward_mode: Literal["bernoulli", "deterministic"] = "bernoulli"


class RandomEnvSpec(BaseModel):
    """Generated random discrete MDP."""

    kind: Literal["random"] = "random"
    num_states: int = Field(5, gt=0)
    num_actions: int = Field(2, gt=0)
    gamma: int = Field(2, gt=0)
    seed: int = Field(0, ge=0)
    r_max: float = Field(1.0, gt=0.0)
    reward_mode: Literal["bernoulli", "deterministic"] = "bernoulli"

    @model_validator(mode="after")
    def validate_gamma(self) -> RandomEnvSpec:
        if self.gamma > self.num_states:
            raise ValueError(f"gamma ({self.gamma}) cannot exceed num_states ({self.num_states})")
        return self


class TwoCycleEnvSpec(BaseModel):
    """Two-state deterministic cycle."""

    kind: Literal["two_cycle"] = "two_cycle"
    reward_mode: Literal["bernoulli", "deterministic"] = "deterministic"


class ChainEnvSpec(BaseModel):
    """River-swim chain."""

    kind: Literal["chain"] = "chain"
    num_states: int = Field(6, ge=2)
    reward_mode: Literal["bernoulli", "deterministic"] = "bernoulli"


class SmoothEnvSpec(BaseModel):
    """Continuous smooth environment on [0, 1]."""

    kind: Literal["smooth"] = "smooth"
    L: float = Field(1.0, gt=0.0)
    alpha: float = Field(1.0, gt=0.0, le=1.0)
    drift: float = Field(0.0, ge=0.0, lt=1.0)


EnvSpec = Annotated[
    Union[FileEnvSpec, RandomEnvSpec, TwoCycleEnvSpec, ChainEnvSpec, SmoothEnvSpec],
    Field(discriminator="kind"),
]

CONTINUOUS_KINDS = {"smooth"}


class AgentSpec(BaseModel):
    """Which learner to run and its parameters."""

    algorithm: Literal["scal_plus", "c_scal_plus", "uniform_random"] = "scal_plus"
    span_cap: float | None = Field(None, gt=0.0)  # None: oracle bias span
    delta: float = Field(0.05, gt=0.0, lt=1.0)
    bonus_variant: BonusVariant = BonusVariant.HOEFFDING
    capped_bonus: bool = True
    reference_state: int = Field(0, ge=0)
    holder_L: float | None = Field(None, ge=0.0)
    holder_alpha: float | None = Field(None, gt=0.0)
    num_intervals: int | None = Field(None, gt=0)
    max_planning_iter: int = Field(100_000, gt=0)
    debug: bool = False


class LoggingConfig(BaseModel):
    """Configuration for logging."""

    level: str = "INFO"
    verbose: bool = False  # also write per-episode CSVs

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        if v.upper() not in LOG_LEVELS:
            raise ValueError(f"level must be one of {', '.join(LOG_LEVELS)}")
        return v.upper()


class ExperimentConfig(BaseModel):
    """Complete configuration of one experiment.

    An experiment runs one agent on one environment for ``horizon`` steps,
    once per seed, and writes trace and summary CSVs under ``output_dir``.
    """

    environment: EnvSpec = Field(default_factory=ChainEnvSpec)
    agent: AgentSpec = Field(default_factory=AgentSpec)
    horizon: int = Field(10_000, gt=0)
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    output_dir: str | None = None
    checkpoint_stride: int = Field(1, gt=0)
    workers: int = Field(1, gt=0)
    force: bool = False
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @field_validator("seeds")
    @classmethod
    def validate_seeds(cls, v: list[int]) -> list[int]:
        if any(seed < 0 for seed in v):
            raise ValueError("seeds must be non-negative")
        if len(set(v)) != len(v):
            raise ValueError("seeds must be distinct")
        return v

    @model_validator(mode="after")
    def validate_agent_matches_environment(self) -> ExperimentConfig:
        continuous = self.environment.kind in CONTINUOUS_KINDS
        if self.agent.algorithm == "c_scal_plus" and not continuous:
            raise ValueError("c_scal_plus needs a continuous environment")
        if self.agent.algorithm == "scal_plus" and continuous:
            raise ValueError("scal_plus needs a discrete environment; use c_scal_plus")
        if continuous and self.agent.algorithm == "c_scal_plus" and self.agent.span_cap is None:
            raise ValueError("span_cap is required for continuous environments")
        return self

    @property
    def is_continuous(self) -> bool:
        return self.environment.kind in CONTINUOUS_KINDS

    @classmethod
    def from_dict(cls, data: dict[str, Any], source: str = "<config>") -> ExperimentConfig:
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"Invalid configuration in {source}: {e}") from e

    @classmethod
    def from_yaml(cls, path: str | Path, overrides: list[str] | None = None) -> ExperimentConfig:
        """Load configuration from a YAML file.

        Args:
            path: Path to the YAML configuration file.
            overrides: ``dotted.key=value`` strings applied before validation.

        Returns:
            Validated ExperimentConfig instance.

        Raises:
            FileNotFoundError: If the config file doesn't exist.
            ConfigError: If the config is empty or invalid.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")

        with open(path, encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigError(f"Malformed YAML in {path}: {e}") from e

        if data is None:
            raise ConfigError(f"Empty config file: {path}")
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a mapping")

        return cls.from_dict(apply_overrides(data, overrides or []), source=str(path))

    def with_overrides(self, overrides: list[str]) -> ExperimentConfig:
        return self.from_dict(apply_overrides(self.to_dict(), overrides), source="overrides")

    def to_dict(self) -> dict[str, Any]:
        """Convert config to a dictionary for serialization."""
        return self.model_dump(mode="json")


def apply_overrides(data: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Return a copy of ``data`` with ``dotted.key=value`` overrides applied.

    Values are parsed as YAML scalars, so ``horizon=1000`` sets an int and
    ``seeds=[1, 2]`` a list.

    Raises:
        ConfigError: If an override is not of the form ``key=value``.
    """
    result = yaml.safe_load(yaml.safe_dump(data)) or {}
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Override must look like key=value, got {item!r}")
        parts = key.strip().split(".")
        node = result
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child
        node[parts[-1]] = yaml.safe_load(raw)
    return result


class HarnessSettings(BaseSettings):
    """Process-level settings read from ``SCAL_PLUS_*`` variables and ``.env``."""

    model_config = SettingsConfigDict(env_prefix="SCAL_PLUS_", env_file=".env", extra="ignore")

    output_dir: str = "results"
    log_level: str = "INFO"


def resolve_output_dir(cfg: ExperimentConfig, settings: HarnessSettings | None = None) -> Path:
    """The config's output directory, else ``SCAL_PLUS_OUTPUT_DIR``."""
    if cfg.output_dir:
        return Path(cfg.output_dir)
    settings = settings or HarnessSettings()
    return Path(settings.output_dir)
