"""Property-based tests for experiment configuration.

These tests verify that configuration validation correctly accepts
valid configs and rejects invalid ones.
"""

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from scal_plus.config import (
    AgentSpec,
    ExperimentConfig,
    HarnessSettings,
    RandomEnvSpec,
    apply_overrides,
    resolve_output_dir,
)
from scal_plus.errors import ConfigError

CONFIG_DIR = Path(__file__).parent.parent.parent / "config"


# **Feature: span-constrained-exploration, Property 7: Configuration validation**
class TestConfigurationValidation:
    """Property 7: Configuration validation.

    *For any* configuration with invalid values (non-positive horizon or span
    cap, delta outside (0, 1), duplicated seeds), loading SHALL raise a
    validation error with a descriptive message.
    """

    @given(st.integers(max_value=0))
    @settings(max_examples=100)
    def test_non_positive_horizon_rejected(self, horizon: int) -> None:
        with pytest.raises(ValidationError, match="greater than 0"):
            ExperimentConfig(horizon=horizon)

    @given(st.floats(max_value=0.0, allow_nan=False))
    @settings(max_examples=100)
    def test_non_positive_span_cap_rejected(self, cap: float) -> None:
        with pytest.raises(ValidationError, match="greater than 0"):
            AgentSpec(span_cap=cap)

    @given(st.one_of(st.floats(max_value=0.0), st.floats(min_value=1.0)))
    @settings(max_examples=100)
    def test_delta_outside_unit_interval_rejected(self, delta: float) -> None:
        with pytest.raises(ValidationError):
            AgentSpec(delta=delta)

    @given(
        st.integers(min_value=1, max_value=10**7),
        st.lists(st.integers(0, 1000), min_size=1, max_size=10, unique=True),
    )
    @settings(max_examples=100)
    def test_valid_config_accepted(self, horizon: int, seeds: list[int]) -> None:
        cfg = ExperimentConfig(horizon=horizon, seeds=seeds)
        assert cfg.horizon == horizon
        assert cfg.seeds == seeds

    def test_duplicate_seeds_rejected(self) -> None:
        with pytest.raises(ValidationError, match="distinct"):
            ExperimentConfig(seeds=[1, 1])

    def test_gamma_above_num_states_rejected(self) -> None:
        with pytest.raises(ValidationError, match="gamma"):
            RandomEnvSpec(num_states=3, gamma=4)

    def test_algorithm_must_match_environment(self) -> None:
        with pytest.raises(ValidationError, match="continuous environment"):
            ExperimentConfig(agent={"algorithm": "c_scal_plus", "span_cap": 1.0})
        with pytest.raises(ValidationError, match="discrete environment"):
            ExperimentConfig(environment={"kind": "smooth"}, agent={"algorithm": "scal_plus"})
        with pytest.raises(ValidationError, match="span_cap is required"):
            ExperimentConfig(environment={"kind": "smooth"}, agent={"algorithm": "c_scal_plus"})

    def test_log_level_normalized(self) -> None:
        cfg = ExperimentConfig(logging={"level": "debug"})
        assert cfg.logging.level == "DEBUG"
        with pytest.raises(ValidationError, match="level must be one of"):
            ExperimentConfig(logging={"level": "LOUD"})


class TestConfigFiles:
    def test_missing_config_file_raises_error(self, tmp_path) -> None:
        with pytest.raises(FileNotFoundError, match="Config file not found"):
            ExperimentConfig.from_yaml(tmp_path / "nonexistent.yaml")

    def test_empty_config_file_raises_error(self, tmp_path) -> None:
        empty_file = tmp_path / "empty.yaml"
        empty_file.write_text("")
        with pytest.raises(ConfigError, match="Empty config file"):
            ExperimentConfig.from_yaml(empty_file)

    def test_malformed_yaml_raises_error(self, tmp_path) -> None:
        bad_file = tmp_path / "bad.yaml"
        bad_file.write_text("horizon: [1, 2\n")
        with pytest.raises(ConfigError, match="Malformed YAML"):
            ExperimentConfig.from_yaml(bad_file)

    def test_invalid_values_raise_error(self, tmp_path) -> None:
        invalid_file = tmp_path / "invalid.yaml"
        invalid_file.write_text("horizon: -10\n")
        with pytest.raises(ConfigError, match="Invalid configuration"):
            ExperimentConfig.from_yaml(invalid_file)

    def test_non_mapping_rejected(self, tmp_path) -> None:
        list_file = tmp_path / "list.yaml"
        list_file.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping"):
            ExperimentConfig.from_yaml(list_file)

    @pytest.mark.parametrize("name", ["default.yaml", "smooth.yaml", "random_baseline.yaml"])
    def test_shipped_configs_load(self, name: str) -> None:
        cfg = ExperimentConfig.from_yaml(CONFIG_DIR / name)
        assert cfg.horizon > 0

    def test_overrides_applied_before_validation(self) -> None:
        cfg = ExperimentConfig.from_yaml(
            CONFIG_DIR / "default.yaml",
            ["horizon=500", "seeds=[3, 4]", "agent.span_cap=2.5", "environment.num_states=4"],
        )
        assert cfg.horizon == 500
        assert cfg.seeds == [3, 4]
        assert cfg.agent.span_cap == 2.5
        assert cfg.environment.num_states == 4

    def test_bad_override_rejected(self) -> None:
        with pytest.raises(ConfigError, match="key=value"):
            apply_overrides({}, ["horizon"])

    def test_override_creates_nested_keys(self) -> None:
        data = apply_overrides({"horizon": 1}, ["agent.delta=0.1"])
        assert data == {"horizon": 1, "agent": {"delta": 0.1}}

    def test_to_dict_round_trip(self) -> None:
        cfg = ExperimentConfig(environment={"kind": "random", "num_states": 4, "gamma": 2})
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


class TestSettings:
    def test_env_var_output_dir(self, monkeypatch, tmp_path) -> None:
        monkeypatch.setenv("SCAL_PLUS_OUTPUT_DIR", str(tmp_path / "env-out"))
        assert resolve_output_dir(ExperimentConfig(), HarnessSettings()) == tmp_path / "env-out"

    def test_config_wins_over_settings(self, tmp_path) -> None:
        cfg = ExperimentConfig(output_dir=str(tmp_path / "cfg-out"))
        settings_ = HarnessSettings(output_dir="elsewhere")
        assert resolve_output_dir(cfg, settings_) == tmp_path / "cfg-out"
