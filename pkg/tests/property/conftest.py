"""Shared fixtures for the property tests."""

from pathlib import Path

import numpy as np
import pytest
import yaml

from scal_plus.environments import chain_env, two_cycle
from scal_plus.models import DiscreteMdp

GOLDEN_DIR = Path(__file__).parent.parent / "golden"


@pytest.fixture
def one_state_mdp() -> DiscreteMdp:
    """Single state, single action, reward 0.7."""
    return DiscreteMdp(kernel=[[[1.0]]], mean_reward=[[0.7]], r_max=1.0)


@pytest.fixture
def two_cycle_mdp() -> DiscreteMdp:
    return two_cycle()


@pytest.fixture
def chain_mdp() -> DiscreteMdp:
    return chain_env(6)


@pytest.fixture
def bandit_mdp() -> DiscreteMdp:
    """One state, two actions with rewards 0 and 1."""
    return DiscreteMdp(kernel=[[[1.0], [1.0]]], mean_reward=[[0.0, 1.0]], r_max=1.0)


@pytest.fixture
def two_state_mdp() -> DiscreteMdp:
    """Two states, two actions, dense kernels."""
    kernel = np.array(
        [
            [[0.7, 0.3], [0.2, 0.8]],
            [[0.5, 0.5], [0.9, 0.1]],
        ]
    )
    return DiscreteMdp(kernel=kernel, mean_reward=[[0.1, 0.4], [0.9, 0.3]], r_max=1.0)


@pytest.fixture
def chain_golden() -> dict:
    with open(GOLDEN_DIR / "chain_gain.yaml", encoding="utf-8") as f:
        return yaml.safe_load(f)
