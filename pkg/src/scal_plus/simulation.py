"""The agent/environment interaction loop."""

from __future__ import annotations

from typing import Any

import numpy as np
import structlog

from scal_plus.interfaces import Agent, Environment
from scal_plus.streams import make_stream
from scal_plus.trace import RegretTrace

logger = structlog.get_logger(__name__)


def simulate(env: Environment[Any], agent: Agent[Any], horizon: int, seed: int) -> RegretTrace:
    """Run ``horizon`` steps of ``agent`` on ``env``.

    Environment randomness comes from the "env" stream of ``seed``; the agent
    owns its own stream. The recorded state is ``agent.encode_state(s)`` and
    the recorded episode is the agent's episode after choosing the action.

    Raises:
        ValueError: If ``horizon`` < 1.
        PlanningError: Propagated from the agent.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    rng = make_stream(seed, "env")
    states = np.empty(horizon, dtype=np.int64)
    actions = np.empty(horizon, dtype=np.int64)
    rewards = np.empty(horizon, dtype=float)
    episodes = np.empty(horizon, dtype=np.int64)

    state = env.initial_state()
    for i in range(horizon):
        action = agent.act(state)
        reward, next_state = env.step(state, action, rng)
        states[i] = agent.encode_state(state)
        actions[i] = action
        rewards[i] = reward
        episodes[i] = agent.episode_index
        agent.observe(state, action, reward, next_state)
        state = next_state

    trace = RegretTrace(
        optimal_gain=env.optimal_gain,
        states=states,
        actions=actions,
        rewards=rewards,
        episodes=episodes,
    )
    logger.debug("simulation_done", seed=seed, horizon=horizon, regret=trace.final_regret())
    return trace
