"""Abstract interfaces for environments and learning agents.

The simulation loop in :mod:`scal_plus.harness` only talks to these
abstractions, so discrete and continuous environments, optimistic agents and
baselines are interchangeable.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Generic, TypeVar

import numpy as np

StateT = TypeVar("StateT", int, float)


class Environment(ABC, Generic[StateT]):
    """A reward-generating Markov environment.

    Implementations must draw all their randomness from the generator passed
    to :meth:`step` so that a run is reproducible from its seed.
    """

    num_actions: int
    r_max: float

    @abstractmethod
    def initial_state(self) -> StateT:
        """State at t = 1."""
        pass

    @abstractmethod
    def step(self, state: StateT, action: int, rng: np.random.Generator) -> tuple[float, StateT]:
        """Sample (reward, next_state) for taking ``action`` in ``state``."""
        pass

    @property
    @abstractmethod
    def optimal_gain(self) -> float:
        """g* used for regret."""
        pass


class Agent(ABC, Generic[StateT]):
    """A learner interacting with an environment one step at a time.

    ``act`` and ``observe`` strictly alternate; an instance is not shared
    between threads.
    """

    @abstractmethod
    def act(self, state: StateT) -> int:
        """Choose the action for ``state``."""
        pass

    @abstractmethod
    def observe(self, state: StateT, action: int, reward: float, next_state: StateT) -> bool:
        """Record the outcome of the last action.

        Returns:
            True when the step closed the current episode.
        """
        pass

    @property
    def episode_index(self) -> int:
        """Current episode number (0 for agents without episodes)."""
        return 0

    def encode_state(self, state: StateT) -> int:
        """Discrete label written to traces for ``state``."""
        return int(state)


class HolderEnv(Environment[float]):
    """Environment on the continuous state space [0, 1].

    The author of an implementation asserts that rewards and transition kernels
    are Holder continuous in the state with the constants reported by
    :attr:`holder_constants`.
    """

    @property
    @abstractmethod
    def holder_constants(self) -> tuple[float, float]:
        """(L, alpha)."""
        pass
