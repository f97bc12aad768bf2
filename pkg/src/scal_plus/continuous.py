"""Continuous-state agent on [0, 1] by interval aggregation.

[0, 1] is split into S intervals I_1 = [0, 1/S] and I_j = ((j-1)/S, j/S].
The agent counts visits per (interval, action, next interval), plans with the
continuous bonus (which adds (c + r_max)·L·S^-alpha to the discrete one) and
plays the planned interval policy at every state of the interval.
"""

from __future__ import annotations

import math

import numpy as np
import structlog

from scal_plus.agent import AgentConfig, ScalPlusAgent
from scal_plus.bonus import HolderParams
from scal_plus.errors import MissingHolderParamsError, OutOfDomainError
from scal_plus.events import SyncEventEmitter
from scal_plus.interfaces import HolderEnv
from scal_plus.simulation import simulate
from scal_plus.trace import RegretTrace

logger = structlog.get_logger(__name__)


def interval_index(s: float, num_intervals: int) -> int:
    """1-based index j of the interval holding ``s``.

    Ties at a boundary j/S go to interval j.

    Raises:
        OutOfDomainError: If ``s`` is outside [0, 1].
    """
    if num_intervals < 1:
        raise ValueError("num_intervals must be positive")
    if not 0.0 <= s <= 1.0:
        raise OutOfDomainError(f"state {s!r} outside [0, 1]")
    j = max(1, math.ceil(s * num_intervals))
    # s·S may round across a boundary; compare against the boundaries themselves
    if j > 1 and s <= (j - 1) / num_intervals:
        j -= 1
    elif j < num_intervals and s > j / num_intervals:
        j += 1
    return min(j, num_intervals)


def choose_num_intervals(horizon: int, num_actions: int, L: float, alpha: float) -> int:
    """ceil((alpha·L·sqrt(T/A))^(1/(alpha+1))), at least 1."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    base = alpha * L * math.sqrt(horizon / num_actions)
    if base <= 0.0:
        return 1
    return max(1, math.ceil(base ** (1.0 / (alpha + 1.0))))


def horizon_is_sufficient(horizon: int, num_actions: int, L: float, alpha: float) -> bool:
    """Whether T >= L^(2/alpha)·A, the regime where the regret bound applies."""
    return horizon >= L ** (2.0 / alpha) * num_actions


class Discretization:
    """Uniform partition of [0, 1] into ``num_intervals`` intervals."""

    def __init__(self, num_intervals: int):
        if num_intervals < 1:
            raise ValueError("num_intervals must be positive")
        self.num_intervals = num_intervals

    def index(self, s: float) -> int:
        return interval_index(s, self.num_intervals)

    def centers(self) -> np.ndarray:
        return (np.arange(self.num_intervals) + 0.5) / self.num_intervals

    def edges(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.num_intervals + 1)


class ContinuousScalPlusAgent(ScalPlusAgent):
    """The optimistic agent on aggregated states.

    States passed to ``act``/``observe`` are positions in [0, 1]; internally
    they are replaced by the 0-based interval index, which is also what
    :meth:`encode_state` reports. The attractive aggregated state is
    ``cfg.reference_state`` (interval 1 by default).

    Raises:
        MissingHolderParamsError: If ``cfg.holder`` is not set.
    """

    def __init__(
        self,
        num_actions: int,
        discretization: Discretization,
        cfg: AgentConfig,
        emitter: SyncEventEmitter | None = None,
    ) -> None:
        if cfg.holder is None:
            raise MissingHolderParamsError("continuous agent needs holder (L, alpha)")
        super().__init__(discretization.num_intervals, num_actions, cfg, emitter)
        self.discretization = discretization

    def encode_state(self, state: float) -> int:
        return self.discretization.index(state) - 1

    def act(self, state: float) -> int:  # type: ignore[override]
        return super().act(self.encode_state(state))

    def observe(self, state: float, action: int, reward: float, next_state: float) -> bool:  # type: ignore[override]
        return super().observe(self.encode_state(state), action, reward, self.encode_state(next_state))

    def lifted_policy(self, state: float) -> np.ndarray:
        """pi(state, .) = pi_k(I(state), .)."""
        if self.policy is None:
            raise ValueError("no policy planned yet")
        return np.array(self.policy.probs[self.encode_state(state)])


def run_continuous_agent(
    env: HolderEnv,
    cfg: AgentConfig,
    horizon: int,
    seed: int,
    num_intervals: int | None = None,
    emitter: SyncEventEmitter | None = None,
) -> tuple[RegretTrace, ContinuousScalPlusAgent]:
    """Discretize, build the continuous agent and simulate ``horizon`` steps.

    ``cfg.holder`` defaults to the environment's constants and sets both the
    bonus and the number of intervals (:func:`choose_num_intervals`) unless
    ``num_intervals`` is given.
    """
    if cfg.holder is None:
        L, alpha = env.holder_constants
        cfg = cfg.model_copy(update={"holder": HolderParams(L=L, alpha=alpha)})
    assert cfg.holder is not None
    L, alpha = cfg.holder.L, cfg.holder.alpha
    if not horizon_is_sufficient(horizon, env.num_actions, L, alpha):
        logger.warning(
            "horizon_below_smoothness_regime",
            horizon=horizon,
            threshold=L ** (2.0 / alpha) * env.num_actions,
        )
    if num_intervals is None:
        num_intervals = choose_num_intervals(horizon, env.num_actions, L, alpha)
    agent = ContinuousScalPlusAgent(env.num_actions, Discretization(num_intervals), cfg, emitter)
    return simulate(env, agent, horizon, seed), agent
