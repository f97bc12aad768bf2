"""Optimistic span-constrained agent and baseline agents.

The optimistic agent runs in episodes. At the start of episode k it builds the
empirical model from the counts collected so far, inflates the rewards with
the exploration bonus, duplicates every action with a zero-reward copy and
plans with ScOpt at accuracy r_max/sqrt(t_k). The episode ends after the step
on which the in-episode count of some pair reaches max(1, N_k(s, a)).
"""

from __future__ import annotations

import math
from collections.abc import Callable
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel, Field

from scal_plus.bonus import BonusParams, BonusVariant, HolderParams, bonus_vector
from scal_plus.errors import EpisodePlanningError, FeasibilityViolationError, ScalPlusError
from scal_plus.events import (
    SyncEventEmitter,
    create_episode_planned_event,
    create_episode_start_event,
    create_planning_error_event,
)
from scal_plus.interfaces import Agent
from scal_plus.models import (
    AgentState,
    EmpiricalModel,
    EpisodeRecord,
    RandomizedPolicy,
    ScOptConfig,
    ScOptResult,
)
from scal_plus.scopt import ergodic_coefficient, global_feasibility, scopt
from scal_plus.statistics import VisitStatistics, augment, project_policy
from scal_plus.streams import make_stream

logger = structlog.get_logger(__name__)

PLANNING_MAX_ITER = 100_000


class AgentConfig(BaseModel):
    """Inputs of the optimistic agent."""

    model_config = {"frozen": True}

    span_cap: float = Field(..., gt=0.0)
    delta: float = Field(0.05, gt=0.0, lt=1.0)
    r_max: float = Field(1.0, gt=0.0)
    bonus_variant: BonusVariant = BonusVariant.HOEFFDING
    capped_bonus: bool = True
    reference_state: int = Field(0, ge=0)
    seed: int = Field(0, ge=0)
    max_planning_iter: int = Field(PLANNING_MAX_ITER, gt=0)
    holder: HolderParams | None = None
    debug: bool = False


def planning_accuracy(t_k: int, r_max: float = 1.0) -> float:
    """epsilon_k = r_max / sqrt(t_k)."""
    return r_max / math.sqrt(t_k)


def plan_episode(
    model: EmpiricalModel,
    bonus: np.ndarray,
    r_max: float,
    cfg: ScOptConfig,
    gamma: float,
) -> ScOptResult:
    """ScOpt on the augmented optimistic MDP built from ``model``.

    Rewards are ``r_bar + bonus`` and are not clipped to r_max. The returned
    policy is over the 2A augmented actions.
    """
    optimistic = model.to_mdp(model.r_bar + bonus, r_max)
    planning_mdp = augment(optimistic)
    if cfg.debug:
        if ergodic_coefficient(planning_mdp) > gamma + 1e-12:
            raise FeasibilityViolationError(f"ergodic coefficient exceeds certified bound {gamma!r}")
        if not global_feasibility(planning_mdp, np.zeros(planning_mdp.num_states), cfg.span_cap):
            raise FeasibilityViolationError("augmented planning MDP is not globally feasible")
    return scopt(planning_mdp, cfg, contraction_factor=gamma)


def optimism_fraction(history: list[EpisodeRecord], optimal_gain: float) -> float:
    """Share of episodes whose planner gain is at least g* - epsilon_k."""
    if not history:
        return 1.0
    hits = sum(1 for rec in history if rec.planner_gain >= optimal_gain - rec.epsilon)
    return hits / len(history)


class ScalPlusAgent(Agent[int]):
    """Optimistic span-constrained agent over a finite state space.

    Planning is lazy: an episode's policy is computed on the first ``act``
    after the episode boundary, so ``t_k`` is the step at which it is played.

    Args:
        num_states: Number of (discrete or aggregated) states.
        num_actions: Number of actions.
        cfg: Agent configuration.
        emitter: Receives episode events; a private emitter is used if omitted.
    """

    def __init__(
        self,
        num_states: int,
        num_actions: int,
        cfg: AgentConfig,
        emitter: SyncEventEmitter | None = None,
    ) -> None:
        if cfg.reference_state >= num_states:
            raise ValueError(
                f"reference_state {cfg.reference_state} out of range for {num_states} states"
            )
        self.cfg = cfg
        self.num_states = num_states
        self.num_actions = num_actions
        self.stats = VisitStatistics(num_states, num_actions, cfg.r_max)
        self.rng = make_stream(cfg.seed, "agent")
        self.emitter = emitter or SyncEventEmitter()
        self.history: list[EpisodeRecord] = []
        self.last_result: ScOptResult | None = None
        self._policy: RandomizedPolicy | None = None
        self._planner_gain: float | None = None
        self._epsilon: float | None = None
        self._episode = 0
        self._needs_plan = True

    @property
    def bonus_params(self) -> BonusParams:
        return BonusParams(
            span_cap=self.cfg.span_cap,
            r_max=self.cfg.r_max,
            delta=self.cfg.delta,
            num_states=self.num_states,
            num_actions=self.num_actions,
            holder=self.cfg.holder,
            variant=self.cfg.bonus_variant,
            capped=self.cfg.capped_bonus,
        )

    @property
    def episode_index(self) -> int:
        return self._episode

    @property
    def policy(self) -> RandomizedPolicy | None:
        return self._policy

    def state(self) -> AgentState:
        return AgentState(
            current_policy=self._policy,
            episode_index=self._episode,
            planner_gain=self._planner_gain,
            epsilon_k=self._epsilon,
            t=self.stats.t,
            t_k=self.stats.t_k,
        )

    def start_episode(self) -> EpisodeRecord:
        """Plan the policy of the next episode from the current counts.

        Raises:
            EpisodePlanningError: If ScOpt fails; the run cannot continue.
        """
        episode = self._episode + 1
        t_k = self.stats.t_k
        ref = self.cfg.reference_state
        self.emitter.emit(create_episode_start_event(episode, t_k))

        model = self.stats.empirical_model(ref)
        bonus = bonus_vector(model.counts, t_k, model.variance, self.bonus_params)
        epsilon = planning_accuracy(t_k, self.cfg.r_max)
        gamma = self.stats.contraction_bound(ref)
        sc_cfg = ScOptConfig(
            span_cap=self.cfg.span_cap,
            accuracy=epsilon,
            reference_state=ref,
            max_iter=self.cfg.max_planning_iter,
            debug=self.cfg.debug,
        )
        try:
            result = plan_episode(model, bonus, self.cfg.r_max, sc_cfg, gamma)
        except ScalPlusError as exc:
            self.emitter.emit(
                create_planning_error_event(episode, t_k, type(exc).__name__, str(exc))
            )
            raise EpisodePlanningError(episode, t_k, exc) from exc

        self._episode = episode
        self._policy = project_policy(result.policy)
        self._planner_gain = result.gain_estimate
        self._epsilon = epsilon
        self._needs_plan = False
        self.last_result = result

        record = EpisodeRecord(
            episode=episode,
            t_k=t_k,
            planner_gain=result.gain_estimate,
            epsilon=epsilon,
            iterations=result.iterations,
            gamma=min(1.0, max(0.0, gamma)),
            mean_bonus=float(bonus.mean()),
            max_bonus=float(bonus.max()),
        )
        self.history.append(record)
        self.emitter.emit(create_episode_planned_event(**record.model_dump()))
        return record

    def act(self, state: int) -> int:
        if self._needs_plan:
            self.start_episode()
        assert self._policy is not None
        return self._policy.sample(state, self.rng)

    def observe(self, state: int, action: int, reward: float, next_state: int) -> bool:
        self.stats.record(state, action, reward, next_state)
        in_episode = self.stats.nu_sa[state, action]
        if in_episode < max(1, self.stats.n_sa[state, action]):
            return False
        self.stats.end_episode()
        self._needs_plan = True
        return True


class UniformRandomAgent(Agent[int]):
    """Plays every action with equal probability, ignoring the state.

    ``encoder`` maps states to trace labels (interval indices for continuous
    environments).
    """

    def __init__(
        self, num_actions: int, seed: int = 0, encoder: Callable[[Any], int] | None = None
    ) -> None:
        self.num_actions = num_actions
        self.rng = make_stream(seed, "agent")
        self._encoder = encoder

    def encode_state(self, state: Any) -> int:
        return self._encoder(state) if self._encoder else int(state)

    def act(self, state: int) -> int:
        return int(self.rng.integers(self.num_actions))

    def observe(self, state: int, action: int, reward: float, next_state: int) -> bool:
        return False


class FixedPolicyAgent(Agent[int]):
    """Samples from a fixed stationary policy; useful as an oracle baseline."""

    def __init__(self, policy: RandomizedPolicy, seed: int = 0) -> None:
        self.policy = policy
        self.rng = make_stream(seed, "agent")

    def act(self, state: int) -> int:
        return self.policy.sample(state, self.rng)

    def observe(self, state: int, action: int, reward: float, next_state: int) -> bool:
        return False
