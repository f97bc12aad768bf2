"""Core data models shared across scal_plus.

This module defines the value types passed between the planning, statistics
and agent layers:
- DiscreteMdp: finite average-reward MDP (kernel, mean rewards, r_max)
- GainBias: a solution of the average-reward optimality equation
- RandomizedPolicy: per-state action distributions
- ScOptConfig / ScOptResult: span-constrained planner input and output
- EmpiricalModel: estimates built from visit counts
- EpisodeRecord / AgentState: what an agent exposes about its episodes

Arrays stored on models are copied and made read-only on construction, so a
model can be shared freely once built.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from scal_plus.errors import DimensionMismatchError

ROW_TOLERANCE = 1e-12
TEXT_FORMAT_HEADER = "# scal-plus discrete mdp v1"


def frozen_array(value: Any, dtype: type = float) -> np.ndarray:
    """Copy ``value`` into a read-only numpy array."""
    arr = np.array(value, dtype=dtype)
    arr.setflags(write=False)
    return arr


class DiscreteMdp(BaseModel):
    """Finite state/action MDP with mean rewards.

    ``kernel[s, a, s']`` is p(s'|s,a) and ``mean_reward[s, a]`` is r(s,a).
    Only shapes are checked here; stochasticity and reward bounds are checked
    by :func:`scal_plus.mdp.validate` so that malformed models can still be
    built and diagnosed.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kernel: np.ndarray
    mean_reward: np.ndarray
    r_max: float = Field(1.0, gt=0.0)

    @field_validator("kernel", "mean_reward", mode="before")
    @classmethod
    def _to_array(cls, v: Any) -> np.ndarray:
        return frozen_array(v)

    @model_validator(mode="after")
    def _check_shapes(self) -> DiscreteMdp:
        if self.kernel.ndim != 3 or self.kernel.shape[0] != self.kernel.shape[2]:
            raise DimensionMismatchError(
                f"kernel must have shape (S, A, S), got {self.kernel.shape}"
            )
        if self.kernel.shape[0] == 0 or self.kernel.shape[1] == 0:
            raise DimensionMismatchError("MDP needs at least one state and one action")
        if self.mean_reward.shape != self.kernel.shape[:2]:
            raise DimensionMismatchError(
                f"mean_reward shape {self.mean_reward.shape} does not match "
                f"kernel {self.kernel.shape[:2]}"
            )
        return self

    @property
    def num_states(self) -> int:
        return int(self.kernel.shape[0])

    @property
    def num_actions(self) -> int:
        return int(self.kernel.shape[1])

    def to_text(self) -> str:
        """Serialize to the documented text format.

        Layout: comment lines start with ``#``; the first data line is
        ``S A r_max``; then one line per (s, a) in state-major order holding the
        mean reward followed by the S kernel entries. Floats are written with
        ``repr`` so a round trip is exact.
        """
        lines = [TEXT_FORMAT_HEADER, f"{self.num_states} {self.num_actions} {self.r_max!r}"]
        for s in range(self.num_states):
            for a in range(self.num_actions):
                row = " ".join(repr(float(p)) for p in self.kernel[s, a])
                lines.append(f"{float(self.mean_reward[s, a])!r} {row}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> DiscreteMdp:
        """Parse the format written by :meth:`to_text`.

        Raises:
            ValueError: If the text is truncated or holds malformed numbers.
        """
        records = [
            line.split()
            for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")
        ]
        if not records:
            raise ValueError("empty MDP description")
        header = records[0]
        if len(header) != 3:
            raise ValueError(f"header must be 'S A r_max', got {' '.join(header)!r}")
        num_states, num_actions, r_max = int(header[0]), int(header[1]), float(header[2])
        body = records[1:]
        if len(body) != num_states * num_actions:
            raise ValueError(
                f"expected {num_states * num_actions} (s, a) records, found {len(body)}"
            )
        kernel = np.empty((num_states, num_actions, num_states))
        reward = np.empty((num_states, num_actions))
        for index, fields in enumerate(body):
            if len(fields) != num_states + 1:
                raise ValueError(f"record {index} has {len(fields)} fields, expected {num_states + 1}")
            s, a = divmod(index, num_actions)
            reward[s, a] = float(fields[0])
            kernel[s, a] = [float(x) for x in fields[1:]]
        return cls(kernel=kernel, mean_reward=reward, r_max=r_max)

    @classmethod
    def load(cls, path: str | Path) -> DiscreteMdp:
        """Load an MDP file.

        Raises:
            FileNotFoundError: If the file doesn't exist.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"MDP file not found: {path}")
        return cls.from_text(path.read_text(encoding="utf-8"))

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_text(), encoding="utf-8")
        return path


class GainBias(BaseModel):
    """Solution pair (g, h) of the average-reward optimality equation."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    gain: float
    bias: np.ndarray
    span: float = Field(..., ge=0.0)
    iterations: int = Field(0, ge=0)

    @field_validator("bias", mode="before")
    @classmethod
    def _to_array(cls, v: Any) -> np.ndarray:
        return frozen_array(v)


class RandomizedPolicy(BaseModel):
    """Stationary Markov randomized policy, ``probs[s, a]`` = pi(a|s)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    probs: np.ndarray

    @field_validator("probs", mode="before")
    @classmethod
    def _to_array(cls, v: Any) -> np.ndarray:
        return frozen_array(v)

    @model_validator(mode="after")
    def _check_rows(self) -> RandomizedPolicy:
        if self.probs.ndim != 2 or 0 in self.probs.shape:
            raise DimensionMismatchError(f"policy must have shape (S, A), got {self.probs.shape}")
        if np.any(self.probs < 0.0) or np.any(self.probs > 1.0):
            raise ValueError("policy probabilities must lie in [0, 1]")
        totals = self.probs.sum(axis=1)
        if np.any(np.abs(totals - 1.0) > ROW_TOLERANCE):
            bad = int(np.argmax(np.abs(totals - 1.0)))
            raise ValueError(f"policy row {bad} sums to {totals[bad]!r}")
        return self

    @property
    def num_states(self) -> int:
        return int(self.probs.shape[0])

    @property
    def num_actions(self) -> int:
        return int(self.probs.shape[1])

    @classmethod
    def deterministic(cls, actions: Any, num_actions: int) -> RandomizedPolicy:
        actions = np.asarray(actions, dtype=int)
        probs = np.zeros((actions.size, num_actions))
        probs[np.arange(actions.size), actions] = 1.0
        return cls(probs=probs)

    @classmethod
    def uniform(cls, num_states: int, num_actions: int) -> RandomizedPolicy:
        return cls(probs=np.full((num_states, num_actions), 1.0 / num_actions))

    def support(self, state: int) -> list[int]:
        """Actions played with positive probability in ``state``."""
        return [int(a) for a in np.flatnonzero(self.probs[state] > 0.0)]

    def is_deterministic(self) -> bool:
        return bool(np.all(np.count_nonzero(self.probs, axis=1) == 1))

    def sample(self, state: int, rng: np.random.Generator) -> int:
        """Draw an action by inverse CDF with one uniform from ``rng``."""
        cdf = np.cumsum(self.probs[state])
        index = int(np.searchsorted(cdf, rng.random(), side="right"))
        return min(index, self.num_actions - 1)


class ScOptConfig(BaseModel):
    """Parameters of one span-constrained relative value iteration run."""

    span_cap: float = Field(..., ge=0.0)
    accuracy: float = Field(..., gt=0.0)
    reference_state: int = Field(0, ge=0)
    max_iter: int = Field(1_000_000, gt=0)
    debug: bool = False


class ScOptResult(BaseModel):
    """Output of ScOpt: final iterate, gain estimate and greedy policy."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    value: np.ndarray
    gain_estimate: float
    policy: RandomizedPolicy
    iterations: int = Field(..., ge=0)
    contraction_factor: float = Field(..., ge=0.0, le=1.0)
    iteration_bound: float = Field(..., ge=0.0)
    max_iterate_span: float = Field(..., ge=0.0)

    @field_validator("value", mode="before")
    @classmethod
    def _to_array(cls, v: Any) -> np.ndarray:
        return frozen_array(v)

    def to_record(self) -> dict[str, Any]:
        """Flat record for harness logs (per-state support as 'a|b' strings)."""
        return {
            "gain": self.gain_estimate,
            "iterations": self.iterations,
            "contraction_factor": self.contraction_factor,
            "iteration_bound": self.iteration_bound,
            "support": [
                "|".join(str(a) for a in self.policy.support(s))
                for s in range(self.policy.num_states)
            ],
        }

    def to_text(self) -> str:
        record = self.to_record()
        lines = [
            f"gain {record['gain']!r}",
            f"iterations {record['iterations']}",
            f"contraction_factor {record['contraction_factor']!r}",
        ]
        lines.extend(f"support {s} {sup}" for s, sup in enumerate(record["support"]))
        return "\n".join(lines) + "\n"


class EmpiricalModel(BaseModel):
    """Snapshot of empirical estimates built from visit counts.

    ``p_hat`` is the biased estimator that moves mass 1/(N+1) onto the
    reference state; ``counts`` are the N(s,a) it was built from.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p_bar: np.ndarray
    r_bar: np.ndarray
    p_hat: np.ndarray
    variance: np.ndarray
    counts: np.ndarray
    reference_state: int = Field(..., ge=0)

    @field_validator("p_bar", "r_bar", "p_hat", "variance", "counts", mode="before")
    @classmethod
    def _to_array(cls, v: Any) -> np.ndarray:
        return frozen_array(v)

    def to_mdp(self, rewards: np.ndarray, r_max: float) -> DiscreteMdp:
        """MDP with kernel ``p_hat`` and the given (possibly inflated) rewards."""
        rewards = np.asarray(rewards, dtype=float)
        return DiscreteMdp(
            kernel=self.p_hat,
            mean_reward=rewards,
            r_max=max(float(r_max), float(rewards.max())),
        )


class EpisodeRecord(BaseModel):
    """What an agent planned at the start of one episode."""

    episode: int = Field(..., ge=1)
    t_k: int = Field(..., ge=1)
    planner_gain: float
    epsilon: float = Field(..., gt=0.0)
    iterations: int = Field(..., ge=0)
    gamma: float = Field(..., ge=0.0, le=1.0)
    mean_bonus: float = Field(0.0, ge=0.0)
    max_bonus: float = Field(0.0, ge=0.0)


class AgentState(BaseModel):
    """Read-only view of an optimistic agent between steps."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    current_policy: RandomizedPolicy | None
    episode_index: int = Field(..., ge=0)
    planner_gain: float | None = None
    epsilon_k: float | None = None
    t: int = Field(..., ge=1)
    t_k: int = Field(..., ge=1)
