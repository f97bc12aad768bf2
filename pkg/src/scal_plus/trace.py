"""Regret traces and their CSV files.

A trace holds one record per step (state label, action, reward, episode) and
the optimal gain g* of the environment, so that the regret
Delta(t) = t·g* - sum of the first t rewards can be recomputed at any t.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from scal_plus.errors import DimensionMismatchError
from scal_plus.models import EpisodeRecord, frozen_array

TRACE_FORMAT_VERSION = 1
TRACE_COLUMNS = ("t", "state", "action", "reward", "episode", "cum_reward", "regret")
SUMMARY_COLUMNS = (
    "seed",
    "T",
    "final_regret",
    "episodes",
    "mean_planning_iterations",
    "status",
)
EPISODE_COLUMNS = (
    "episode",
    "t_k",
    "planner_gain",
    "epsilon",
    "iterations",
    "gamma",
    "mean_bonus",
    "max_bonus",
)


class RegretTrace(BaseModel):
    """Per-step record of one simulated run."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    optimal_gain: float
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    episodes: np.ndarray

    @field_validator("states", "actions", "episodes", mode="before")
    @classmethod
    def _to_int_array(cls, v: Any) -> np.ndarray:
        return frozen_array(v, dtype=np.int64)

    @field_validator("rewards", mode="before")
    @classmethod
    def _to_float_array(cls, v: Any) -> np.ndarray:
        return frozen_array(v)

    @model_validator(mode="after")
    def _check_lengths(self) -> RegretTrace:
        n = self.rewards.shape[0]
        for name in ("states", "actions", "episodes"):
            if getattr(self, name).shape != (n,):
                raise DimensionMismatchError(f"{name} has {getattr(self, name).shape}, expected ({n},)")
        return self

    @property
    def horizon(self) -> int:
        return int(self.rewards.shape[0])

    @property
    def cumulative_rewards(self) -> np.ndarray:
        return np.cumsum(self.rewards)

    @property
    def cumulative_reward(self) -> float:
        return float(self.rewards.sum())

    @property
    def num_episodes(self) -> int:
        return int(self.episodes.max()) if self.horizon else 0

    def regret_at(self, t: int) -> float:
        """Delta(t) = t·g* - sum of rewards up to step t; Delta(0) = 0."""
        if not 0 <= t <= self.horizon:
            raise ValueError(f"t must be in [0, {self.horizon}], got {t}")
        if t == 0:
            return 0.0
        return float(t * self.optimal_gain - self.cumulative_rewards[t - 1])

    def regret_curve(self) -> np.ndarray:
        """Delta(t) for t = 1..T."""
        steps = np.arange(1, self.horizon + 1, dtype=float)
        return steps * self.optimal_gain - self.cumulative_rewards

    def final_regret(self) -> float:
        return self.regret_at(self.horizon)


def checkpoint_steps(horizon: int, stride: int) -> np.ndarray:
    """Steps written to a trace CSV: every ``stride``-th step and the last one."""
    if stride < 1:
        raise ValueError("checkpoint stride must be positive")
    steps = np.arange(stride, horizon + 1, stride)
    if steps.size == 0 or steps[-1] != horizon:
        steps = np.append(steps, horizon)
    return steps


class TraceWriter:
    """Writes trace, episode and summary CSVs into one run directory.

    Files:
    - ``trace_seed<seed>.csv`` with :data:`TRACE_COLUMNS`
    - ``episodes_seed<seed>.csv`` with :data:`EPISODE_COLUMNS` (verbose runs)
    - ``summary.csv`` with :data:`SUMMARY_COLUMNS`
    """

    def __init__(self, output_dir: str | Path):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def trace_path(self, seed: int) -> Path:
        return self.output_dir / f"trace_seed{seed}.csv"

    def episodes_path(self, seed: int) -> Path:
        return self.output_dir / f"episodes_seed{seed}.csv"

    @property
    def summary_path(self) -> Path:
        return self.output_dir / "summary.csv"

    def write_trace(self, trace: RegretTrace, seed: int, stride: int = 1) -> Path:
        """Write checkpoint rows of ``trace``; floats are written with repr."""
        path = self.trace_path(seed)
        cumulative = trace.cumulative_rewards
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for t in checkpoint_steps(trace.horizon, stride):
                i = int(t) - 1
                cum = float(cumulative[i])
                writer.writerow(
                    [
                        int(t),
                        int(trace.states[i]),
                        int(trace.actions[i]),
                        repr(float(trace.rewards[i])),
                        int(trace.episodes[i]),
                        repr(cum),
                        repr(float(t * trace.optimal_gain - cum)),
                    ]
                )
        return path

    def write_episodes(self, history: list[EpisodeRecord], seed: int) -> Path:
        path = self.episodes_path(seed)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=EPISODE_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for record in history:
                writer.writerow(record.model_dump())
        return path

    def write_summary(self, rows: list[dict[str, Any]], path: Path | None = None) -> Path:
        path = path or self.summary_path
        fieldnames = list(rows[0].keys()) if rows else list(SUMMARY_COLUMNS)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    """Rows of a CSV written by :class:`TraceWriter`, as strings."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"CSV file not found: {path}")
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def regret_from_rows(rows: list[dict[str, str]], optimal_gain: float) -> list[float]:
    """Recompute the regret column of a trace CSV from its t and cum_reward."""
    return [int(row["t"]) * optimal_gain - float(row["cum_reward"]) for row in rows]
