"""Exploration bonuses.

All functions are pure and accept scalars or numpy arrays for the counts
(and variances); scalar inputs give a float back. Logarithms are natural.

- :func:`beta`: Hoeffding width sqrt(7 ln(2SAt_k/delta) / max(1, N))
- :func:`bernstein_reward_beta`: empirical-Bernstein reward width
- :func:`bonus_discrete`: c·min(beta + 1/(N+1), 2) + min(beta_r, r_max)
- :func:`bonus_continuous`: the discrete form plus (c + r_max)·L·S^-alpha
- :func:`diagnostic_d`: the looser bonus d_k with the phi transition width
"""

from __future__ import annotations

from enum import Enum
from typing import Union

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field, field_validator

from scal_plus.errors import MissingHolderParamsError

Counts = Union[int, float, npt.NDArray[np.floating], npt.NDArray[np.integer]]
Bonus = Union[float, npt.NDArray[np.floating]]


class BonusVariant(str, Enum):
    """How the reward part of the bonus is computed."""

    HOEFFDING = "hoeffding"
    BERNSTEIN_REWARD = "bernstein-reward"


class HolderParams(BaseModel):
    """Holder constants (L, alpha) of a continuous environment.

    L = 0 is accepted as the degenerate piecewise-constant case.
    """

    model_config = {"frozen": True}

    L: float = Field(..., ge=0.0)
    alpha: float = Field(..., gt=0.0)


class BonusParams(BaseModel):
    """Inputs shared by every bonus formula."""

    model_config = {"frozen": True}

    span_cap: float = Field(..., ge=0.0)
    r_max: float = Field(1.0, gt=0.0)
    delta: float = Field(0.05, gt=0.0, lt=1.0)
    num_states: int = Field(..., gt=0)
    num_actions: int = Field(..., gt=0)
    holder: HolderParams | None = None
    variant: BonusVariant = BonusVariant.HOEFFDING
    capped: bool = True

    @field_validator("delta")
    @classmethod
    def validate_delta(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        return v


def _out(value: npt.NDArray[np.floating]) -> Bonus:
    return float(value) if np.ndim(value) == 0 else value


def log_term(t_k: Counts, params: BonusParams, factor: float = 2.0) -> Bonus:
    """ln(factor·S·A·t_k / delta)."""
    sa = params.num_states * params.num_actions
    return _out(np.log(factor * sa * np.asarray(t_k, dtype=float) / params.delta))


def beta(n: Counts, t_k: Counts, params: BonusParams) -> Bonus:
    """Hoeffding width sqrt(7 ln(2SAt_k/delta) / max(1, n))."""
    n = np.maximum(1.0, np.asarray(n, dtype=float))
    return _out(np.sqrt(7.0 * np.asarray(log_term(t_k, params)) / n))


def bernstein_reward_beta(
    n: Counts, t_k: Counts, variance: Counts, params: BonusParams
) -> Bonus:
    """sqrt(14 var b / max(1, n)) + (49/3) r_max b / max(1, n - 1), b = ln(2SAt_k/delta)."""
    n = np.asarray(n, dtype=float)
    b = np.asarray(log_term(t_k, params))
    variance = np.asarray(variance, dtype=float)
    first = np.sqrt(14.0 * variance * b / np.maximum(1.0, n))
    second = (49.0 / 3.0) * params.r_max * b / np.maximum(1.0, n - 1.0)
    return _out(first + second)


def reward_beta(n: Counts, t_k: Counts, variance: Counts, params: BonusParams) -> Bonus:
    """Reward width for the configured variant."""
    if params.variant is BonusVariant.BERNSTEIN_REWARD:
        return bernstein_reward_beta(n, t_k, variance, params)
    return _out(params.r_max * np.asarray(beta(n, t_k, params)))


def _combine(
    transition_width: npt.NDArray[np.floating],
    n: npt.NDArray[np.floating],
    reward_width: npt.NDArray[np.floating],
    params: BonusParams,
) -> npt.NDArray[np.floating]:
    c = params.span_cap
    attraction = 1.0 / (n + 1.0)
    if not params.capped:
        return c * (transition_width + attraction) + reward_width
    return c * np.minimum(transition_width + attraction, 2.0) + np.minimum(reward_width, params.r_max)


def bonus_discrete(
    n: Counts, t_k: Counts, params: BonusParams, variance: Counts = 0.0
) -> Bonus:
    """b = c·min(beta + 1/(n+1), 2) + min(beta_r, r_max).

    With ``params.capped`` off, the uncapped c·(beta + 1/(n+1)) + beta_r.
    """
    n_arr = np.asarray(n, dtype=float)
    width = np.asarray(beta(n_arr, t_k, params))
    reward_width = np.asarray(reward_beta(n_arr, t_k, variance, params))
    return _out(_combine(width, n_arr, reward_width, params))


def smoothness_term(params: BonusParams) -> float:
    """(c + r_max)·L·S^-alpha for S intervals.

    Raises:
        MissingHolderParamsError: If ``params.holder`` is None.
    """
    if params.holder is None:
        raise MissingHolderParamsError("continuous bonus needs holder (L, alpha)")
    holder = params.holder
    return (params.span_cap + params.r_max) * holder.L * params.num_states ** (-holder.alpha)


def bonus_continuous(
    n: Counts, t_k: Counts, params: BonusParams, variance: Counts = 0.0
) -> Bonus:
    """Aggregated-state bonus: :func:`bonus_discrete` plus the smoothness term.

    ``params.num_states`` is the number of intervals.

    Raises:
        MissingHolderParamsError: If ``params.holder`` is None.
    """
    extra = smoothness_term(params)
    return _out(np.asarray(bonus_discrete(n, t_k, params, variance)) + extra)


def phi(
    n: Counts, t_k: Counts, gamma_or_intervals: int, params: BonusParams, continuous: bool
) -> Bonus:
    """Transition width of the looser bonus d_k.

    Discrete: sqrt(7(Gamma-1) l / N+) + 14 S l / N+;
    continuous: sqrt(7 S l / N+) + 14 S l / N+,
    with l = ln(3SAt_k/delta), N+ = max(1, n) and S = ``gamma_or_intervals``
    (number of intervals) in the continuous case.
    """
    n_plus = np.maximum(1.0, np.asarray(n, dtype=float))
    log3 = np.asarray(log_term(t_k, params, factor=3.0))
    if continuous:
        root_factor = float(gamma_or_intervals)
        linear_factor = float(gamma_or_intervals)
    else:
        root_factor = float(gamma_or_intervals - 1)
        linear_factor = float(params.num_states)
    return _out(np.sqrt(7.0 * root_factor * log3 / n_plus) + 14.0 * linear_factor * log3 / n_plus)


def diagnostic_d(
    n: Counts,
    t_k: Counts,
    gamma_or_intervals: int,
    params: BonusParams,
    continuous: bool = False,
    variance: Counts = 0.0,
) -> Bonus:
    """d = c·min(phi + 1/(n+1), 2) + min(beta_r, r_max) [+ smoothness term].

    Uses the same reward width as the matching b_k; the smoothness term is
    added in the continuous case.
    """
    n_arr = np.asarray(n, dtype=float)
    width = np.asarray(phi(n_arr, t_k, gamma_or_intervals, params, continuous))
    reward_width = np.asarray(reward_beta(n_arr, t_k, variance, params))
    value = _combine(width, n_arr, reward_width, params)
    if continuous:
        value = value + smoothness_term(params)
    return _out(value)


def bonus_vector(
    counts: np.ndarray, t_k: int, variance: np.ndarray, params: BonusParams
) -> np.ndarray:
    """Per-(s,a) bonus array for planning, continuous when holder params are set."""
    counts = np.asarray(counts, dtype=float)
    if params.holder is not None:
        value = bonus_continuous(counts, t_k, params, variance)
    else:
        value = bonus_discrete(counts, t_k, params, variance)
    return np.broadcast_to(np.asarray(value, dtype=float), counts.shape).copy()
