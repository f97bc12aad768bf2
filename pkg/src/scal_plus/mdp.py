"""Finite average-reward MDPs: validation, the optimal Bellman operator and
exact-solution oracles.

The oracles in this module are the ground truth the planners and agents are
checked against:
- :func:`solve_gain_bias` runs relative value iteration anchored at state 0
- :func:`policy_gain` evaluates a fixed randomized policy the same way
- :func:`exact_policy_gain` / :func:`brute_force_gain` use Cesaro limits and
  exhaustive enumeration for small instances
"""

from __future__ import annotations

import itertools
from collections.abc import Callable

import numpy as np
import structlog

from scal_plus.errors import (
    DimensionMismatchError,
    EmptyVectorError,
    NoConvergenceError,
    NonStochasticRowError,
    RewardOutOfRangeError,
)
from scal_plus.models import ROW_TOLERANCE, DiscreteMdp, GainBias, RandomizedPolicy

logger = structlog.get_logger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 1_000_000

# Relative VI switches to the damped operator v <- (v + Lv)/2 once the
# residual span has not improved for this many iterations (periodic chains).
STALL_WINDOW = 1000
_STALL_RTOL = 1e-9


def validate(mdp: DiscreteMdp) -> None:
    """Check kernel stochasticity and reward bounds.

    Raises:
        NonStochasticRowError: First (s, a) whose row is negative or not summing to 1.
        RewardOutOfRangeError: First (s, a) whose mean reward is outside [0, r_max].
    """
    totals = mdp.kernel.sum(axis=2)
    for s in range(mdp.num_states):
        for a in range(mdp.num_actions):
            if np.any(mdp.kernel[s, a] < 0.0) or abs(totals[s, a] - 1.0) > ROW_TOLERANCE:
                raise NonStochasticRowError(s, a, float(totals[s, a]))
    for s in range(mdp.num_states):
        for a in range(mdp.num_actions):
            r = float(mdp.mean_reward[s, a])
            if not 0.0 <= r <= mdp.r_max:
                raise RewardOutOfRangeError(s, a, r, mdp.r_max)


def check_vector(mdp: DiscreteMdp, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (mdp.num_states,):
        raise DimensionMismatchError(
            f"value vector has shape {v.shape}, expected ({mdp.num_states},)"
        )
    return v


def q_values(mdp: DiscreteMdp, v: np.ndarray) -> np.ndarray:
    """r(s,a) + sum_s' p(s'|s,a) v(s') as an (S, A) array."""
    v = check_vector(mdp, v)
    return mdp.mean_reward + mdp.kernel @ v


def bellman(mdp: DiscreteMdp, v: np.ndarray) -> np.ndarray:
    """Optimal Bellman operator: (Lv)(s) = max_a q(s, a)."""
    return q_values(mdp, v).max(axis=1)


def greedy_actions(mdp: DiscreteMdp, v: np.ndarray) -> np.ndarray:
    """Argmax actions of ``q_values``; ties go to the lowest index."""
    return np.argmax(q_values(mdp, v), axis=1)


def span(v: np.ndarray) -> float:
    """max(v) - min(v)."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise EmptyVectorError("span of an empty vector")
    return float(v.max() - v.min())


def max_support(mdp: DiscreteMdp) -> int:
    """Largest number of strictly positive next-state entries over all (s, a)."""
    return int(np.count_nonzero(mdp.kernel > 0.0, axis=2).max())


def relative_value_iteration(
    step: Callable[[np.ndarray], np.ndarray],
    num_states: int,
    tol: float,
    max_iter: int,
    reference_state: int = 0,
) -> tuple[np.ndarray, float, int]:
    """Iterate ``v <- step(v) - step(v)[ref]`` until span(step(v) - v) <= tol.

    Falls back to the aperiodicity transform ``v <- (v + step(v)) / 2`` when
    the residual stalls for STALL_WINDOW iterations; fixed points and gain are
    unchanged by the transform.

    Returns:
        (v, gain, iterations) with gain the midpoint of step(v) - v.

    Raises:
        NoConvergenceError: If the residual is still above ``tol`` after ``max_iter``.
    """
    v = np.zeros(num_states)
    best = np.inf
    stalled = 0
    damped = False
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        lv = step(v)
        diff = lv - v
        high, low = float(diff.max()), float(diff.min())
        residual = high - low
        if residual <= tol:
            return v, 0.5 * (high + low), iteration
        if residual < best * (1.0 - _STALL_RTOL):
            best = residual
            stalled = 0
        else:
            stalled += 1
        if not damped and stalled >= STALL_WINDOW:
            damped = True
            logger.debug("rvi_damping_enabled", iteration=iteration, residual=residual)
        nxt = 0.5 * (v + lv) if damped else lv
        v = nxt - nxt[reference_state]
    raise NoConvergenceError(max_iter, residual)


def solve_gain_bias(
    mdp: DiscreteMdp,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> GainBias:
    """Optimal gain and a bias vector by relative value iteration.

    The MDP must be weakly communicating; this is the caller's responsibility
    and is not verified (every built-in environment satisfies it).

    Raises:
        NonStochasticRowError, RewardOutOfRangeError: If ``mdp`` does not validate.
        NoConvergenceError: If the residual span does not fall below ``tol``.
    """
    validate(mdp)
    kernel = mdp.kernel
    reward = mdp.mean_reward

    def step(v: np.ndarray) -> np.ndarray:
        return (reward + kernel @ v).max(axis=1)

    bias, gain, iterations = relative_value_iteration(step, mdp.num_states, tol, max_iter)
    return GainBias(gain=gain, bias=bias, span=span(bias), iterations=iterations)


def _policy_matrices(mdp: DiscreteMdp, policy: RandomizedPolicy) -> tuple[np.ndarray, np.ndarray]:
    if policy.probs.shape != (mdp.num_states, mdp.num_actions):
        raise DimensionMismatchError(
            f"policy shape {policy.probs.shape} does not match MDP "
            f"({mdp.num_states}, {mdp.num_actions})"
        )
    reward = np.einsum("sa,sa->s", policy.probs, mdp.mean_reward)
    transition = np.einsum("sa,sat->st", policy.probs, mdp.kernel)
    return reward, transition


def policy_gain(
    mdp: DiscreteMdp,
    policy: RandomizedPolicy,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """Gain of a stationary policy whose induced chain is unichain.

    Raises:
        NoConvergenceError: If policy evaluation does not reach ``tol``.
    """
    reward, transition = _policy_matrices(mdp, policy)

    def step(v: np.ndarray) -> np.ndarray:
        return reward + transition @ v

    _, gain, _ = relative_value_iteration(step, mdp.num_states, tol, max_iter)
    return gain


def limiting_matrix(transition: np.ndarray, squarings: int = 60) -> np.ndarray:
    """Cesaro limit P* of a stochastic matrix.

    Uses the lazy chain (I + P)/2, which has the same stationary structure and
    is aperiodic, raised to the power 2**squarings by repeated squaring. Rows
    are renormalized after every squaring; rounding would otherwise compound.
    """
    transition = np.asarray(transition, dtype=float)
    lazy = 0.5 * (np.eye(transition.shape[0]) + transition)
    for _ in range(squarings):
        squared = lazy @ lazy
        squared /= squared.sum(axis=1, keepdims=True)
        if np.max(np.abs(squared - lazy)) <= 1e-15:
            return squared
        lazy = squared
    return lazy


def exact_policy_gain(mdp: DiscreteMdp, policy: RandomizedPolicy) -> np.ndarray:
    """Per-state gain vector P*_pi r_pi (valid for multichain policies too)."""
    reward, transition = _policy_matrices(mdp, policy)
    return limiting_matrix(transition) @ reward


def brute_force_gain(mdp: DiscreteMdp) -> float:
    """Optimal gain by enumerating all A**S deterministic policies.

    For a weakly communicating MDP the optimal gain is the largest per-state
    gain reached by any deterministic policy. Meant for tiny instances only.
    """
    best = -np.inf
    for actions in itertools.product(range(mdp.num_actions), repeat=mdp.num_states):
        policy = RandomizedPolicy.deterministic(actions, mdp.num_actions)
        best = max(best, float(exact_policy_gain(mdp, policy).max()))
    return best
