"""Span-constrained planning (ScOpt).

T_c applies the optimal Bellman operator and then truncates every entry above
``min(Lv) + c``, so ``span(T_c v) <= c``. ScOpt is relative value iteration
with T_c in place of L; its output policy is the constrained-greedy mixture of
at most two actions per state that realises T_c v exactly.
"""

from __future__ import annotations

import math

import numpy as np
import structlog

from scal_plus.errors import (
    FeasibilityViolationError,
    InfeasibleTruncationError,
    NoConvergenceError,
    SpanPreconditionError,
)
from scal_plus.mdp import bellman, check_vector, q_values, span
from scal_plus.models import DiscreteMdp, RandomizedPolicy, ScOptConfig, ScOptResult

logger = structlog.get_logger(__name__)

FEASIBILITY_TOL = 1e-12
SPAN_TOL = 1e-12


def truncated_operator(mdp: DiscreteMdp, v: np.ndarray, c: float) -> np.ndarray:
    """T_c v = min(Lv, min(Lv) + c) componentwise."""
    lv = bellman(mdp, v)
    return np.minimum(lv, lv.min() + c)


def global_feasibility(mdp: DiscreteMdp, v: np.ndarray, c: float) -> bool:
    """Whether every state has an action whose q-value is at most min(Lv) + c.

    Raises:
        SpanPreconditionError: If span(v) > c.
    """
    v = check_vector(mdp, v)
    if span(v) > c + SPAN_TOL:
        raise SpanPreconditionError(f"span(v) = {span(v)!r} exceeds cap {c!r}")
    q = q_values(mdp, v)
    ceiling = q.max(axis=1).min() + c
    return bool(np.all(q.min(axis=1) <= ceiling + FEASIBILITY_TOL))


def constrained_greedy(mdp: DiscreteMdp, v: np.ndarray, c: float) -> RandomizedPolicy:
    """Policy pi with r_pi + P_pi v = T_c v, mixing at most two actions per state.

    Untruncated states play the argmax action (lowest index on ties). A
    truncated state mixes the argmax action with the lowest q-value action,
    weight ``mu = (target - q_low) / (q_high - q_low)`` on the argmax.

    Raises:
        InfeasibleTruncationError: If some state's smallest q-value is above its
            truncated target (global feasibility was not checked).
    """
    q = q_values(mdp, v)
    lv = q.max(axis=1)
    target = np.minimum(lv, lv.min() + c)
    probs = np.zeros_like(q)
    for s in range(mdp.num_states):
        a_high = int(np.argmax(q[s]))
        if lv[s] <= target[s]:
            probs[s, a_high] = 1.0
            continue
        a_low = int(np.argmin(q[s]))
        q_high, q_low = q[s, a_high], q[s, a_low]
        if q_low > target[s] + FEASIBILITY_TOL:
            raise InfeasibleTruncationError(s)
        mu = 1.0 if q_high == q_low else (target[s] - q_low) / (q_high - q_low)
        mu = min(1.0, max(0.0, mu))
        probs[s, a_high] += mu
        probs[s, a_low] += 1.0 - mu
    return RandomizedPolicy(probs=probs)


def ergodic_coefficient(mdp: DiscreteMdp) -> float:
    """1 - min over (s,a), (u,b) pairs of sum_j min(p(j|s,a), p(j|u,b))."""
    rows = mdp.kernel.reshape(-1, mdp.num_states)
    overlap = np.minimum(rows[:, None, :], rows[None, :, :]).sum(axis=2)
    return float(min(1.0, max(0.0, 1.0 - overlap.min())))


def iteration_bound(accuracy: float, gamma: float) -> float:
    """A-priori iteration count log(eps) / log(gamma) (inf when gamma = 1)."""
    if gamma >= 1.0:
        return math.inf
    if gamma <= 0.0:
        return 1.0
    return max(1.0, math.ceil(math.log(accuracy) / math.log(gamma)))


def scopt(
    mdp: DiscreteMdp,
    cfg: ScOptConfig,
    contraction_factor: float | None = None,
) -> ScOptResult:
    """Relative value iteration with T_c from v_0 = 0.

    Iterates ``v_{n+1} = T_c v_n - (T_c v_n)(ref)`` until
    ``span(T_c v_n - v_n) <= accuracy`` and returns v_n, the gain estimate
    ``(max + min)/2`` of ``T_c v_n - v_n`` and the constrained-greedy policy
    at v_n.

    Args:
        mdp: Planning MDP; expected contractive, unichain and globally feasible
            (augmented empirical MDPs are by construction).
        cfg: Span cap, accuracy, reference state and iteration ceiling.
        contraction_factor: Certified bound on the ergodic coefficient; computed
            exactly when omitted.

    Raises:
        ValueError: If the reference state is not a state of ``mdp``.
        FeasibilityViolationError: If T_c is not globally feasible at v_0 (or at
            any iterate when ``cfg.debug`` is set).
        NoConvergenceError: If ``cfg.max_iter`` iterations are not enough.
    """
    num_states = mdp.num_states
    ref = cfg.reference_state
    if ref >= num_states:
        raise ValueError(f"reference_state {ref} out of range for {num_states} states")
    c = cfg.span_cap
    gamma = ergodic_coefficient(mdp) if contraction_factor is None else contraction_factor

    v = np.zeros(num_states)
    if not global_feasibility(mdp, v, c):
        raise FeasibilityViolationError("truncated operator infeasible at v_0 = 0")

    reward = mdp.mean_reward
    kernel = mdp.kernel
    max_iterate_span = 0.0
    residual = np.inf
    for iteration in range(1, cfg.max_iter + 1):
        if cfg.debug and not global_feasibility(mdp, v, c):
            raise FeasibilityViolationError(f"truncated operator infeasible at iterate {iteration}")
        lv = (reward + kernel @ v).max(axis=1)
        tv = np.minimum(lv, lv.min() + c)
        diff = tv - v
        high, low = float(diff.max()), float(diff.min())
        residual = high - low
        if residual <= cfg.accuracy:
            break
        v = tv - tv[ref]
        max_iterate_span = max(max_iterate_span, span(v))
    else:
        raise NoConvergenceError(cfg.max_iter, residual)

    policy = constrained_greedy(mdp, v, c)
    logger.debug("scopt_converged", iterations=iteration, gain=0.5 * (high + low), gamma=gamma)
    return ScOptResult(
        value=v,
        gain_estimate=0.5 * (high + low),
        policy=policy,
        iterations=iteration,
        contraction_factor=float(min(1.0, max(0.0, gamma))),
        iteration_bound=iteration_bound(cfg.accuracy, gamma),
        max_iterate_span=max_iterate_span,
    )
