"""Visit statistics and empirical model construction.

VisitStatistics keeps pre-episode counts N(s,a,s'), N(s,a) and in-episode
counts nu(s,a,s'), nu(s,a) separately; ``end_episode`` folds the latter into
the former. Empirical estimates are built from all recorded data, which at an
episode boundary (the only place agents build them) is exactly N.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
import yaml

from scal_plus.errors import RewardOutOfRangeError
from scal_plus.models import DiscreteMdp, EmpiricalModel, RandomizedPolicy


class VisitStatistics:
    """Running counts and reward moments for a finite state/action space.

    Single writer: one agent owns one instance. Snapshots returned by
    :meth:`empirical_model` are immutable and can be shared.
    """

    def __init__(self, num_states: int, num_actions: int, r_max: float = 1.0) -> None:
        if num_states < 1 or num_actions < 1:
            raise ValueError("statistics need at least one state and one action")
        if r_max <= 0.0:
            raise ValueError("r_max must be positive")
        self.num_states = num_states
        self.num_actions = num_actions
        self.r_max = float(r_max)
        self.n_sas = np.zeros((num_states, num_actions, num_states), dtype=np.int64)
        self.n_sa = np.zeros((num_states, num_actions), dtype=np.int64)
        self.nu_sas = np.zeros_like(self.n_sas)
        self.nu_sa = np.zeros_like(self.n_sa)
        self.reward_sum = np.zeros((num_states, num_actions))
        self.reward_sq_sum = np.zeros((num_states, num_actions))
        self.t = 1
        self.t_k = 1

    def record(self, state: int, action: int, reward: float, next_state: int) -> None:
        """Count one transition in the current episode.

        Raises:
            RewardOutOfRangeError: If ``reward`` is outside [0, r_max].
        """
        if not 0.0 <= reward <= self.r_max:
            raise RewardOutOfRangeError(state, action, reward, self.r_max)
        self.nu_sa[state, action] += 1
        self.nu_sas[state, action, next_state] += 1
        self.reward_sum[state, action] += reward
        self.reward_sq_sum[state, action] += reward * reward
        self.t += 1

    def end_episode(self) -> None:
        """N <- N + nu, nu <- 0, and the next episode starts at the current step."""
        self.n_sa += self.nu_sa
        self.n_sas += self.nu_sas
        self.nu_sa.fill(0)
        self.nu_sas.fill(0)
        self.t_k = self.t

    def total_counts(self) -> tuple[np.ndarray, np.ndarray]:
        """(N(s,a,s') + nu(s,a,s'), N(s,a) + nu(s,a))."""
        return self.n_sas + self.nu_sas, self.n_sa + self.nu_sa

    def empirical_model(self, reference_state: int = 0) -> EmpiricalModel:
        """Empirical means, the biased estimator p_hat and reward variance.

        Unvisited pairs get p_bar = p_hat = indicator of the reference state,
        r_bar = 0 and variance = 0. Otherwise
        ``p_hat = (N(s,a,.) + 1{. = ref}) / (N(s,a) + 1)`` and the variance is
        the population variance of the observed rewards.
        """
        if not 0 <= reference_state < self.num_states:
            raise ValueError(f"reference_state {reference_state} out of range")
        n_sas, n_sa = self.total_counts()
        visited = n_sa > 0
        safe_n = np.where(visited, n_sa, 1).astype(float)

        indicator = np.zeros(self.num_states)
        indicator[reference_state] = 1.0

        p_bar = np.where(visited[:, :, None], n_sas / safe_n[:, :, None], indicator)
        r_bar = np.where(visited, self.reward_sum / safe_n, 0.0)
        second_moment = np.where(visited, self.reward_sq_sum / safe_n, 0.0)
        variance = np.maximum(second_moment - r_bar**2, 0.0)
        p_hat = (n_sas + indicator) / (n_sa + 1.0)[:, :, None]
        return EmpiricalModel(
            p_bar=p_bar,
            r_bar=r_bar,
            p_hat=p_hat,
            variance=variance,
            counts=n_sa,
            reference_state=reference_state,
        )

    def contraction_bound(self, reference_state: int = 0) -> float:
        """gamma_k = 1 - min_{s,a} (N(s,a,ref) + 1) / (N(s,a) + 1)."""
        n_sas, n_sa = self.total_counts()
        eta = ((n_sas[:, :, reference_state] + 1.0) / (n_sa + 1.0)).min()
        return float(1.0 - eta)

    def snapshot(self, reference_state: int = 0) -> dict[str, Any]:
        """Counts and empirical model as plain lists, for debugging dumps."""
        model = self.empirical_model(reference_state)
        return {
            "num_states": self.num_states,
            "num_actions": self.num_actions,
            "t": self.t,
            "t_k": self.t_k,
            "n_sa": self.n_sa.tolist(),
            "nu_sa": self.nu_sa.tolist(),
            "n_sas": self.n_sas.tolist(),
            "reward_sum": self.reward_sum.tolist(),
            "reward_sq_sum": self.reward_sq_sum.tolist(),
            "empirical": {
                "reference_state": reference_state,
                "r_bar": model.r_bar.tolist(),
                "variance": model.variance.tolist(),
                "p_hat": model.p_hat.tolist(),
            },
        }

    def dump(self, path: str | Path, reference_state: int = 0) -> Path:
        """Write :meth:`snapshot` as YAML. The layout is not a stable format."""
        path = Path(path)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.snapshot(reference_state), f, sort_keys=False)
        return path


def augment(mdp: DiscreteMdp) -> DiscreteMdp:
    """Duplicate every action with the same kernel and zero reward.

    Action ``a`` keeps its reward; action ``A + a`` is its zero-reward copy.
    """
    kernel = np.concatenate([mdp.kernel, mdp.kernel], axis=1)
    reward = np.concatenate([mdp.mean_reward, np.zeros_like(mdp.mean_reward)], axis=1)
    return DiscreteMdp(kernel=kernel, mean_reward=reward, r_max=mdp.r_max)


def project_policy(aug_policy: RandomizedPolicy) -> RandomizedPolicy:
    """Fold a policy over the 2A augmented actions back onto the A originals."""
    probs = aug_policy.probs
    if probs.shape[1] % 2:
        raise ValueError(f"augmented policy needs an even action count, got {probs.shape[1]}")
    half = probs.shape[1] // 2
    return RandomizedPolicy(probs=probs[:, :half] + probs[:, half:])
