"""Built-in environments.

Discrete:
- :class:`DiscreteEnvironment` samples from a :class:`DiscreteMdp`
- :func:`random_mdp`, :func:`two_cycle`, :func:`chain_env` build the models

Continuous on [0, 1]:
- :class:`SmoothEnv` (:func:`smooth_env`), a reflected Gaussian random walk
  with action-dependent cosine reward means and analytic Holder constants
- :class:`PiecewiseConstantEnv`, a DiscreteMdp played on interval centres

Every ``step`` draws exactly two uniforms from the generator it is given, one
for the reward and one for the next state, except :class:`SmoothEnv` which
draws one uniform and one standard normal.
"""

from __future__ import annotations

import math
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Literal

import numpy as np
import structlog
import yaml
from scipy.stats import norm

from scal_plus.continuous import Discretization
from scal_plus.errors import BadGammaError, BadParamsError
from scal_plus.interfaces import Environment, HolderEnv
from scal_plus.mdp import solve_gain_bias, validate
from scal_plus.models import DiscreteMdp

logger = structlog.get_logger(__name__)

RewardMode = Literal["bernoulli", "deterministic"]

GAIN_PINS_PATH = Path(__file__).parent / "data" / "gain_pins.yaml"
FINE_GRID_CELLS = 2000

CHAIN_LEFT_REWARD = 0.05
CHAIN_RIGHT_REWARD = 1.0
CHAIN_UP = 0.6
CHAIN_DOWN = 0.05

SMOOTH_DRIFT = 0.0
SMOOTH_MAX_AMPLITUDE = 0.4


def _sample_reward(mean: float, r_max: float, u: float, mode: RewardMode) -> float:
    if mode == "deterministic":
        return mean
    return r_max if u < mean / r_max else 0.0


class DiscreteEnvironment(Environment[int]):
    """Samples rewards and transitions of a discrete MDP.

    Rewards are Bernoulli on {0, r_max} with the model's mean, or the mean
    itself in ``deterministic`` mode. The next state is drawn by inverse CDF.

    Args:
        mdp: A validated model.
        reward_mode: "bernoulli" or "deterministic".
        initial_state: State at t = 1.
        optimal_gain: Known g*; solved with the oracle when omitted.
    """

    def __init__(
        self,
        mdp: DiscreteMdp,
        reward_mode: RewardMode = "bernoulli",
        initial_state: int = 0,
        optimal_gain: float | None = None,
    ) -> None:
        validate(mdp)
        if not 0 <= initial_state < mdp.num_states:
            raise BadParamsError(f"initial_state {initial_state} out of range")
        self.mdp = mdp
        self.reward_mode = reward_mode
        self.num_states = mdp.num_states
        self.num_actions = mdp.num_actions
        self.r_max = mdp.r_max
        self._initial_state = initial_state
        self._known_gain = optimal_gain
        self._cdf = np.cumsum(mdp.kernel, axis=2)
        support = mdp.kernel > 0.0
        # last state with positive mass, guards against cdf rounding below 1
        self._last = mdp.num_states - 1 - np.argmax(support[:, :, ::-1], axis=2)

    def initial_state(self) -> int:
        return self._initial_state

    def step(self, state: int, action: int, rng: np.random.Generator) -> tuple[float, int]:
        reward = _sample_reward(
            float(self.mdp.mean_reward[state, action]), self.r_max, rng.random(), self.reward_mode
        )
        index = int(np.searchsorted(self._cdf[state, action], rng.random(), side="right"))
        return reward, min(index, int(self._last[state, action]))

    @cached_property
    def optimal_gain(self) -> float:
        if self._known_gain is not None:
            return self._known_gain
        return solve_gain_bias(self.mdp).gain


def random_mdp(
    num_states: int,
    num_actions: int,
    gamma: int,
    seed: int,
    r_max: float = 1.0,
) -> DiscreteMdp:
    """Random MDP with exactly ``gamma`` reachable next states per (s, a).

    The support always contains s+1 mod S, so every policy can cycle through
    all states. Weights are 0.1/gamma + 0.9·Dirichlet(1), rewards uniform on
    [0, r_max].

    Raises:
        BadGammaError: If ``gamma`` is not in 1..S.
    """
    if not 1 <= gamma <= num_states:
        raise BadGammaError(f"gamma must be in 1..{num_states}, got {gamma}")
    if num_actions < 1:
        raise BadParamsError("num_actions must be positive")
    rng = np.random.default_rng(seed)
    kernel = np.zeros((num_states, num_actions, num_states))
    for s in range(num_states):
        forced = (s + 1) % num_states
        others = np.array([j for j in range(num_states) if j != forced])
        for a in range(num_actions):
            extra = rng.choice(others, size=gamma - 1, replace=False) if gamma > 1 else []
            support = np.concatenate([[forced], extra]).astype(int)
            weights = 0.1 / gamma + 0.9 * rng.dirichlet(np.ones(gamma))
            kernel[s, a, support] = weights / weights.sum()
    rewards = rng.uniform(0.0, r_max, size=(num_states, num_actions))
    return DiscreteMdp(kernel=kernel, mean_reward=rewards, r_max=r_max)


def two_cycle() -> DiscreteMdp:
    """Two states visited alternately under a single action; rewards 0 then 1."""
    kernel = np.array([[[0.0, 1.0]], [[1.0, 0.0]]])
    return DiscreteMdp(kernel=kernel, mean_reward=[[0.0], [1.0]], r_max=1.0)


def chain_env(num_states: int = 6) -> DiscreteMdp:
    """River-swim chain with actions 0 = left, 1 = right.

    Left always moves one state left (stays at 0) and pays 0.05 at state 0.
    Right moves up with probability 0.6; it stays otherwise at state 0,
    falls back with probability 0.05 in interior states and 0.4 at the last
    state, where it pays 1.

    Raises:
        BadParamsError: If ``num_states`` < 2.
    """
    if num_states < 2:
        raise BadParamsError(f"chain needs at least 2 states, got {num_states}")
    last = num_states - 1
    kernel = np.zeros((num_states, 2, num_states))
    rewards = np.zeros((num_states, 2))
    for s in range(num_states):
        kernel[s, 0, max(s - 1, 0)] = 1.0
        if s == 0:
            kernel[s, 1, 1] = CHAIN_UP
            kernel[s, 1, 0] = 1.0 - CHAIN_UP
        elif s == last:
            kernel[s, 1, s] = CHAIN_UP
            kernel[s, 1, s - 1] = 1.0 - CHAIN_UP
        else:
            kernel[s, 1, s + 1] = CHAIN_UP
            kernel[s, 1, s - 1] = CHAIN_DOWN
            kernel[s, 1, s] = 1.0 - CHAIN_UP - CHAIN_DOWN
    rewards[0, 0] = CHAIN_LEFT_REWARD
    rewards[last, 1] = CHAIN_RIGHT_REWARD
    return DiscreteMdp(kernel=kernel, mean_reward=rewards, r_max=1.0)


def reflect(x: float) -> float:
    """Fold a real number into [0, 1] by reflection at 0 and 1."""
    y = x % 2.0
    return 2.0 - y if y > 1.0 else y


def pin_prefix(L: float, alpha: float, drift: float = SMOOTH_DRIFT) -> str:
    return f"smooth:L={float(L)!r}:alpha={float(alpha)!r}:drift={float(drift)!r}"


def pin_key(
    L: float, alpha: float, cells: int = FINE_GRID_CELLS, drift: float = SMOOTH_DRIFT
) -> str:
    return f"{pin_prefix(L, alpha, drift)}:cells={cells}"


def load_gain_pins(path: Path = GAIN_PINS_PATH) -> dict[str, float]:
    if not path.exists():
        return {}
    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    return {str(k): float(v) for k, v in (data.get("pins") or {}).items()}


def save_gain_pins(pins: dict[str, float], path: Path = GAIN_PINS_PATH) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump({"pins": dict(sorted(pins.items()))}, f, sort_keys=False)
    return path


class SmoothEnv(HolderEnv):
    """Reflected Gaussian random walk on [0, 1] with two actions.

    The step noise has standard deviation sigma = sqrt(2/pi)/L, so the L1
    distance between the kernels at s and s' is at most L·|s - s'|. Action 1
    shifts the step mean right by ``drift`` and action 0 shifts it left.

    Rewards are Bernoulli with means 0.5 - A·cos(pi·s) for action 1 and
    0.5 + A·cos(pi·s) for action 0, where A = min(0.4, L/pi) keeps them
    L-Lipschitz. On [0, 1] an L-Lipschitz function is (L, alpha) Holder for
    every alpha in (0, 1]. Action 0 pays on the left half, action 1 on the
    right half.

    With the default ``drift = 0`` the kernel is symmetric, hence doubly
    stochastic: every policy has the uniform stationary law and
    g* = 0.5 + 2A/pi, while the uniform and constant policies earn 0.5.

    The environment is symmetric under s -> 1 - s with the actions swapped.
    """

    num_actions = 2
    r_max = 1.0

    def __init__(
        self,
        L: float = 1.0,
        alpha: float = 1.0,
        initial_state: float = 0.0,
        drift: float = SMOOTH_DRIFT,
    ):
        if not L > 0.0:
            raise BadParamsError(f"L must be positive, got {L}")
        if not 0.0 < alpha <= 1.0:
            raise BadParamsError(f"alpha must be in (0, 1], got {alpha}")
        if not 0.0 <= initial_state <= 1.0:
            raise BadParamsError(f"initial_state {initial_state} outside [0, 1]")
        if not 0.0 <= drift < 1.0:
            raise BadParamsError(f"drift must be in [0, 1), got {drift}")
        self.L = float(L)
        self.alpha = float(alpha)
        self.drift_size = float(drift)
        self.sigma = math.sqrt(2.0 / math.pi) / self.L
        self.amplitude = min(SMOOTH_MAX_AMPLITUDE, self.L / math.pi)
        self._initial_state = float(initial_state)
        self._images = np.arange(-(math.ceil(3.0 * self.sigma) + 3), math.ceil(3.0 * self.sigma) + 4)

    @property
    def holder_constants(self) -> tuple[float, float]:
        return self.L, self.alpha

    def initial_state(self) -> float:
        return self._initial_state

    def reward_mean(self, s: float | np.ndarray, action: int) -> float | np.ndarray:
        sign = -1.0 if action == 1 else 1.0
        return 0.5 + sign * self.amplitude * np.cos(np.pi * np.asarray(s))

    def drift(self, action: int) -> float:
        return self.drift_size if action == 1 else -self.drift_size

    def step(self, state: float, action: int, rng: np.random.Generator) -> tuple[float, float]:
        mean = float(self.reward_mean(state, action))
        reward = _sample_reward(mean, self.r_max, rng.random(), "bernoulli")
        x = state + self.drift(action) + self.sigma * rng.standard_normal()
        return reward, reflect(x)

    def transition_density(self, s_next: np.ndarray, state: float, action: int) -> np.ndarray:
        """Density of the next state at ``s_next`` (method of images)."""
        y = np.asarray(s_next, dtype=float)[..., None]
        mu = state + self.drift(action)
        shifts = 2.0 * self._images
        total = norm.pdf((y + shifts - mu) / self.sigma) + norm.pdf((shifts - y - mu) / self.sigma)
        return total.sum(axis=-1) / self.sigma

    def transition_cdf(self, x: np.ndarray, states: np.ndarray, action: int) -> np.ndarray:
        """P(s' <= x | s) for every pair of ``states`` (rows) and ``x`` (columns)."""
        x = np.asarray(x, dtype=float)[None, :]
        mu = np.asarray(states, dtype=float)[:, None] + self.drift(action)
        total = np.zeros((mu.shape[0], x.shape[1]))
        for k in self._images:
            total += norm.cdf((2.0 * k + x - mu) / self.sigma)
            total -= norm.cdf((2.0 * k - x - mu) / self.sigma)
        return total

    def grid_mdp(self, cells: int) -> DiscreteMdp:
        """Cell-centre discretization with exact cell transition masses."""
        grid = Discretization(cells)
        edges, centers = grid.edges(), grid.centers()
        kernel = np.empty((cells, self.num_actions, cells))
        rewards = np.empty((cells, self.num_actions))
        for a in range(self.num_actions):
            cdf = self.transition_cdf(edges, centers, a)
            mass = np.clip(np.diff(cdf, axis=1), 0.0, None)
            kernel[:, a, :] = mass / mass.sum(axis=1, keepdims=True)
            rewards[:, a] = self.reward_mean(centers, a)
        return DiscreteMdp(kernel=kernel, mean_reward=rewards, r_max=self.r_max)

    @property
    def optimal_gain(self) -> float:
        return pinned_gain(self.L, self.alpha, self.drift_size)


def fine_grid_gain(env: SmoothEnv, cells: int = FINE_GRID_CELLS) -> float:
    """Optimal gain of the ``cells``-cell discretization of ``env``."""
    return solve_gain_bias(env.grid_mdp(cells)).gain


def finest_pin(pins: dict[str, float], L: float, alpha: float, drift: float) -> float | None:
    """Pinned gain on the finest grid stored for these parameters, if any."""
    prefix = pin_prefix(L, alpha, drift) + ":cells="
    stored = {int(key[len(prefix) :]): gain for key, gain in pins.items() if key.startswith(prefix)}
    return stored[max(stored)] if stored else None


@lru_cache(maxsize=None)
def pinned_gain(L: float, alpha: float, drift: float = SMOOTH_DRIFT) -> float:
    """g* of ``SmoothEnv(L, alpha, drift=drift)`` from the pin file, computed when missing."""
    gain = finest_pin(load_gain_pins(), L, alpha, drift)
    if gain is not None:
        return gain
    logger.warning(
        "gain_pin_missing",
        key=pin_key(L, alpha, drift=drift),
        hint="run `scal-plus pin-gain` to store it",
    )
    return fine_grid_gain(SmoothEnv(L, alpha, drift=drift))


def smooth_env(L: float = 1.0, alpha: float = 1.0, drift: float = SMOOTH_DRIFT) -> SmoothEnv:
    """Built-in smooth continuous environment; see :class:`SmoothEnv`."""
    return SmoothEnv(L, alpha, drift=drift)


class PiecewiseConstantEnv(HolderEnv):
    """A discrete MDP played on [0, 1] at the centres of S equal intervals.

    State i of ``mdp`` is the point (i + 1/2)/S; any position in interval i+1
    behaves like state i. Reward and next-state draws match
    :class:`DiscreteEnvironment` exactly, so both produce the same sequence
    of interval indices from the same generator. Holder constants are (0, 1).
    """

    def __init__(self, mdp: DiscreteMdp, reward_mode: RewardMode = "bernoulli", initial_state: int = 0):
        self.discrete = DiscreteEnvironment(mdp, reward_mode, initial_state)
        self.num_states = mdp.num_states
        self.num_actions = mdp.num_actions
        self.r_max = mdp.r_max
        self.centers = Discretization(mdp.num_states).centers()

    @property
    def holder_constants(self) -> tuple[float, float]:
        return 0.0, 1.0

    def initial_state(self) -> float:
        return float(self.centers[self.discrete.initial_state()])

    def cell(self, state: float) -> int:
        return min(int(state * self.num_states), self.num_states - 1)

    def step(self, state: float, action: int, rng: np.random.Generator) -> tuple[float, float]:
        reward, index = self.discrete.step(self.cell(state), action, rng)
        return reward, float(self.centers[index])

    @property
    def optimal_gain(self) -> float:
        return self.discrete.optimal_gain
