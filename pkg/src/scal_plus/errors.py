"""Exception hierarchy for scal_plus.

Every error raised on purpose by the library derives from ScalPlusError so
callers (the harness and the CLI in particular) can separate library failures
from programming errors.
"""

from __future__ import annotations


class ScalPlusError(Exception):
    """Base exception for scal_plus errors."""
    pass


# MDP model errors

class MdpError(ScalPlusError):
    """Error in a discrete MDP model."""
    pass


class NonStochasticRowError(MdpError):
    """A kernel row is negative somewhere or does not sum to one."""

    def __init__(self, state: int, action: int, total: float) -> None:
        self.state = state
        self.action = action
        self.total = total
        super().__init__(
            f"kernel row ({state}, {action}) is not a distribution (sum={total!r})"
        )


class RewardOutOfRangeError(MdpError):
    """A reward (mean or sample) lies outside [0, r_max]."""

    def __init__(self, state: int, action: int, reward: float, r_max: float) -> None:
        self.state = state
        self.action = action
        self.reward = reward
        self.r_max = r_max
        super().__init__(
            f"reward {reward!r} at ({state}, {action}) outside [0, {r_max!r}]"
        )


class DimensionMismatchError(ScalPlusError, ValueError):
    """A vector or array does not match the model dimensions."""
    pass


class EmptyVectorError(ScalPlusError, ValueError):
    """An operation needing at least one entry received an empty vector."""
    pass


# Planning errors

class PlanningError(ScalPlusError):
    """Error while computing a plan or solving an optimality equation."""
    pass


class NoConvergenceError(PlanningError):
    """An iterative solver hit its iteration ceiling."""

    def __init__(self, max_iter: int, residual: float | None = None) -> None:
        self.max_iter = max_iter
        self.residual = residual
        detail = "" if residual is None else f" (last residual {residual:.3e})"
        super().__init__(f"no convergence within {max_iter} iterations{detail}")


class InfeasibleTruncationError(PlanningError):
    """No action mixture reaches the truncated value at a state."""

    def __init__(self, state: int) -> None:
        self.state = state
        super().__init__(f"truncated value unreachable at state {state}")


class FeasibilityViolationError(PlanningError):
    """The truncated operator is not globally feasible where it must be."""
    pass


class SpanPreconditionError(PlanningError, ValueError):
    """A value vector's span exceeds the span cap."""
    pass


class EpisodePlanningError(PlanningError):
    """Planning failed inside an agent episode; aborts the run."""

    def __init__(self, episode: int, t_k: int, cause: Exception) -> None:
        self.episode = episode
        self.t_k = t_k
        self.cause = cause
        super().__init__(
            f"planning failed at episode {episode} (t_k={t_k}): "
            f"{type(cause).__name__}: {cause}"
        )


# Bonus / continuous-state errors

class MissingHolderParamsError(ScalPlusError, ValueError):
    """A continuous-state computation was requested without (L, alpha)."""
    pass


class OutOfDomainError(ScalPlusError, ValueError):
    """A continuous state lies outside [0, 1]."""
    pass


# Harness errors

class HarnessError(ScalPlusError):
    """Error in environment construction or experiment execution."""
    pass


class BadGammaError(HarnessError, ValueError):
    """Requested support size is not in 1..S."""
    pass


class BadParamsError(HarnessError, ValueError):
    """Invalid environment parameters."""
    pass


class ConfigError(HarnessError, ValueError):
    """Experiment configuration cannot be loaded or is inconsistent."""
    pass


class OutputExistsError(HarnessError, FileExistsError):
    """Output files already exist and overwriting was not requested."""
    pass
