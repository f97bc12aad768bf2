"""Event system for per-episode agent updates."""

from collections.abc import Callable
from datetime import datetime, timezone
from enum import Enum
from typing import Any

from pydantic import BaseModel, Field


class AgentEvent(str, Enum):
    """Events emitted by episodic agents."""

    EPISODE_START = "episode_start"
    EPISODE_PLANNED = "episode_planned"
    PLANNING_ERROR = "planning_error"


class EventPayload(BaseModel):
    """Payload for agent events."""

    event: AgentEvent
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    data: dict[str, Any] = Field(default_factory=dict)


EventHandler = Callable[[EventPayload], None]


class SyncEventEmitter:
    """Synchronous event emitter.

    All handlers are called in registration order, global handlers first.
    """

    def __init__(self) -> None:
        self._handlers: dict[AgentEvent, list[EventHandler]] = {}
        self._global_handlers: list[EventHandler] = []

    def on(self, event: AgentEvent, handler: EventHandler) -> None:
        """Register a handler for a specific event."""
        self._handlers.setdefault(event, []).append(handler)

    def on_all(self, handler: EventHandler) -> None:
        """Register a handler for all events."""
        self._global_handlers.append(handler)

    def off(self, event: AgentEvent, handler: EventHandler) -> None:
        """Remove a handler for a specific event."""
        if event in self._handlers and handler in self._handlers[event]:
            self._handlers[event].remove(handler)

    def emit(self, payload: EventPayload) -> None:
        """Emit an event to all registered handlers."""
        handlers = list(self._global_handlers)
        handlers.extend(self._handlers.get(payload.event, []))
        for handler in handlers:
            try:
                handler(payload)
            except Exception:
                # Handler errors never abort a simulation
                pass


def create_episode_start_event(episode: int, t_k: int) -> EventPayload:
    """Create an EPISODE_START event."""
    return EventPayload(
        event=AgentEvent.EPISODE_START,
        data={"episode": episode, "t_k": t_k},
    )


def create_episode_planned_event(
    episode: int,
    t_k: int,
    planner_gain: float,
    epsilon: float,
    iterations: int,
    gamma: float,
    mean_bonus: float,
    max_bonus: float,
) -> EventPayload:
    """Create an EPISODE_PLANNED event."""
    return EventPayload(
        event=AgentEvent.EPISODE_PLANNED,
        data={
            "episode": episode,
            "t_k": t_k,
            "planner_gain": planner_gain,
            "epsilon": epsilon,
            "iterations": iterations,
            "gamma": gamma,
            "mean_bonus": mean_bonus,
            "max_bonus": max_bonus,
        },
    )


def create_planning_error_event(
    episode: int, t_k: int, error_type: str, message: str
) -> EventPayload:
    """Create a PLANNING_ERROR event."""
    return EventPayload(
        event=AgentEvent.PLANNING_ERROR,
        data={
            "episode": episode,
            "t_k": t_k,
            "error_type": error_type,
            "message": message,
        },
    )
