"""Event system for decoupled progress reporting.

Implements Observer pattern with typed event bus. Training and experiment
code emit events; the CLI subscribes a ProgressLogger.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from pragmatic_colors.infrastructure.logger import LoggerMixin, get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class DomainEvent:
    """Immutable domain event.

    Attributes:
        event_type: Event type identifier
        payload: Event data dictionary
    """

    event_type: str
    payload: Optional[Dict[str, Any]] = None


class EventObserver(ABC):
    """Abstract base class for event observers."""

    @abstractmethod
    def on_event(self, event: DomainEvent) -> None:
        """Handle a domain event.

        Args:
            event: The event to handle
        """
        raise NotImplementedError


class EventBus:
    """Event bus with typed and global subscribers.

    Errors in subscribers are caught and logged; they never stop
    propagation or the computation that emitted the event.
    """

    def __init__(self) -> None:
        self._subscribers: Dict[str, List[EventObserver]] = {}
        self._global_subscribers: List[EventObserver] = []

    def subscribe(self, event_type: str, observer: EventObserver) -> None:
        """Subscribe to a specific event type."""
        self._subscribers.setdefault(event_type, []).append(observer)

    def subscribe_all(self, observer: EventObserver) -> None:
        """Subscribe to all events."""
        self._global_subscribers.append(observer)

    def emit(self, event: DomainEvent) -> None:
        """Emit an event to all subscribers."""
        for observer in [*self._subscribers.get(event.event_type, []), *self._global_subscribers]:
            try:
                observer.on_event(event)
            except Exception:
                logger.exception("Event handler error", event_type=event.event_type)


class Events:
    """Standard event type constants."""

    # Training lifecycle
    TRAINING_STARTED = "training.started"
    EPOCH_COMPLETED = "epoch.completed"
    TRAINING_COMPLETED = "training.completed"

    # Experiment lifecycle
    RUN_STARTED = "run.started"
    LAMBDA_SELECTED = "lambda.selected"
    RUN_COMPLETED = "run.completed"


class ProgressLogger(LoggerMixin, EventObserver):
    """Logs training and experiment progress.

    Args:
        every: Log one in every ``every`` epochs (the last epoch is always logged)
    """

    def __init__(self, every: int = 50):
        super().__init__()
        self.every = max(1, every)

    def on_event(self, event: DomainEvent) -> None:
        payload = event.payload or {}
        if event.event_type == Events.EPOCH_COMPLETED:
            epoch = int(payload.get("epoch", 0))
            if epoch % self.every == 0 or epoch == payload.get("epochs"):
                self.logger.info("Epoch completed", **payload)
        else:
            self.logger.info(event.event_type, **payload)
