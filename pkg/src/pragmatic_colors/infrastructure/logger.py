"""Logger factory for pragmatic-colors.

Provides pre-configured structlog loggers.
"""

from typing import Any, Optional

import structlog


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a pre-configured logger instance.

    Args:
        name: Logger name (typically __name__ from calling module)

    Returns:
        Configured structlog BoundLogger

    Example:
        >>> logger = get_logger(__name__)
        >>> logger.info("Embeddings loaded", entries=400000, dim=300)
    """
    logger: structlog.stdlib.BoundLogger = structlog.get_logger(name)
    return logger


class LoggerMixin:
    """Mixin class to add a lazily created logger to any class.

    Example:
        >>> class ProgressLogger(LoggerMixin):
        ...     def report(self):
        ...         self.logger.info("epoch done")
    """

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        """Initialize logger mixin."""
        super().__init__(*args, **kwargs)
        self._logger: Optional[structlog.stdlib.BoundLogger] = None

    @property
    def logger(self) -> structlog.stdlib.BoundLogger:
        """Get logger instance (lazy initialization)."""
        if self._logger is None:
            self._logger = get_logger(self.__class__.__module__)
        return self._logger
