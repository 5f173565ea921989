"""Structured logging for command runs, built on structlog."""

from __future__ import annotations

import logging
import sys
import threading
from typing import TYPE_CHECKING, Any

import structlog

if TYPE_CHECKING:
    from structlog.typing import EventDict, Processor
else:
    EventDict = dict[str, Any]

SERVICE_NAME = "open-set-lidar-detection"
WORKER_THREAD_PREFIX = "osd-scene"


def add_application_context(
    logger: structlog.stdlib.BoundLogger, name: str, event_dict: EventDict
) -> EventDict:
    """Stamp service, environment and component, plus the pool worker when there is one.

    Args:
        logger: The structlog logger instance
        name: The method name being called
        event_dict: The current event dictionary

    Returns:
        The event dictionary with run context filled in where absent
    """
    try:
        from config.settings import get_settings

        settings = get_settings()
        service, environment = settings.app_name, settings.environment.value
    except Exception:
        # Settings may be invalid while the CLI is still reporting that very problem
        service, environment = SERVICE_NAME, "unknown"

    event_dict.setdefault("service", service)
    event_dict.setdefault("environment", environment)
    event_dict.setdefault("component", "cli")

    thread = threading.current_thread().name
    if thread.startswith(WORKER_THREAD_PREFIX):
        event_dict.setdefault("worker", thread)
    return event_dict


def _renderer(environment: str) -> Processor:
    if environment == "development":
        return structlog.dev.ConsoleRenderer(
            colors=sys.stderr.isatty(),
            exception_formatter=structlog.dev.plain_traceback,
        )
    return structlog.processors.JSONRenderer(sort_keys=True)


def configure_logging(log_level: str, environment: str) -> None:
    """Configure structured logging for one command run.

    Records go to stderr, one per line: a console rendering in development
    and sorted-key JSON everywhere else. Values bound with
    ``bind_command`` appear on every record of the main thread.

    Args:
        log_level: Level name (DEBUG, INFO, WARNING, ERROR, CRITICAL); unknown names mean INFO
        environment: Application environment (development, testing, production)
    """
    level = logging.getLevelNamesMapping().get(log_level.upper(), logging.INFO)
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level, force=True)

    processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.filter_by_level,
        add_application_context,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        _renderer(environment),
    ]
    structlog.configure(
        processors=processors,
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        context_class=dict,
        cache_logger_on_first_use=True,
    )


def bind_command(command: str) -> None:
    """Tag subsequent records of this thread with the running command."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(command=command)


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a structured logger instance.

    Args:
        name: Logger name (typically module name)

    Returns:
        Configured structured logger
    """
    return structlog.get_logger(name)
