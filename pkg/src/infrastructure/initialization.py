"""Per-process infrastructure setup for command runs."""

from __future__ import annotations

from config.settings import ApplicationSettings
from src.infrastructure.observability import configure_logging, configure_metrics, get_logger


def initialize_infrastructure(settings: ApplicationSettings, log_level: str | None = None) -> None:
    """
    Configure logging and install a fresh metrics registry.

    Args:
        settings: Resolved application settings
        log_level: Overrides ``settings.observability.log_level`` when given
    """
    configure_logging(
        log_level or settings.observability.log_level, settings.environment.value
    )
    configure_metrics(settings.observability.metrics_namespace)
    get_logger(__name__).debug(
        "infrastructure_initialized",
        environment=settings.environment.value,
        workers=settings.worker_count(),
    )
