"""Observability infrastructure components."""

from .logger import bind_command, configure_logging, get_logger
from .metrics import MetricsCollector, configure_metrics, get_metrics_collector

__all__ = [
    "MetricsCollector",
    "bind_command",
    "configure_logging",
    "configure_metrics",
    "get_logger",
    "get_metrics_collector",
]
