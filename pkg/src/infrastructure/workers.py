"""Scene-level worker pool with ordered results."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from config.settings import get_settings
from src.infrastructure.observability.logger import WORKER_THREAD_PREFIX

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(requested: int | None = None) -> int:
    """Explicit request, else the ``OSD_THREADS`` cap, else the CPU count."""
    if requested is not None:
        return max(1, requested)
    return get_settings().worker_count()


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int | None = None) -> list[R]:
    """
    Apply ``fn`` to every item on a thread pool.

    Results come back in input order whatever the schedule, so output is
    identical for every pool size.
    """
    count = min(resolve_workers(workers), len(items))
    if count <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=count, thread_name_prefix=WORKER_THREAD_PREFIX) as executor:
        return list(executor.map(fn, items))
