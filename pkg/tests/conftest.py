"""Shared test fixtures."""  # noqa: I002

import os
from collections.abc import Iterator

import pytest

from config.settings import SynthConfig, reset_settings
from src.infrastructure.observability import MetricsCollector, configure_metrics


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """Resolve settings from defaults only, freshly for every test."""
    for name in list(os.environ):
        if name.startswith("OSD_"):
            monkeypatch.delenv(name)
    monkeypatch.setenv("ENV_FILE", "/nonexistent/osd-test.env")
    reset_settings()
    yield
    reset_settings()


@pytest.fixture(autouse=True)
def metrics() -> MetricsCollector:
    """A fresh metrics registry per test."""
    return configure_metrics("osd")


@pytest.fixture
def small_synth() -> SynthConfig:
    """A coarse, fast scanner with a few objects per scene."""
    return SynthConfig(
        seed=11,
        scenes=3,
        objects_per_scene=(2, 4),
        azimuth_resolution_deg=0.5,
        elevation_resolution_deg=0.8,
        range_limits=(6.0, 15.0),
        min_object_points=10,
        max_column_spacing=100.0,
    )
