"""Fixtures for command-line contract tests."""  # noqa: INP001, I002

import logging
from collections.abc import Callable, Iterator
from pathlib import Path

import numpy as np
import pytest
import structlog

from src.domain.models import ClosedSetDetection, DetectionSet, Prototypes, Scene
from src.domain.value_objects import Box7
from src.infrastructure.persistence.repositories import DatasetLayout

CLASS_NAMES = ["car", "pedestrian", "cyclist"]

CAR = Box7(cx=0.0, cy=-10.0, cz=-0.9, w=1.8, l=4.0, h=1.5, label="car")
WALL = Box7(cx=10.0, cy=0.0, cz=-0.25, w=2.0, l=0.2, h=1.5, label="unknown")
WALL_PROPOSAL = Box7(cx=10.0, cy=0.0, cz=-0.25, w=2.5, l=1.0, h=2.0, label="car")


@pytest.fixture(autouse=True)
def detach_log_handlers() -> Iterator[None]:
    """Commands bind logging to the captured stderr; unbind it afterwards."""
    yield
    logging.getLogger().handlers.clear()
    structlog.contextvars.clear_contextvars()


def _wall_scene() -> Scene:
    ys, zs = np.meshgrid(np.linspace(-1.0, 1.0, 21), np.linspace(-1.0, 0.5, 16), indexing="ij")
    wall = np.column_stack([np.full(ys.size, 10.0), ys.ravel(), zs.ravel()])
    return Scene(scene_id="wall", points=wall.tolist(), gt_boxes=[CAR, WALL])


def _write_dataset(root: Path, *extra: Box7) -> Path:
    car_embedding = Prototypes(num_classes=3).vector(1).tolist()
    detections = [
        ClosedSetDetection(box=CAR, embedding=car_embedding),
        ClosedSetDetection(box=WALL_PROPOSAL, embedding=[0.0, 0.0, 0.0]),
        *(ClosedSetDetection(box=box, embedding=[0.0, 0.0, 0.0]) for box in extra),
    ]
    layout = DatasetLayout(root)
    layout.scenes.save(_wall_scene())
    layout.detections.save(
        DetectionSet(scene_id="wall", class_names=CLASS_NAMES, detections=detections)
    )
    return root


@pytest.fixture
def make_dataset(tmp_path: Path) -> Callable[..., Path]:
    """
    Writes the wall scene with a confident car detection and a wall
    detection, plus one origin-embedding detection per extra box.
    """

    def make(*extra: Box7, name: str = "data") -> Path:
        return _write_dataset(tmp_path / name, *extra)

    return make


@pytest.fixture
def dataset(make_dataset: Callable[..., Path]) -> Path:
    return make_dataset()


@pytest.fixture
def coarse_scanner(monkeypatch: pytest.MonkeyPatch) -> None:
    """A low-resolution synthetic scanner so generation stays quick."""
    monkeypatch.setenv("OSD_SYNTHESIS__AZIMUTH_RESOLUTION_DEG", "1.0")
    monkeypatch.setenv("OSD_SYNTHESIS__ELEVATION_RESOLUTION_DEG", "1.0")
    monkeypatch.setenv("OSD_SYNTHESIS__MIN_OBJECT_POINTS", "10")
    monkeypatch.setenv("OSD_SYNTHESIS__MAX_COLUMN_SPACING", "100")
