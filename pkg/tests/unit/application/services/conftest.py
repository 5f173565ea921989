"""Fixtures for application service tests."""

from __future__ import annotations

import numpy as np
import pytest

from src.domain.models import ClosedSetDetection, Prototypes, Scene

from .wall import CAR_GT, WALL_GT, WALL_PROPOSAL, background_points, wall_points


@pytest.fixture
def protos() -> Prototypes:
    return Prototypes(num_classes=3)


@pytest.fixture
def wall_cloud() -> np.ndarray:
    return np.vstack([wall_points(), background_points()])


@pytest.fixture
def wall_scene(wall_cloud: np.ndarray) -> Scene:
    return Scene(scene_id="wall", points=wall_cloud.tolist(), gt_boxes=[CAR_GT, WALL_GT])


@pytest.fixture
def wall_detections(protos: Prototypes) -> list[ClosedSetDetection]:
    """A confident car (EDS 36) and a wall detection at the embedding origin (EDS 27)."""
    return [
        ClosedSetDetection(box=CAR_GT, embedding=protos.vector(1).tolist()),
        ClosedSetDetection(box=WALL_PROPOSAL, embedding=[0.0, 0.0, 0.0]),
    ]
