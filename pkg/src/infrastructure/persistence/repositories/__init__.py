"""Directory-backed repositories."""

from __future__ import annotations

from .base import MANIFEST_NAME, DirectoryRepository, Repository, check_scene_id
from .scene_repository import (
    DETECTIONS_DIR,
    SCENES_DIR,
    DatasetLayout,
    DetectionRepository,
    ResultRepository,
    SceneRepository,
)

__all__ = [
    "DETECTIONS_DIR",
    "MANIFEST_NAME",
    "SCENES_DIR",
    "DatasetLayout",
    "DetectionRepository",
    "DirectoryRepository",
    "Repository",
    "ResultRepository",
    "SceneRepository",
    "check_scene_id",
]
