"""Scene, detection-sidecar and result repositories."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

from src.domain.models.detection import DetectionSet, OpenSetResult
from src.domain.models.scene import Scene
from src.infrastructure.persistence.documents import STREAM_SUFFIX, parse_document, peek_keys
from src.infrastructure.persistence.repositories.base import DirectoryRepository

SCENES_DIR = "scenes"
DETECTIONS_DIR = "detections"


class SceneRepository(DirectoryRepository[Scene]):
    """Ground-truth scenes."""

    model = Scene

    def entity_id(self, entity: Scene) -> str:
        return entity.scene_id


class DetectionRepository(DirectoryRepository[DetectionSet]):
    """Closed-set detection sidecars, one per scene."""

    model = DetectionSet

    def entity_id(self, entity: DetectionSet) -> str:
        return entity.scene_id


class ResultRepository(DirectoryRepository[OpenSetResult]):
    """
    Open-set results, one per scene.

    When ``known_classes`` is given, scene documents found among the results
    are read as a perfect detector's output for that scene.
    """

    model = OpenSetResult

    def __init__(self, root: Path, known_classes: Sequence[str] | None = None) -> None:
        super().__init__(root)
        self.known_classes = list(known_classes) if known_classes is not None else None

    def entity_id(self, entity: OpenSetResult) -> str:
        return entity.scene_id

    def _read(self, path: Path) -> list[OpenSetResult]:
        if self.known_classes is None:
            return super()._read(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix != STREAM_SUFFIX:
            return [self._as_result(text, str(path))]
        return [
            self._as_result(line, f"{path}:{number}")
            for number, line in enumerate(text.splitlines(), start=1)
            if line.strip()
        ]

    def _as_result(self, text: str, source: str) -> OpenSetResult:
        if "points" in peek_keys(text, source):
            scene = parse_document(text, Scene, source)
            self.logger.debug("scene_read_as_result", scene_id=scene.scene_id, source=source)
            return OpenSetResult.from_ground_truth(scene, self.known_classes or [])
        return parse_document(text, OpenSetResult, source)


class DatasetLayout:
    """A dataset directory: ``scenes/`` and ``detections/`` side by side."""

    def __init__(self, root: Path, flat: bool = False) -> None:
        self.root = root
        self.scenes = SceneRepository(root if flat else root / SCENES_DIR)
        self.detections = DetectionRepository(root / DETECTIONS_DIR)

    @classmethod
    def open(cls, root: Path) -> DatasetLayout:
        """An existing dataset; a directory without ``scenes/`` holds scene documents directly."""
        return cls(root, flat=root.is_dir() and not (root / SCENES_DIR).is_dir())
