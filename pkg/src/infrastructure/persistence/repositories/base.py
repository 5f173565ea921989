"""Directory-backed document repositories keyed by scene id."""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Generic, Protocol, TypeVar

from pydantic import BaseModel

from src.infrastructure.observability import get_logger, get_metrics_collector
from src.infrastructure.persistence.documents import (
    STREAM_SUFFIX,
    read_documents,
    write_document,
)
from src.shared.exceptions import ValidationException

T = TypeVar("T", bound=BaseModel)

MANIFEST_NAME = "manifest.json"

_SAFE_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class Repository(Protocol[T]):  # type: ignore[misc]
    """Repository protocol for scene-keyed documents."""

    def save(self, entity: T) -> Path:
        """Persist an entity, replacing any document with the same id.

        Args:
            entity: Entity to store

        Returns:
            Path of the written document
        """
        ...

    def get_by_id(self, entity_id: str) -> T | None:
        """Get an entity by scene id.

        Args:
            entity_id: Scene id

        Returns:
            Entity if found, None otherwise

        Raises:
            DocumentFormatError: If the stored document is malformed
        """
        ...

    def list_all(self) -> list[T]:
        """List every stored entity, ordered by scene id."""
        ...


def check_scene_id(scene_id: str) -> str:
    """Scene ids double as file names, so they are restricted to a safe alphabet."""
    if not _SAFE_ID.match(scene_id):
        raise ValidationException(
            f"scene id {scene_id!r} is not a safe file name", field="scene_id"
        )
    return scene_id


class DirectoryRepository(ABC, Generic[T]):  # noqa: UP046
    """One ``<scene_id>.json`` document per entity under a root directory.

    ``.jsonl`` streams found in the directory are read as well, and the run
    manifest is ignored.
    """

    model: type[T]

    def __init__(self, root: Path) -> None:
        """Initialize repository over a directory.

        Args:
            root: Directory holding the documents; created on first save
        """
        self.root = root
        self.logger = get_logger(self.__class__.__name__)
        self.metrics = get_metrics_collector()

    @abstractmethod
    def entity_id(self, entity: T) -> str:
        """Scene id an entity is stored under."""

    def path_for(self, entity_id: str) -> Path:
        return self.root / f"{check_scene_id(entity_id)}.json"

    def _document_paths(self) -> list[Path]:
        if not self.root.is_dir():
            return []
        return sorted(
            path
            for path in self.root.iterdir()
            if path.is_file()
            and path.name != MANIFEST_NAME
            and path.suffix in (".json", STREAM_SUFFIX)
        )

    def _read(self, path: Path) -> list[T]:
        return read_documents(path, self.model)

    def save(self, entity: T) -> Path:
        path = write_document(self.path_for(self.entity_id(entity)), entity)
        self.metrics.increment_counter("documents_written", {"kind": self.model.__name__})
        self.logger.debug("document_written", path=str(path))
        return path

    def get_by_id(self, entity_id: str) -> T | None:
        path = self.path_for(entity_id)
        if path.is_file():
            return self._read(path)[0]
        return next((e for e in self.list_all() if self.entity_id(e) == entity_id), None)

    def list_all(self) -> list[T]:
        entities = [entity for path in self._document_paths() for entity in self._read(path)]
        entities.sort(key=self.entity_id)
        self.metrics.increment_counter(
            "documents_read", {"kind": self.model.__name__}, value=float(len(entities))
        )
        return entities

    def ids(self) -> list[str]:
        return [self.entity_id(e) for e in self.list_all()]
