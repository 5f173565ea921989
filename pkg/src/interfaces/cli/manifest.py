"""Run manifests written beside every command output."""

from __future__ import annotations

import time
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from src import __version__
from src.domain.models.detection import Diagnostics
from src.infrastructure.persistence.documents import write_document
from src.infrastructure.persistence.repositories import MANIFEST_NAME


class RunManifest(BaseModel):
    """
    What a command ran with and what it produced.

    ``configuration`` holds the fully resolved sections in their JSON form,
    so each can be validated back into its settings model.
    """

    model_config = ConfigDict(extra="forbid")

    command: str
    version: str = __version__
    configuration: dict[str, Any] = Field(default_factory=dict)
    inputs: dict[str, str] = Field(default_factory=dict)
    outputs: dict[str, str] = Field(default_factory=dict)
    duration_seconds: float = Field(default=0.0, ge=0.0)
    diagnostics: Diagnostics = Field(default_factory=Diagnostics)
    epoch_losses: list[float] | None = None
    extra: dict[str, Any] = Field(default_factory=dict)


def manifest_path(output: Path) -> Path:
    """``DIR/manifest.json`` for directory outputs, ``NAME.manifest.json`` beside files."""
    if output.is_dir() or output.suffix == "":
        return output / MANIFEST_NAME
    return output.with_suffix(".manifest.json")


class ManifestRecorder:
    """Collects manifest fields while a command runs and writes them last."""

    def __init__(self, command: str) -> None:
        self.manifest = RunManifest(command=command)
        self._started = time.perf_counter()

    def configure(self, **sections: BaseModel | list[str]) -> None:
        for name, section in sections.items():
            value = section.model_dump(mode="json") if isinstance(section, BaseModel) else section
            self.manifest.configuration[name] = value

    def write(self, output: Path) -> Path:
        self.manifest.duration_seconds = time.perf_counter() - self._started
        return write_document(manifest_path(output), self.manifest)
