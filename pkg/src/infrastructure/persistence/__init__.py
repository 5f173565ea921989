"""Persistence layer infrastructure components."""

from .documents import (
    dump_document,
    load_scene,
    parse_document,
    read_document,
    read_documents,
    read_stream,
    save_scene,
    write_document,
    write_stream,
)
from .repositories import (
    MANIFEST_NAME,
    DatasetLayout,
    DetectionRepository,
    ResultRepository,
    SceneRepository,
)

__all__ = [
    "MANIFEST_NAME",
    "DatasetLayout",
    "DetectionRepository",
    "ResultRepository",
    "SceneRepository",
    "dump_document",
    "load_scene",
    "parse_document",
    "read_document",
    "read_documents",
    "read_stream",
    "save_scene",
    "write_document",
    "write_stream",
]
