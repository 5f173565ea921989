"""
JSON documents for scenes, detections, results, models and reports.

One UTF-8 document per file, or one per line in ``.jsonl`` streams.
Floats are written in shortest round-trip form, so loading a saved
document reproduces every field exactly. Validation failures surface as
:class:`DocumentFormatError` carrying the JSON path or line/column of the
first problem.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError
from pydantic_core import from_json

from src.domain.models.scene import Scene
from src.shared.exceptions import DocumentFormatError

M = TypeVar("M", bound=BaseModel)

STREAM_SUFFIX = ".jsonl"

_LINE_COLUMN = re.compile(r"line (\d+) column (\d+)")


def _json_path(loc: Sequence[int | str]) -> str:
    path = "$"
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def _position(error: Any, source: str) -> str:
    """``source:line:column`` for syntax errors, ``source:$.json.path`` otherwise."""
    if error["type"] == "json_invalid":
        found = _LINE_COLUMN.search(str(error.get("ctx", {}).get("error", "")))
        if found:
            return f"{source}:{found.group(1)}:{found.group(2)}"
        return source
    return f"{source}:{_json_path(error['loc'])}"


def parse_document(text: str | bytes, model: type[M], source: str = "<document>") -> M:
    """
    Validate one JSON document against ``model``.

    Raises:
        DocumentFormatError: Invalid JSON or a field violating the model
    """
    try:
        return model.model_validate_json(text)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise DocumentFormatError(
            f"invalid {model.__name__} document: {first['msg']}",
            position=_position(first, source),
        ) from exc


def dump_document(document: BaseModel) -> str:
    """Compact JSON text with a trailing newline."""
    return document.model_dump_json() + "\n"


def read_document(path: Path, model: type[M]) -> M:
    """Read and validate a single document file."""
    return parse_document(path.read_bytes(), model, source=str(path))


def write_document(path: Path, document: BaseModel) -> Path:
    """Write a document file, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_document(document), encoding="utf-8")
    return path


def read_stream(path: Path, model: type[M]) -> list[M]:
    """Read a newline-delimited stream; blank lines are skipped."""
    documents: list[M] = []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            documents.append(model.model_validate_json(line))
        except ValidationError as exc:
            first = exc.errors()[0]
            if first["type"] == "json_invalid":
                found = _LINE_COLUMN.search(str(first.get("ctx", {}).get("error", "")))
                column = found.group(2) if found else "0"
                position = f"{path}:{number}:{column}"
            else:
                position = f"{path}:{number}:{_json_path(first['loc'])}"
            raise DocumentFormatError(
                f"invalid {model.__name__} document: {first['msg']}", position=position
            ) from exc
    return documents


def write_stream(path: Path, documents: Iterable[BaseModel]) -> Path:
    """Write one compact document per line."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(dump_document(d) for d in documents), encoding="utf-8")
    return path


def read_documents(path: Path, model: type[M]) -> list[M]:
    """A ``.jsonl`` stream or a single-document file, as a list."""
    if path.suffix == STREAM_SUFFIX:
        return read_stream(path, model)
    return [read_document(path, model)]


def peek_keys(text: str | bytes, source: str = "<document>") -> set[str]:
    """Top-level keys of a JSON object, for telling document kinds apart."""
    try:
        value = from_json(text)
    except ValueError as exc:
        found = _LINE_COLUMN.search(str(exc))
        position = f"{source}:{found.group(1)}:{found.group(2)}" if found else source
        raise DocumentFormatError(f"invalid JSON: {exc}", position=position) from exc
    if not isinstance(value, dict):
        raise DocumentFormatError("document must be a JSON object", position=f"{source}:$")
    return set(value)


def save_scene(scene: Scene, destination: Path) -> Path:
    """Write a scene document."""
    return write_document(destination, scene)


def load_scene(source: Path) -> Scene:
    """
    Load a scene document.

    Raises:
        DocumentFormatError: The document is malformed or violates a scene
            or box invariant
    """
    return read_document(source, Scene)
