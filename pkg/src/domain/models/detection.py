"""Detection entities flowing through the open-set pipeline."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

from config.settings import UNKNOWN_LABEL
from src.domain.models.scene import Scene
from src.domain.value_objects.box import Box7
from src.domain.value_objects.point import FiniteFloat

PROBABILITY_SUM_TOLERANCE = 1e-9


class ClosedSetDetection(BaseModel):
    """A closed-set detector output: a box plus its embedding."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    box: Box7
    embedding: list[FiniteFloat]
    object_id: int | None = Field(
        default=None,
        description="Synthetic ground-truth object the detection was generated from",
    )


class DetectionSet(BaseModel):
    """Closed-set detections of one scene, with the class names of the label space."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scene_id: str = Field(min_length=1)
    class_names: list[str] = Field(default_factory=list)
    detections: list[ClosedSetDetection] = Field(default_factory=list)


class Detection(BaseModel):
    """A scored detection: probabilities, naive confidence and EDS."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    box: Box7
    embedding: list[FiniteFloat] | None = None
    probs: list[FiniteFloat]
    naive_score: FiniteFloat
    eds_score: FiniteFloat = Field(ge=0.0)

    @model_validator(mode="after")
    def validate_scores(self) -> Self:
        """Probabilities sum to one and the naive score is their maximum."""
        if not self.probs:
            raise ValueError("probs cannot be empty")
        if abs(sum(self.probs) - 1.0) > PROBABILITY_SUM_TOLERANCE:
            raise ValueError("probs must sum to 1")
        if self.naive_score != max(self.probs):
            raise ValueError("naive_score must equal max(probs)")
        return self


class Diagnostics(BaseModel):
    """Per-run counters of proposals that did not yield an unknown box."""

    proposals: int = Field(default=0, ge=0)
    skipped_proposals: int = Field(default=0, ge=0)
    dropped_clusters: int = Field(default=0, ge=0)

    def __add__(self, other: Diagnostics) -> Diagnostics:
        return Diagnostics(
            proposals=self.proposals + other.proposals,
            skipped_proposals=self.skipped_proposals + other.skipped_proposals,
            dropped_clusters=self.dropped_clusters + other.dropped_clusters,
        )


class OpenSetResult(BaseModel):
    """Known detections and recovered unknown boxes of one scene."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scene_id: str = ""
    known: list[Detection] = Field(default_factory=list)
    unknown: list[Box7] = Field(default_factory=list)
    diagnostics: Diagnostics = Field(default_factory=Diagnostics)

    @model_validator(mode="after")
    def validate_unknown_labels(self) -> Self:
        """Every unknown box carries the unknown label."""
        for box in self.unknown:
            if not box.is_unknown:
                raise ValueError("unknown boxes must be labeled 'unknown'")
        return self

    @classmethod
    def from_ground_truth(cls, scene: Scene, known_classes: Sequence[str]) -> OpenSetResult:
        """A perfect detector's output: known boxes at full confidence, the rest as unknown."""
        known = [
            Detection(box=box, probs=[1.0], naive_score=1.0, eds_score=0.0)
            for box in scene.gt_boxes
            if box.label in known_classes
        ]
        unknown = [
            box.relabeled(UNKNOWN_LABEL) for box in scene.gt_boxes if box.label not in known_classes
        ]
        return cls(scene_id=scene.scene_id, known=known, unknown=unknown)
