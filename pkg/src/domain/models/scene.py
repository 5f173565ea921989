"""Scene entity: a point cloud with its ground-truth boxes."""

from __future__ import annotations

from typing import Self

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.domain.value_objects.box import Box7
from src.domain.value_objects.point import FiniteFloat

Coordinates = tuple[FiniteFloat, FiniteFloat, FiniteFloat]


class Scene(BaseModel):
    """
    One LIDAR sweep.

    ``gt_boxes`` labels include "unknown" for classes held out of training.
    ``point_object_ids`` is optional per-point ground truth (-1 for
    background), present for synthetic scenes.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    scene_id: str = Field(min_length=1)
    points: list[Coordinates] = Field(default_factory=list)
    gt_boxes: list[Box7] = Field(default_factory=list)
    point_object_ids: list[int] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_object_ids(self) -> Self:
        """Object ids are absent or one per point."""
        if self.point_object_ids and len(self.point_object_ids) != len(self.points):
            raise ValueError("point_object_ids must be empty or match the number of points")
        return self

    def cloud(self) -> NDArray[np.float64]:
        """Points as an (N, 3) array."""
        return np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
