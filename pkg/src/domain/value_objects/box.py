"""Oriented 3D bounding box value object."""

from __future__ import annotations

import math
from typing import Annotated

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator

from config.settings import UNKNOWN_LABEL
from src.domain.value_objects.point import FiniteFloat

PositiveExtent = Annotated[float, Field(gt=0.0, allow_inf_nan=False)]


def normalize_yaw(yaw: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.remainder(yaw, 2.0 * math.pi)
    if wrapped <= -math.pi:
        return math.pi
    return wrapped


class Box7(BaseModel):
    """
    Yaw-oriented box [cx, cy, cz, w, l, h, yaw] with an optional class label.

    ``l`` runs along the local x axis (the heading), ``w`` along local y and
    ``h`` along z. The box is closed: boundary points are inside.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    cx: FiniteFloat
    cy: FiniteFloat
    cz: FiniteFloat
    w: PositiveExtent
    l: PositiveExtent  # noqa: E741
    h: PositiveExtent
    yaw: FiniteFloat = 0.0
    label: str | None = None

    @field_validator("yaw")
    @classmethod
    def validate_yaw(cls, v: float) -> float:
        """Normalize yaw to (-pi, pi]."""
        return normalize_yaw(v)

    @property
    def center(self) -> NDArray[np.float64]:
        """Box center as a length-3 array."""
        return np.array([self.cx, self.cy, self.cz], dtype=np.float64)

    @property
    def is_unknown(self) -> bool:
        """Whether the box carries the unknown label."""
        return self.label == UNKNOWN_LABEL

    def relabeled(self, label: str | None) -> Box7:
        """Same geometry under another label."""
        return Box7(
            cx=self.cx,
            cy=self.cy,
            cz=self.cz,
            w=self.w,
            l=self.l,
            h=self.h,
            yaw=self.yaw,
            label=label,
        )

    def same_geometry(self, other: Box7) -> bool:
        """Exact equality of the seven geometric fields."""
        return (self.cx, self.cy, self.cz, self.w, self.l, self.h, self.yaw) == (
            other.cx,
            other.cy,
            other.cz,
            other.w,
            other.l,
            other.h,
            other.yaw,
        )
