"""Point value object for LIDAR returns."""

from __future__ import annotations

from typing import Annotated

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

FiniteFloat = Annotated[float, Field(allow_inf_nan=False)]


class Point3(BaseModel):
    """A point of the cloud in meters, sensor frame."""

    model_config = ConfigDict(frozen=True)

    x: FiniteFloat
    y: FiniteFloat
    z: FiniteFloat

    def as_array(self) -> NDArray[np.float64]:
        """Coordinates as a length-3 array."""
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    @classmethod
    def from_array(cls, values: NDArray[np.float64] | tuple[float, float, float]) -> Point3:
        """Build a point from any length-3 sequence."""
        x, y, z = (float(v) for v in values)
        return cls(x=x, y=y, z=z)
