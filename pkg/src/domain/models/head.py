"""Classification head entities: prototypes, perceptron weights, samples."""

from __future__ import annotations

from collections.abc import Sequence
from enum import Enum
from typing import Self

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.domain.value_objects.point import FiniteFloat


class HeadKind(str, Enum):
    """Which output space the head is trained for."""

    METRIC = "metric"
    SOFTMAX_CLASSIFIER = "softmax_classifier"


class Prototypes(BaseModel):
    """Fixed class anchors: prototype t is C at position t and 0 elsewhere."""

    model_config = ConfigDict(frozen=True)

    num_classes: int = Field(ge=1)

    def matrix(self) -> NDArray[np.float64]:
        """The (C, C) matrix whose row t is prototype t+1."""
        C = self.num_classes
        return np.eye(C, dtype=np.float64) * float(C)

    def vector(self, class_index: int) -> NDArray[np.float64]:
        """Prototype of a 1-based class index."""
        return self.matrix()[class_index - 1]


class HeadModel(BaseModel):
    """
    Two-layer perceptron mapping F features to C outputs.

    Weights are stored row-major with torch's (out, in) layout:
    ``w1`` is H x F and ``w2`` is C x H.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: HeadKind
    feature_dim: int = Field(ge=1)
    hidden_dim: int = Field(ge=1)
    num_classes: int = Field(ge=1)
    w1: list[list[FiniteFloat]]
    b1: list[FiniteFloat]
    w2: list[list[FiniteFloat]]
    b2: list[FiniteFloat]
    class_names: list[str] = Field(
        default_factory=list, description="Class name of each output, in prototype order"
    )

    @model_validator(mode="after")
    def validate_shapes(self) -> Self:
        """Weight shapes agree with the declared dimensions."""
        F, H, C = self.feature_dim, self.hidden_dim, self.num_classes
        if len(self.w1) != H or any(len(row) != F for row in self.w1):
            raise ValueError(f"w1 must be {H}x{F}")
        if len(self.b1) != H:
            raise ValueError(f"b1 must have {H} entries")
        if len(self.w2) != C or any(len(row) != H for row in self.w2):
            raise ValueError(f"w2 must be {C}x{H}")
        if len(self.b2) != C:
            raise ValueError(f"b2 must have {C} entries")
        if self.class_names and len(self.class_names) != C:
            raise ValueError(f"class_names must have {C} entries")
        return self

    def arrays(
        self,
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        """Weights and biases as float64 arrays (w1, b1, w2, b2)."""
        return (
            np.asarray(self.w1, dtype=np.float64).reshape(self.hidden_dim, self.feature_dim),
            np.asarray(self.b1, dtype=np.float64),
            np.asarray(self.w2, dtype=np.float64).reshape(self.num_classes, self.hidden_dim),
            np.asarray(self.b2, dtype=np.float64),
        )

    @classmethod
    def from_arrays(
        cls,
        kind: HeadKind,
        w1: NDArray[np.float64],
        b1: NDArray[np.float64],
        w2: NDArray[np.float64],
        b2: NDArray[np.float64],
        class_names: Sequence[str] = (),
    ) -> HeadModel:
        """Build a model from weight arrays."""
        hidden_dim, feature_dim = w1.shape
        num_classes = w2.shape[0]
        return cls(
            kind=kind,
            feature_dim=feature_dim,
            hidden_dim=hidden_dim,
            num_classes=num_classes,
            w1=w1.tolist(),
            b1=b1.tolist(),
            w2=w2.tolist(),
            b2=b2.tolist(),
            class_names=list(class_names),
        )


class TrainSample(BaseModel):
    """A feature vector and its 1-based class index."""

    model_config = ConfigDict(frozen=True)

    features: list[FiniteFloat]
    label: int = Field(ge=1)
