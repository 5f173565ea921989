"""
Prototype metric-space scoring.

Probabilities from negative squared distances to the fixed class
prototypes, the cross-entropy loss over those probabilities and its
analytic gradient, the Euclidean distance sum (EDS) and the naive
max-probability confidence.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp, softmax

from src.domain.models.head import Prototypes
from src.shared.exceptions import (
    DimensionMismatchError,
    InvalidClassIndexError,
    ValidationException,
)

PROBABILITY_SUM_TOLERANCE = 1e-9

Vector = NDArray[np.float64] | Sequence[float]


def as_embedding(e: Vector, protos: Prototypes) -> NDArray[np.float64]:
    """Validate an embedding against the prototype dimension."""
    vector = np.asarray(e, dtype=np.float64).reshape(-1)
    if vector.shape[0] != protos.num_classes:
        raise DimensionMismatchError(
            f"embedding has dimension {vector.shape[0]}, expected {protos.num_classes}",
            field="embedding",
        )
    return vector


def _check_class_index(Y: int, protos: Prototypes) -> None:
    if not 1 <= Y <= protos.num_classes:
        raise InvalidClassIndexError(
            f"class index {Y} outside 1..{protos.num_classes}", field="label"
        )


def squared_distances(e: Vector, protos: Prototypes) -> NDArray[np.float64]:
    """Squared distance from ``e`` to every prototype."""
    vector = as_embedding(e, protos)
    diff = protos.matrix() - vector
    distances: NDArray[np.float64] = np.einsum("ij,ij->i", diff, diff)
    return distances


def class_probabilities(e: Vector, protos: Prototypes) -> NDArray[np.float64]:
    """Softmax over negative squared distances; max-subtracted so it never vanishes."""
    probs: NDArray[np.float64] = softmax(-squared_distances(e, protos))
    return probs


def logit_probabilities(logits: Vector) -> NDArray[np.float64]:
    """Plain softmax of classifier logits."""
    vector = np.asarray(logits, dtype=np.float64).reshape(-1)
    if vector.shape[0] == 0:
        raise ValidationException("logits cannot be empty", field="logits")
    probs: NDArray[np.float64] = softmax(vector)
    return probs


def naive_confidence(p: Vector) -> float:
    """Maximum class probability."""
    probs = np.asarray(p, dtype=np.float64).reshape(-1)
    if probs.shape[0] == 0:
        raise ValidationException("probability vector cannot be empty", field="probs")
    if abs(float(probs.sum()) - 1.0) > PROBABILITY_SUM_TOLERANCE:
        raise ValidationException("probabilities must sum to 1", field="probs")
    return float(probs.max())


def metric_loss(e: Vector, Y: int, protos: Prototypes) -> float:
    """Negative log-probability of class ``Y`` (1-based)."""
    _check_class_index(Y, protos)
    distances = squared_distances(e, protos)
    loss = float(distances[Y - 1] + logsumexp(-distances))
    return max(0.0, loss)


def loss_gradient(e: Vector, Y: int, protos: Prototypes) -> NDArray[np.float64]:
    """Gradient of :func:`metric_loss` with respect to the embedding."""
    _check_class_index(Y, protos)
    vector = as_embedding(e, protos)
    prototypes = protos.matrix()
    probs = class_probabilities(vector, protos)
    offsets = vector - prototypes
    gradient: NDArray[np.float64] = 2.0 * offsets[Y - 1] - 2.0 * (probs @ offsets)
    return gradient


def eds(e: Vector, protos: Prototypes) -> float:
    """Euclidean distance sum: total squared distance to all prototypes."""
    return float(squared_distances(e, protos).sum())
