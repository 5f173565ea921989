"""
Classification head: seeded initialization, inference and training.

The head is a two-layer perceptron. Training runs in torch (float64,
Adam); inference is a plain numpy forward pass over the stored weights,
so scoring never needs torch at detection time.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import torch
import torch.nn.functional as F
from numpy.typing import NDArray
from pydantic import BaseModel, Field
from torch import nn

from config.settings import TrainConfig
from src.domain.models.head import HeadKind, HeadModel, Prototypes, TrainSample
from src.infrastructure.observability import get_logger
from src.shared.exceptions import (
    DimensionMismatchError,
    InvalidClassIndexError,
    TrainingError,
)

logger = get_logger(__name__)


class TrainingOutcome(BaseModel):
    """A trained head and its loss history."""

    model: HeadModel
    initial_loss: float = Field(description="Mean loss before the first update")
    epoch_losses: list[float] = Field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1] if self.epoch_losses else self.initial_loss


def _build_network(
    feature_dim: int, hidden_dim: int, num_classes: int, generator: torch.Generator
) -> nn.Sequential:
    network = nn.Sequential(
        nn.Linear(feature_dim, hidden_dim, dtype=torch.float64),
        nn.ReLU(),
        nn.Linear(hidden_dim, num_classes, dtype=torch.float64),
    )
    for layer in (network[0], network[2]):
        nn.init.xavier_uniform_(layer.weight, generator=generator)
        nn.init.zeros_(layer.bias)
    return network


def _to_model(
    network: nn.Sequential, kind: HeadKind, class_names: Sequence[str] = ()
) -> HeadModel:
    first, second = network[0], network[2]
    return HeadModel.from_arrays(
        kind,
        first.weight.detach().numpy().copy(),
        first.bias.detach().numpy().copy(),
        second.weight.detach().numpy().copy(),
        second.bias.detach().numpy().copy(),
        class_names,
    )


def initialize_head(
    feature_dim: int,
    num_classes: int,
    cfg: TrainConfig,
    kind: HeadKind = HeadKind.METRIC,
    class_names: Sequence[str] = (),
) -> HeadModel:
    """Seeded Glorot-uniform weights with zero biases."""
    generator = torch.Generator().manual_seed(cfg.seed)
    network = _build_network(feature_dim, cfg.hidden_dim, num_classes, generator)
    return _to_model(network, kind, class_names)


def embed(model: HeadModel, features: NDArray[np.float64] | Sequence[float]) -> NDArray[np.float64]:
    """
    Forward pass of one feature vector.

    Returns an embedding for metric heads and logits for softmax heads,
    both of dimension C.
    """
    vector = np.asarray(features, dtype=np.float64).reshape(-1)
    if vector.shape[0] != model.feature_dim:
        raise DimensionMismatchError(
            f"feature vector has dimension {vector.shape[0]}, expected {model.feature_dim}",
            field="features",
        )
    return embed_batch(model, vector.reshape(1, -1))[0]


def embed_batch(model: HeadModel, features: NDArray[np.float64]) -> NDArray[np.float64]:
    """Forward pass of an (N, F) feature matrix."""
    matrix = np.asarray(features, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != model.feature_dim:
        raise DimensionMismatchError(
            f"feature matrix must be N x {model.feature_dim}", field="features"
        )
    w1, b1, w2, b2 = model.arrays()
    hidden = np.maximum(matrix @ w1.T + b1, 0.0)
    outputs: NDArray[np.float64] = hidden @ w2.T + b2
    return outputs


def _loss(
    outputs: torch.Tensor, targets: torch.Tensor, kind: HeadKind, prototypes: torch.Tensor
) -> torch.Tensor:
    if kind == HeadKind.METRIC:
        distances = ((outputs[:, None, :] - prototypes[None, :, :]) ** 2).sum(dim=-1)
        return F.cross_entropy(-distances, targets)
    return F.cross_entropy(outputs, targets)


def _stack_samples(
    samples: Sequence[TrainSample], num_classes: int | None
) -> tuple[torch.Tensor, torch.Tensor, int]:
    if not samples:
        raise TrainingError("no training samples")
    feature_dim = len(samples[0].features)
    if any(len(sample.features) != feature_dim for sample in samples):
        raise DimensionMismatchError(
            "training samples differ in feature dimension", field="features"
        )

    classes = num_classes if num_classes is not None else max(s.label for s in samples)
    if any(sample.label > classes for sample in samples):
        raise InvalidClassIndexError(f"sample label outside 1..{classes}", field="label")

    features = torch.tensor([s.features for s in samples], dtype=torch.float64)
    targets = torch.tensor([s.label - 1 for s in samples], dtype=torch.long)
    return features, targets, classes


def train(
    samples: Sequence[TrainSample],
    cfg: TrainConfig,
    kind: HeadKind = HeadKind.METRIC,
    num_classes: int | None = None,
    class_names: Sequence[str] = (),
) -> TrainingOutcome:
    """
    Mini-batch Adam training of a fresh seeded head.

    The metric kind minimizes cross-entropy over negative squared distances
    to the fixed prototypes; the softmax kind minimizes cross-entropy over
    the raw logits. Batches are drawn in a seeded shuffle order, so equal
    inputs and seeds give identical weights.

    Raises:
        TrainingError: ``samples`` is empty
        InvalidClassIndexError: A label exceeds ``num_classes``
    """
    features, targets, classes = _stack_samples(samples, num_classes)
    generator = torch.Generator().manual_seed(cfg.seed)
    network = _build_network(features.shape[1], cfg.hidden_dim, classes, generator)
    prototypes = torch.from_numpy(Prototypes(num_classes=classes).matrix())
    optimizer = torch.optim.Adam(
        network.parameters(),
        lr=cfg.learning_rate,
        betas=(cfg.beta1, cfg.beta2),
        eps=cfg.epsilon,
    )

    with torch.no_grad():
        initial_loss = float(_loss(network(features), targets, kind, prototypes))

    count = features.shape[0]
    epoch_losses: list[float] = []
    for epoch in range(cfg.epochs):
        order = torch.randperm(count, generator=generator)
        total = 0.0
        for start in range(0, count, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            optimizer.zero_grad()
            loss = _loss(network(features[batch]), targets[batch], kind, prototypes)
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * int(batch.shape[0])
        epoch_losses.append(total / count)
        logger.debug("epoch_completed", epoch=epoch + 1, mean_loss=epoch_losses[-1])

    logger.info(
        "head_trained",
        kind=kind.value,
        samples=count,
        epochs=cfg.epochs,
        initial_loss=initial_loss,
        final_loss=epoch_losses[-1] if epoch_losses else initial_loss,
    )
    return TrainingOutcome(
        model=_to_model(network, kind, class_names),
        initial_loss=initial_loss,
        epoch_losses=epoch_losses,
    )
