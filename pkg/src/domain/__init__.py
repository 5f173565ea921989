"""Domain layer: value objects, models and pure geometry, metric and clustering algorithms."""

from . import models, value_objects

__all__ = [
    "models",
    "value_objects",
]
