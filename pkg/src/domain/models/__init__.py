"""
Domain models module.

Entities exchanged between the pipeline stages: scenes, closed-set and
scored detections, open-set results and the classification head.
"""

from .detection import (
    ClosedSetDetection,
    Detection,
    DetectionSet,
    Diagnostics,
    OpenSetResult,
)
from .head import HeadKind, HeadModel, Prototypes, TrainSample
from .scene import Scene

__all__ = [
    "ClosedSetDetection",
    "Detection",
    "DetectionSet",
    "Diagnostics",
    "HeadKind",
    "HeadModel",
    "OpenSetResult",
    "Prototypes",
    "Scene",
    "TrainSample",
]
