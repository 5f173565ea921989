"""Shared utilities and exceptions for open-set LIDAR detection."""

from .exceptions import (
    ApplicationError,
    CalibrationError,
    CoincidentPointsError,
    ConfigurationException,
    DimensionMismatchError,
    DocumentFormatError,
    EmptyClusterError,
    EmptyRegionError,
    GeometryError,
    InvalidClassIndexError,
    KittiFormatError,
    NoSeedPointError,
    PlacementError,
    ProposalError,
    SceneMismatchError,
    SeedOutsideRegionError,
    TrainingError,
    ValidationException,
)

__all__ = [
    "ApplicationError",
    "CalibrationError",
    "CoincidentPointsError",
    "ConfigurationException",
    "DimensionMismatchError",
    "DocumentFormatError",
    "EmptyClusterError",
    "EmptyRegionError",
    "GeometryError",
    "InvalidClassIndexError",
    "KittiFormatError",
    "NoSeedPointError",
    "PlacementError",
    "ProposalError",
    "SceneMismatchError",
    "SeedOutsideRegionError",
    "TrainingError",
    "ValidationException",
]
