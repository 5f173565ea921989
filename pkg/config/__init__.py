"""Configuration module for open-set LIDAR detection."""  # noqa: I002

from .settings import (
    UNKNOWN_LABEL,
    ApplicationSettings,
    ClusterConfig,
    EvalConfig,
    PipelineConfig,
    SynthConfig,
    TrainConfig,
    get_settings,
    reset_settings,
)

__all__ = [
    "UNKNOWN_LABEL",
    "ApplicationSettings",
    "ClusterConfig",
    "EvalConfig",
    "PipelineConfig",
    "SynthConfig",
    "TrainConfig",
    "get_settings",
    "reset_settings",
]
