"""Application settings using Pydantic Settings."""  # noqa: I002

import math
import os
from enum import Enum
from typing import Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.shared.exceptions import ConfigurationException

UNKNOWN_LABEL = "unknown"


def _get_env_files() -> list[str]:
    """Get environment files based on ENV_FILE environment variable."""
    env_file = os.getenv("ENV_FILE")
    if env_file:
        return [env_file, ".env"]  # Specified file first, then fallback to .env
    return [".env.local", ".env.test", ".env"]  # Local dev, test, then default


class Environment(str, Enum):
    """Valid application environments."""

    DEVELOPMENT = "development"
    TESTING = "testing"
    PRODUCTION = "production"


class MergeRule(str, Enum):
    """Direction of the depth-clustering angle test."""

    ANGLE_ABOVE = "angle_above"
    ANGLE_BELOW = "angle_below"


class SeedPick(str, Enum):
    """How a seed point is chosen inside a proposal box."""

    CENTER_NEAREST = "center_nearest"
    RANDOM = "random"


class NmsPriority(str, Enum):
    """Ordering key for largest-first suppression of unknown boxes."""

    VOLUME = "volume"
    BEV_AREA = "bev_area"


class ApMethod(str, Enum):
    """Average precision integration scheme."""

    INTERPOLATED = "interpolated"
    CONTINUOUS = "continuous"


class UnknownScore(str, Enum):
    """Score attached to unknown boxes when ranking them for AP."""

    VOLUME = "volume"
    CONSTANT = "constant"


class ClusterConfig(BaseModel):
    """Depth clustering configuration."""

    model_config = ConfigDict(frozen=True)

    lambda_theta: float = Field(
        default=math.radians(65.0),
        gt=0.0,
        lt=math.pi / 2,
        description="Angle threshold in radians",
    )
    region_radius: float = Field(default=4.0, gt=0.0, description="Proposal cylinder radius (m)")
    neighbor_radius: float = Field(default=0.5, gt=0.0, description="Neighbor search radius (m)")
    merge_when: MergeRule = Field(default=MergeRule.ANGLE_ABOVE, description="Merge direction")
    min_cluster_points: int = Field(default=5, ge=1, description="Smaller clusters are noise")
    ground_z: float | None = Field(
        default=None,
        description="Points below this height are never merged (None disables the filter)",
    )
    sensor_origin: tuple[float, float, float] = Field(
        default=(0.0, 0.0, 0.0),
        description="Scanner position in the cloud frame",
    )


class PipelineConfig(BaseModel):
    """Open-set pipeline configuration."""

    model_config = ConfigDict(frozen=True)

    lambda_eds: float = Field(
        default=31.5,
        ge=0.0,
        description="Boxes with EDS below this threshold become unknown proposals",
    )
    lambda_naive: float = Field(
        default=0.5,
        ge=0.0,
        le=1.0,
        description="Naive baseline: boxes scoring below this become unknown",
    )
    cluster: ClusterConfig = Field(default_factory=ClusterConfig)
    nms_iou: float = Field(default=0.1, ge=0.0, lt=1.0, description="Unknown NMS IoU threshold")
    nms_priority: NmsPriority = Field(default=NmsPriority.VOLUME)
    seed_pick: SeedPick = Field(default=SeedPick.CENTER_NEAREST)
    rng_seed: int = Field(default=0, description="Seed for random seed picking")
    min_box_extent: float = Field(default=0.1, gt=0.0, description="Floor for fitted extents (m)")


class EvalConfig(BaseModel):
    """Open-set evaluation configuration."""

    model_config = ConfigDict(frozen=True)

    class_iou_thresholds: dict[str, float] = Field(
        default_factory=lambda: {"car": 0.5, "pedestrian": 0.5, "cyclist": 0.5},
        description="IoU threshold per known class",
    )
    unknown_iou_threshold: float = Field(default=0.1, gt=0.0, le=1.0)
    interpolation_points: int = Field(default=40, ge=2)
    ap_method: ApMethod = Field(default=ApMethod.INTERPOLATED)
    max_known_degradation: float = Field(default=0.10, ge=0.0, lt=1.0)
    unknown_score: UnknownScore = Field(default=UnknownScore.VOLUME)

    @field_validator("class_iou_thresholds")
    @classmethod
    def validate_thresholds(cls, v: dict[str, float]) -> dict[str, float]:
        """Validate per-class IoU thresholds."""
        if not v:
            raise ValueError("At least one known class is required")
        for name, threshold in v.items():
            if not 0.0 < threshold <= 1.0:
                raise ValueError(f"IoU threshold for {name!r} must lie in (0, 1]")
            if name == UNKNOWN_LABEL:
                raise ValueError("The unknown label cannot be a known class")
        return v

    @classmethod
    def udi(cls) -> "EvalConfig":
        """Thresholds used for the urban driving dataset protocol."""
        return cls(
            class_iou_thresholds={"car": 0.5, "pedestrian": 0.5, "cyclist": 0.5, "truck": 0.7}
        )

    @classmethod
    def kitti(cls) -> "EvalConfig":
        """Thresholds used for the KITTI protocol (van and truck are unknown)."""
        return cls(class_iou_thresholds={"car": 0.7, "pedestrian": 0.5, "cyclist": 0.5})


class ShapeTemplate(BaseModel):
    """Size ranges (m) of one synthetic object class."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    length: tuple[float, float]
    width: tuple[float, float]
    height: tuple[float, float]

    @model_validator(mode="after")
    def validate_ranges(self) -> Self:
        """Validate that each size range is positive and ordered."""
        for label, (low, high) in (
            ("length", self.length),
            ("width", self.width),
            ("height", self.height),
        ):
            if not 0.0 < low <= high:
                raise ValueError(f"{self.name}: {label} range must satisfy 0 < low <= high")
        return self

    def mean_extents(self) -> tuple[float, float, float]:
        """Mean (length, width, height)."""
        return (
            sum(self.length) / 2.0,
            sum(self.width) / 2.0,
            sum(self.height) / 2.0,
        )


def _default_known_templates() -> list[ShapeTemplate]:
    return [
        ShapeTemplate(name="car", length=(3.2, 3.6), width=(1.5, 1.7), height=(1.4, 1.6)),
        ShapeTemplate(name="pedestrian", length=(0.5, 0.9), width=(0.5, 0.8), height=(1.6, 1.9)),
        ShapeTemplate(name="cyclist", length=(1.5, 1.9), width=(0.5, 0.8), height=(1.5, 1.8)),
    ]


def _default_unknown_templates() -> list[ShapeTemplate]:
    return [
        ShapeTemplate(name="trailer", length=(2.9, 3.4), width=(1.8, 2.0), height=(1.1, 1.4)),
        ShapeTemplate(name="cart", length=(2.0, 2.8), width=(1.1, 1.5), height=(1.2, 1.6)),
    ]


class SynthConfig(BaseModel):
    """Synthetic LIDAR scene generation configuration."""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=0)
    scenes: int = Field(default=10, ge=0)
    known_templates: list[ShapeTemplate] = Field(default_factory=_default_known_templates)
    unknown_templates: list[ShapeTemplate] = Field(default_factory=_default_unknown_templates)
    objects_per_scene: tuple[int, int] = Field(default=(3, 6))
    unknown_ratio: float = Field(default=0.3, ge=0.0, le=1.0)
    min_gap: float = Field(default=1.0, gt=0.0, description="Minimum BEV gap between objects (m)")
    azimuth_resolution_deg: float = Field(default=0.1, gt=0.0, le=5.0)
    elevation_resolution_deg: float = Field(default=0.4, gt=0.0, le=5.0)
    elevation_limits_deg: tuple[float, float] = Field(default=(-24.8, 2.0))
    range_limits: tuple[float, float] = Field(default=(8.0, 20.0))
    sensor_height: float = Field(default=0.8, gt=0.0, description="Scanner height above ground")
    embedding_noise: float = Field(default=0.3, ge=0.0, description="Embedding noise sigma")
    min_object_points: int = Field(default=20, ge=1, description="Annotate objects with more hits")
    max_placement_attempts: int = Field(default=1000, ge=1)
    max_column_spacing: float = Field(
        default=0.1, gt=0.0, description="Redraw objects scanned coarser than this (m)"
    )
    allow_occlusion: bool = Field(
        default=False, description="Let objects share bearings so nearer ones shadow farther ones"
    )

    @model_validator(mode="after")
    def validate_generation(self) -> Self:
        """Validate template labels and sampling ranges."""
        names = [t.name for t in (*self.known_templates, *self.unknown_templates)]
        if len(names) != len(set(names)):
            raise ValueError("Template names must be unique across known and unknown classes")
        if UNKNOWN_LABEL in names:
            raise ValueError("The unknown label cannot name a template")
        if not self.known_templates:
            raise ValueError("At least one known template is required")
        low, high = self.objects_per_scene
        if not 1 <= low <= high:
            raise ValueError("objects_per_scene must satisfy 1 <= low <= high")
        near, far = self.range_limits
        if not 0.0 < near < far:
            raise ValueError("range_limits must satisfy 0 < near < far")
        bottom, top = self.elevation_limits_deg
        if not -90.0 < bottom < top < 90.0:
            raise ValueError("elevation_limits_deg must satisfy -90 < bottom < top < 90")
        if self.unknown_ratio > 0.0 and not self.unknown_templates:
            raise ValueError("unknown_ratio > 0 needs at least one unknown template")
        return self


class TrainConfig(BaseModel):
    """Metric head training configuration."""

    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(default=0.003, gt=0.0, lt=1.0)
    beta1: float = Field(default=0.9, gt=0.0, lt=1.0, description="First-moment decay")
    beta2: float = Field(default=0.999, gt=0.0, lt=1.0, description="Second-moment decay")
    epsilon: float = Field(default=1e-8, gt=0.0)
    epochs: int = Field(default=50, ge=0)
    batch_size: int = Field(default=32, ge=1)
    seed: int = Field(default=0)
    hidden_dim: int = Field(default=32, ge=1)


class ObservabilitySettings(BaseModel):
    """Observability configuration (logging, metrics)."""

    log_level: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
    )
    metrics_namespace: str = Field(default="osd", description="Prefix for metric names")


class ApplicationSettings(BaseSettings):
    """Main application settings."""

    model_config = SettingsConfigDict(
        env_file=_get_env_files(),
        env_file_encoding="utf-8",
        case_sensitive=False,
        env_prefix="OSD_",
        env_nested_delimiter="__",
        extra="ignore",
    )

    # Core application settings
    app_name: str = Field(default="open-set-lidar-detection", description="Application name")
    environment: Environment = Field(default=Environment.PRODUCTION, description="Environment")
    threads: int | None = Field(default=None, ge=1, description="Worker pool cap")
    known_classes: list[str] = Field(
        default_factory=lambda: ["car", "pedestrian", "cyclist"],
        description="Known class names in prototype order",
    )

    # Component settings
    pipeline: PipelineConfig = Field(default_factory=PipelineConfig)
    evaluation: EvalConfig = Field(default_factory=EvalConfig)
    synthesis: SynthConfig = Field(default_factory=SynthConfig)
    training: TrainConfig = Field(default_factory=TrainConfig)
    observability: ObservabilitySettings = Field(default_factory=ObservabilitySettings)

    def is_development(self) -> bool:
        """Check if running in development environment."""
        return self.environment == Environment.DEVELOPMENT

    def worker_count(self) -> int:
        """Number of workers for scene-level pools."""
        return self.threads or os.cpu_count() or 1

    def validate_configuration(self) -> None:
        """Validate configuration for common issues."""
        self._validate_known_classes()

    def _validate_known_classes(self) -> None:
        """Validate that class lists agree across sections."""
        if not self.known_classes:
            raise ConfigurationException("At least one known class is required")  # noqa: EM101, TRY003

        if len(set(self.known_classes)) != len(self.known_classes):
            raise ConfigurationException("Known class names must be unique")  # noqa: EM101, TRY003

        if UNKNOWN_LABEL in self.known_classes:
            raise ConfigurationException("The unknown label cannot be a known class")  # noqa: EM101, TRY003

        template_names = [t.name for t in self.synthesis.known_templates]
        if template_names != self.known_classes:
            raise ConfigurationException(
                f"Synthetic known templates {template_names} must match known classes "
                f"{self.known_classes} in order"
            )


# Global settings instance (lowercase because it's mutable)
_settings: ApplicationSettings | None = None


def get_settings() -> ApplicationSettings:
    """
    Get application settings singleton.

    Returns:
        Application settings instance

    Raises:
        ConfigurationException: If configuration validation fails
    """
    global _settings  # noqa: PLW0603

    if _settings is None:
        _settings = ApplicationSettings()
        _settings.validate_configuration()

    return _settings


def reset_settings() -> None:
    """Reset settings singleton (useful for testing)."""
    global _settings  # noqa: PLW0603
    _settings = None
