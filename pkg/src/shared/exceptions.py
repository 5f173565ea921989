"""Application exception hierarchy for open-set LIDAR detection."""


class ApplicationError(Exception):
    """Base exception for all application-specific errors."""

    error_code: str = "APPLICATION_ERROR"

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


# Validation exceptions
class ValidationException(ApplicationError):
    """Exception for validation errors."""

    error_code: str = "VALIDATION_ERROR"

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class DimensionMismatchError(ValidationException):
    """Exception when a vector does not have the dimension a model expects."""

    error_code: str = "DIMENSION_MISMATCH"


class InvalidClassIndexError(ValidationException):
    """Exception when a class index lies outside 1..C."""

    error_code: str = "INVALID_CLASS_INDEX"


# Geometry exceptions
class GeometryError(ApplicationError):
    """Exception for degenerate geometric input."""

    error_code: str = "GEOMETRY_ERROR"


class EmptyClusterError(GeometryError):
    """Exception when a box is requested for an empty point set."""

    error_code: str = "EMPTY_CLUSTER"


class CoincidentPointsError(GeometryError):
    """Exception when an angle is requested between coincident points."""

    error_code: str = "COINCIDENT_POINTS"


# Proposal exceptions (signalled per proposal, never fatal for a scene)
class ProposalError(ApplicationError):
    """Exception for an unknown-object proposal that cannot be processed."""

    error_code: str = "PROPOSAL_ERROR"


class EmptyRegionError(ProposalError):
    """Exception when a proposal cylinder holds no cloud points."""

    error_code: str = "EMPTY_PROPOSAL_REGION"


class NoSeedPointError(ProposalError):
    """Exception when a detection box contains no cloud point to seed from."""

    error_code: str = "NO_SEED_POINT"


class SeedOutsideRegionError(ProposalError):
    """Exception when a growth seed is not a member of its region."""

    error_code: str = "SEED_OUTSIDE_REGION"


# Document and dataset exceptions
class DocumentFormatError(ApplicationError):
    """Exception for malformed scene, detection, result or model documents."""

    error_code: str = "DOCUMENT_FORMAT_ERROR"

    def __init__(self, message: str, position: str | None = None) -> None:
        located = f"{message} (at {position})" if position else message
        super().__init__(located)
        self.position = position


class KittiFormatError(ApplicationError):
    """Exception for malformed KITTI binary or label data."""

    error_code: str = "KITTI_FORMAT_ERROR"

    def __init__(self, message: str, offset: int | None = None) -> None:
        super().__init__(message)
        self.offset = offset


class CalibrationError(ApplicationError):
    """Exception for a missing or malformed calibration entry."""

    error_code: str = "CALIBRATION_ERROR"

    def __init__(self, message: str, entry: str) -> None:
        super().__init__(message)
        self.entry = entry


class SceneMismatchError(ApplicationError):
    """Exception when detection documents reference scenes without ground truth."""

    error_code: str = "SCENE_MISMATCH"

    def __init__(self, message: str, scene_ids: list[str]) -> None:
        super().__init__(message)
        self.scene_ids = scene_ids


class PlacementError(ApplicationError):
    """Exception when synthetic objects cannot be placed without overlap."""

    error_code: str = "PLACEMENT_ERROR"


class TrainingError(ApplicationError):
    """Exception for invalid training input."""

    error_code: str = "TRAINING_ERROR"


# Configuration exceptions
class ConfigurationException(ApplicationError):
    """Exception for configuration-related errors."""

    error_code: str = "CONFIGURATION_ERROR"
