"""
KITTI adapters: velodyne scans and camera-frame labels.

Label boxes are moved into the cloud frame through the inverse of the
rectified camera chain ``R0_rect @ Tr_velo_to_cam``; the bottom-center
position KITTI stores is lifted by half the height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from config.settings import UNKNOWN_LABEL
from src.domain.value_objects.box import Box7
from src.infrastructure.observability import get_logger
from src.shared.exceptions import CalibrationError, KittiFormatError

logger = get_logger(__name__)

POINT_RECORD_BYTES = 16
LABEL_FIELDS = 15

CLASS_MAP: dict[str, str] = {
    "Car": "car",
    "Pedestrian": "pedestrian",
    "Cyclist": "cyclist",
    "Van": UNKNOWN_LABEL,
    "Truck": UNKNOWN_LABEL,
}

_CALIBRATION_SHAPES: dict[str, tuple[int, int]] = {
    "R0_rect": (3, 3),
    "Tr_velo_to_cam": (3, 4),
}


@dataclass(frozen=True)
class VelodyneScan:
    """Points in the cloud frame with their reflectance, in file order."""

    points: NDArray[np.float64]
    intensity: NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.points.shape[0])


def read_kitti_velodyne(data: bytes) -> VelodyneScan:
    """
    Decode little-endian float32 (x, y, z, intensity) records.

    Raises:
        KittiFormatError: The length is not a multiple of 16; the offset is
            the start of the incomplete trailing record
    """
    remainder = len(data) % POINT_RECORD_BYTES
    if remainder:
        offset = len(data) - remainder
        raise KittiFormatError(
            f"truncated point record at byte offset {offset} ({remainder} trailing bytes)",
            offset=offset,
        )
    records = np.frombuffer(data, dtype="<f4").reshape(-1, 4).astype(np.float64)
    return VelodyneScan(points=records[:, :3].copy(), intensity=records[:, 3].copy())


def _homogeneous(matrix: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.eye(4, dtype=np.float64)
    out[: matrix.shape[0], : matrix.shape[1]] = matrix
    return out


def parse_calibration(calib_text: str) -> dict[str, NDArray[np.float64]]:
    """``R0_rect`` and ``Tr_velo_to_cam`` as 4x4 homogeneous matrices."""
    entries: dict[str, str] = {}
    for line in calib_text.splitlines():
        key, sep, values = line.partition(":")
        if sep:
            entries[key.strip()] = values

    matrices: dict[str, NDArray[np.float64]] = {}
    for name, shape in _CALIBRATION_SHAPES.items():
        if name not in entries:
            raise CalibrationError(f"missing calibration entry '{name}'", entry=name)
        try:
            values = np.array([float(v) for v in entries[name].split()], dtype=np.float64)
        except ValueError as exc:
            raise CalibrationError(f"non-numeric calibration entry '{name}'", entry=name) from exc
        if values.shape[0] != shape[0] * shape[1]:
            raise CalibrationError(
                f"calibration entry '{name}' needs {shape[0] * shape[1]} values, "
                f"got {values.shape[0]}",
                entry=name,
            )
        matrices[name] = _homogeneous(values.reshape(shape))
    return matrices


def camera_to_cloud(calibration: dict[str, NDArray[np.float64]]) -> NDArray[np.float64]:
    """The 4x4 transform from rectified camera coordinates to the cloud frame."""
    forward = calibration["R0_rect"] @ calibration["Tr_velo_to_cam"]
    inverse: NDArray[np.float64] = np.linalg.inv(forward)
    return inverse


def read_kitti_labels(label_text: str, calib_text: str) -> list[Box7]:
    """
    Cloud-frame boxes for the Car, Pedestrian, Cyclist, Van and Truck lines.

    Van and Truck become "unknown"; every other type is dropped.

    Raises:
        CalibrationError: A required calibration entry is missing or malformed
        KittiFormatError: A label line has too few or non-numeric fields
    """
    transform = camera_to_cloud(parse_calibration(calib_text))
    rotation = transform[:3, :3]

    boxes: list[Box7] = []
    dropped = 0
    for number, line in enumerate(label_text.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        label = CLASS_MAP.get(fields[0])
        if label is None:
            dropped += 1
            continue
        if len(fields) < LABEL_FIELDS:
            raise KittiFormatError(
                f"label line {number} has {len(fields)} fields, expected {LABEL_FIELDS}"
            )
        try:
            h, w, l, x, y, z, ry = (float(v) for v in fields[8:15])  # noqa: E741
        except ValueError as exc:
            raise KittiFormatError(f"label line {number} has a non-numeric field") from exc

        bottom = transform @ np.array([x, y, z, 1.0])
        heading = rotation @ np.array([math.cos(ry), 0.0, -math.sin(ry)])
        boxes.append(
            Box7(
                cx=float(bottom[0]),
                cy=float(bottom[1]),
                cz=float(bottom[2]) + h / 2.0,
                w=w,
                l=l,
                h=h,
                yaw=math.atan2(float(heading[1]), float(heading[0])),
                label=label,
            )
        )

    logger.debug("kitti_labels_read", boxes=len(boxes), dropped=dropped)
    return boxes
