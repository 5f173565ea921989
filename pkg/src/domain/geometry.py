"""
Oriented-box and point-set geometry.

Containment, bird's-eye-view (BEV) polygon intersection, 3D IoU of
yaw-oriented boxes and the minimum-area oriented box of a point set.
All functions are pure.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import ConvexHull, QhullError
from shapely.geometry import Polygon

from config.settings import UNKNOWN_LABEL
from src.domain.value_objects.box import Box7
from src.domain.value_objects.point import Point3
from src.shared.exceptions import EmptyClusterError, GeometryError

BOUNDARY_TOLERANCE = 1e-9
SLIVER_AREA = 1e-12
DEFAULT_MIN_EXTENT = 0.1

PointsLike = NDArray[np.float64] | Sequence[Point3]


def as_points(points: PointsLike) -> NDArray[np.float64]:
    """Coerce a point list or array into an (N, 3) float array."""
    if isinstance(points, np.ndarray):
        return np.asarray(points, dtype=np.float64).reshape(-1, 3)
    return np.array([p.as_array() for p in points], dtype=np.float64).reshape(-1, 3)


def to_box_frame(points: NDArray[np.float64], box: Box7) -> NDArray[np.float64]:
    """Express points in the box frame: translate by -center, rotate by -yaw."""
    shifted = as_points(points) - box.center
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    local = np.empty_like(shifted)
    local[:, 0] = c * shifted[:, 0] + s * shifted[:, 1]
    local[:, 1] = -s * shifted[:, 0] + c * shifted[:, 1]
    local[:, 2] = shifted[:, 2]
    return local


def points_in_box(points: PointsLike, box: Box7, tol: float = 0.0) -> NDArray[np.bool_]:
    """Containment mask of each point in a closed box, widened by ``tol``."""
    local = to_box_frame(as_points(points), box)
    half = np.array([box.l, box.w, box.h], dtype=np.float64) / 2.0 + tol
    mask: NDArray[np.bool_] = np.all(np.abs(local) <= half, axis=1)
    return mask


def point_in_box(p: Point3, box: Box7, tol: float = 0.0) -> bool:
    """Whether ``p`` lies in the closed box; boundary points are inside."""
    return bool(points_in_box(p.as_array().reshape(1, 3), box, tol)[0])


def bev_corners(box: Box7) -> NDArray[np.float64]:
    """The four BEV corners of a box, counter-clockwise, shape (4, 2)."""
    hl, hw = box.l / 2.0, box.w / 2.0
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]], dtype=np.float64)
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    rotation = np.array([[c, -s], [s, c]], dtype=np.float64)
    corners: NDArray[np.float64] = local @ rotation.T + np.array([box.cx, box.cy])
    return corners


def bev_polygon(box: Box7) -> Polygon:
    return Polygon(bev_corners(box))


def bev_area(box: Box7) -> float:
    return box.w * box.l


def box_volume(box: Box7) -> float:
    """Box volume ``w * l * h``; yaw-invariant."""
    return box.w * box.l * box.h


def bev_intersection_area(a: Box7, b: Box7) -> float:
    """
    Area of the intersection of the two rotated BEV rectangles.

    Slivers below ``SLIVER_AREA`` square meters count as no overlap.
    """
    area = float(bev_polygon(a).intersection(bev_polygon(b)).area)
    return area if area >= SLIVER_AREA else 0.0


def z_overlap(a: Box7, b: Box7) -> float:
    top = min(a.cz + a.h / 2.0, b.cz + b.h / 2.0)
    bottom = max(a.cz - a.h / 2.0, b.cz - b.h / 2.0)
    return max(0.0, top - bottom)


def iou_3d(a: Box7, b: Box7) -> float:
    """
    Intersection over union of two yaw-oriented boxes.

    Identical geometries short-circuit to exactly 1.0; otherwise the BEV
    intersection times the z overlap over the union, clamped to [0, 1].
    """
    if a.same_geometry(b):
        return 1.0
    overlap = z_overlap(a, b)
    if overlap == 0.0:
        return 0.0
    intersection = bev_intersection_area(a, b) * overlap
    if intersection == 0.0:
        return 0.0
    union = box_volume(a) + box_volume(b) - intersection
    if union <= 0.0:
        return 0.0
    return min(1.0, max(0.0, intersection / union))


def _caliper_angles(hull_xy: NDArray[np.float64]) -> NDArray[np.float64]:
    """Distinct hull edge directions folded into [0, pi/2)."""
    edges = np.roll(hull_xy, -1, axis=0) - hull_xy
    angles = np.mod(np.arctan2(edges[:, 1], edges[:, 0]), math.pi / 2.0)
    return np.unique(angles)


def _principal_angle(xy: NDArray[np.float64]) -> float:
    """Direction of largest spread, used when the hull is degenerate."""
    centered = xy - xy.mean(axis=0)
    if not np.any(centered):
        return 0.0
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    direction = vt[0]
    return float(np.mod(math.atan2(direction[1], direction[0]), math.pi / 2.0))


def _project(
    xy: NDArray[np.float64], angles: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Coordinates of every point along (u) and across (v) each candidate heading."""
    c, s = np.cos(angles)[:, None], np.sin(angles)[:, None]
    u = c * xy[:, 0] + s * xy[:, 1]
    v = -s * xy[:, 0] + c * xy[:, 1]
    return u, v


def min_oriented_box(
    points: PointsLike,
    min_extent: float = DEFAULT_MIN_EXTENT,
    label: str | None = UNKNOWN_LABEL,
) -> Box7:
    """
    Minimum-BEV-area yaw-oriented box enclosing ``points``.

    Rotating calipers over the directions of the convex hull edges; the z
    extent spans the lowest to the highest point. Collinear and single-point
    clusters fall back to their principal direction. Every extent is floored
    at ``min_extent``.

    Raises:
        EmptyClusterError: No points were given
        GeometryError: ``min_extent`` is not positive
    """
    cloud = as_points(points)
    if cloud.shape[0] == 0:
        raise EmptyClusterError("empty cluster")
    if not min_extent > 0.0:
        raise GeometryError("min_extent must be positive")

    xy = cloud[:, :2]
    angles: NDArray[np.float64]
    if np.unique(xy, axis=0).shape[0] < 3:
        angles = np.array([_principal_angle(xy)])
    else:
        try:
            hull = ConvexHull(xy)
            angles = _caliper_angles(xy[hull.vertices])
        except QhullError:
            angles = np.array([_principal_angle(xy)])

    u, v = _project(xy, angles)
    u_min, u_max = u.min(axis=1), u.max(axis=1)
    v_min, v_max = v.min(axis=1), v.max(axis=1)
    areas = (u_max - u_min) * (v_max - v_min)
    best = int(np.argmin(areas))

    yaw = float(angles[best])
    u_mid = (u_min[best] + u_max[best]) / 2.0
    v_mid = (v_min[best] + v_max[best]) / 2.0
    c, s = math.cos(yaw), math.sin(yaw)
    z_min, z_max = float(cloud[:, 2].min()), float(cloud[:, 2].max())

    return Box7(
        cx=float(c * u_mid - s * v_mid),
        cy=float(s * u_mid + c * v_mid),
        cz=(z_min + z_max) / 2.0,
        w=max(float(v_max[best] - v_min[best]), min_extent),
        l=max(float(u_max[best] - u_min[best]), min_extent),
        h=max(z_max - z_min, min_extent),
        yaw=yaw,
        label=label,
    )
