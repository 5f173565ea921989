"""Per-box feature vectors feeding the classification head."""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray
from shapely.geometry import MultiPoint

from src.domain.geometry import (
    BOUNDARY_TOLERANCE,
    PointsLike,
    as_points,
    points_in_box,
    to_box_frame,
)
from src.domain.value_objects.box import Box7

FEATURE_NAMES: tuple[str, ...] = (
    "width",
    "length",
    "height",
    "log_point_count",
    "centroid_offset_x",
    "centroid_offset_y",
    "centroid_offset_z",
    "z_spread_ratio",
    "hull_fill_ratio",
)
FEATURE_DIM = len(FEATURE_NAMES)


def feature_extract(points: PointsLike, box: Box7) -> NDArray[np.float64]:
    """
    Fixed-length statistics of the points inside ``box``.

    Order follows ``FEATURE_NAMES``: box extents, log1p of the point count,
    the point centroid in the box frame, the z standard deviation over the
    box height and the BEV convex-hull area over the box footprint. A box
    with no points maps to the zero vector.
    """
    cloud = as_points(points)
    if cloud.shape[0] == 0:
        return np.zeros(FEATURE_DIM, dtype=np.float64)

    local = to_box_frame(cloud, box)
    centroid = local.mean(axis=0)
    hull_area = float(MultiPoint(cloud[:, :2].tolist()).convex_hull.area)

    return np.array(
        [
            box.w,
            box.l,
            box.h,
            math.log1p(cloud.shape[0]),
            centroid[0],
            centroid[1],
            centroid[2],
            float(cloud[:, 2].std()) / box.h,
            hull_area / (box.w * box.l),
        ],
        dtype=np.float64,
    )


def box_features(cloud: PointsLike, box: Box7) -> NDArray[np.float64]:
    """Features of the cloud points that fall inside ``box``."""
    points = as_points(cloud)
    return feature_extract(points[points_in_box(points, box, tol=BOUNDARY_TOLERANCE)], box)
