"""
Depth clustering of unknown-object proposals.

A uniform grid answers exact radius queries over the raw cloud. Growth
starts from a seed inside a z-unbounded cylinder and merges a neighbor
when the angle at the farther of the two points, between the segment to
the nearer point and the ray back to the sensor, passes the threshold.
"""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.distance import cdist

from config.settings import ClusterConfig, MergeRule
from src.domain.geometry import PointsLike, as_points
from src.domain.value_objects.point import Point3
from src.shared.exceptions import (
    CoincidentPointsError,
    EmptyRegionError,
    GeometryError,
    SeedOutsideRegionError,
    ValidationException,
)

CellKey = tuple[int, int, int]
_NEIGHBOR_OFFSETS: tuple[CellKey, ...] = tuple(
    (dx, dy, dz) for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)
)
_FRONTIER_CHUNK = 256


@dataclass(frozen=True)
class NeighborIndex:
    """Uniform 3D grid with cell size equal to the query radius."""

    points: NDArray[np.float64]
    radius: float
    cells: dict[CellKey, NDArray[np.intp]] = field(repr=False)

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def _cell_of(self, xyz: NDArray[np.float64]) -> CellKey:
        key = np.floor(xyz / self.radius).astype(np.int64)
        return int(key[0]), int(key[1]), int(key[2])

    def query(
        self, xyz: NDArray[np.float64] | Point3, exclude: int | None = None
    ) -> NDArray[np.intp]:
        """Sorted indices of points within ``radius`` of ``xyz`` (inclusive)."""
        center = xyz.as_array() if isinstance(xyz, Point3) else np.asarray(xyz, dtype=np.float64)
        candidates = self.neighborhood(self._cell_of(center))
        if candidates.shape[0] == 0:
            return candidates
        offsets = self.points[candidates] - center
        within = candidates[np.einsum("ij,ij->i", offsets, offsets) <= self.radius * self.radius]
        if exclude is not None:
            within = within[within != exclude]
        return np.sort(within)

    def neighbors(self, i: int) -> NDArray[np.intp]:
        """Neighbors of cloud point ``i``, excluding itself."""
        return self.query(self.points[i], exclude=i)

    def neighborhood(self, key: CellKey) -> NDArray[np.intp]:
        """Members of cell ``key`` and of the 26 cells around it."""
        cx, cy, cz = key
        buckets = [
            self.cells[cell]
            for dx, dy, dz in _NEIGHBOR_OFFSETS
            if (cell := (cx + dx, cy + dy, cz + dz)) in self.cells
        ]
        if not buckets:
            return np.empty(0, dtype=np.intp)
        return np.concatenate(buckets)

    def group_by_cell(
        self, indices: NDArray[np.intp]
    ) -> Iterator[tuple[CellKey, NDArray[np.intp]]]:
        """``indices`` split by grid cell, cells in ascending key order."""
        if indices.shape[0] == 0:
            return
        keys = np.floor(self.points[indices] / self.radius).astype(np.int64)
        unique, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        for row, (kx, ky, kz) in enumerate(unique.tolist()):
            yield (kx, ky, kz), indices[inverse == row]


def build_index(points: PointsLike, radius: float) -> NeighborIndex:
    """Bucket every point into exactly one grid cell."""
    if not radius > 0.0:
        raise ValidationException("neighbor radius must be positive", field="neighbor_radius")
    cloud = as_points(points)
    keys = np.floor(cloud / radius).astype(np.int64)
    buckets: defaultdict[CellKey, list[int]] = defaultdict(list)
    for i, (kx, ky, kz) in enumerate(keys.tolist()):
        buckets[(kx, ky, kz)].append(i)
    cells = {key: np.asarray(members, dtype=np.intp) for key, members in buckets.items()}
    return NeighborIndex(points=cloud, radius=float(radius), cells=cells)


def _farther_first(
    o: NDArray[np.float64], t: NDArray[np.float64], s: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Order a pair as (farther, nearer) from the sensor; ties break lexicographically."""
    lt, ls = float(np.linalg.norm(t - o)), float(np.linalg.norm(s - o))
    if lt > ls or (lt == ls and tuple(t) >= tuple(s)):
        return t, s
    return s, t


def pair_angle(o: Point3, t: Point3, s: Point3) -> float:
    """
    Angle at the farther point between the segment to the nearer point
    and the ray back to the sensor ``o``, in [0, pi].

    Equal to arccos((L_long^2 + d^2 - L_short^2) / (2 d L_long)); evaluated
    through atan2 so that sensor-collinear pairs give exactly zero.

    Raises:
        CoincidentPointsError: ``t`` and ``s`` coincide
        GeometryError: either point coincides with the sensor
    """
    origin, a, b = o.as_array(), t.as_array(), s.as_array()
    if np.array_equal(a, b):
        raise CoincidentPointsError("coincident points")
    if np.array_equal(a, origin) or np.array_equal(b, origin):
        raise GeometryError("point coincides with the sensor origin")
    far, near = _farther_first(origin, a, b)
    to_near, to_sensor = near - far, origin - far
    return math.atan2(
        float(np.linalg.norm(np.cross(to_near, to_sensor))), float(np.dot(to_near, to_sensor))
    )


def pair_angles(
    o: NDArray[np.float64], t: NDArray[np.float64], others: NDArray[np.float64]
) -> NDArray[np.float64]:
    """
    Vectorized :func:`pair_angle` between ``t`` and each row of ``others``.

    ``t`` is either one point or one row per row of ``others``.
    """
    range_t = np.linalg.norm(t - o, axis=-1)
    ranges = np.linalg.norm(others - o, axis=1)
    t_far = (range_t > ranges) | ((range_t == ranges) & _lex_ge(t, others))
    far = np.where(t_far[:, None], t, others)
    near = np.where(t_far[:, None], others, t)
    to_near, to_sensor = near - far, o - far
    cross = np.linalg.norm(np.cross(to_near, to_sensor), axis=1)
    dot = np.einsum("ij,ij->i", to_near, to_sensor)
    angles: NDArray[np.float64] = np.arctan2(cross, dot)
    return angles


def _lex_ge(t: NDArray[np.float64], others: NDArray[np.float64]) -> NDArray[np.bool_]:
    """Row-wise ``tuple(t) >= tuple(row)``; ``t`` may be paired row by row."""
    result = np.ones(others.shape[0], dtype=bool)
    undecided = np.ones(others.shape[0], dtype=bool)
    for axis in range(3):
        greater = undecided & (t[..., axis] > others[:, axis])
        less = undecided & (t[..., axis] < others[:, axis])
        result[less] = False
        undecided &= ~(greater | less)
    return result


@dataclass(frozen=True)
class ProposalRegion:
    """Cloud points within horizontal distance ``radius`` of the picked point."""

    center: Point3
    seed: int
    indices: NDArray[np.intp]
    radius: float

    def __contains__(self, i: object) -> bool:
        if not isinstance(i, int | np.integer):
            return False
        position = int(np.searchsorted(self.indices, i))
        return position < self.indices.shape[0] and int(self.indices[position]) == int(i)


def extract_region(
    points: PointsLike, p: Point3, r: float, ground_z: float | None = None
) -> ProposalRegion:
    """
    Cylinder of radius ``r`` around ``p``, unbounded in z.

    The seed is ``p`` itself when it is a cloud point, otherwise the nearest
    cloud point inside the cylinder (lowest index on ties). Points below
    ``ground_z`` are left out when a ground height is given.

    Raises:
        EmptyRegionError: No cloud point lies in the cylinder
    """
    if not r > 0.0:
        raise ValidationException("region radius must be positive", field="region_radius")
    cloud = as_points(points)
    picked = p.as_array()
    horizontal = np.hypot(cloud[:, 0] - picked[0], cloud[:, 1] - picked[1])
    mask = horizontal <= r
    if ground_z is not None:
        mask &= cloud[:, 2] >= ground_z
    indices = np.flatnonzero(mask).astype(np.intp)
    if indices.shape[0] == 0:
        raise EmptyRegionError("empty proposal region")

    offsets = cloud[indices] - picked
    distances = np.einsum("ij,ij->i", offsets, offsets)
    seed = int(indices[int(np.argmin(distances))])
    return ProposalRegion(center=p, seed=seed, indices=indices, radius=float(r))


def grow_cluster(
    points: PointsLike,
    index: NeighborIndex,
    seed: int,
    region: ProposalRegion,
    cfg: ClusterConfig,
    origin: Point3 | None = None,
) -> NDArray[np.intp]:
    """
    Breadth-first growth of the seed's cluster.

    A merged point merges an unmerged neighbor that lies within the region
    radius of the seed (horizontal distance) and passes the angle rule of
    ``cfg.merge_when``. Exact duplicates of a merged point always merge.
    The result is the connected component of the seed under that relation,
    so it does not depend on point order. Returns sorted indices.

    Each layer of the search is expanded one grid cell at a time: the
    frontier points of a cell are tested against every candidate of the
    surrounding cells at once.

    Raises:
        SeedOutsideRegionError: ``seed`` is not a member of ``region``
    """
    if seed not in region:
        raise SeedOutsideRegionError(f"seed {seed} is outside the proposal region")
    cloud = as_points(points)
    if origin is None:
        sensor = np.asarray(cfg.sensor_origin, dtype=np.float64)
    else:
        sensor = origin.as_array()
    offsets = cloud[:, :2] - cloud[seed, :2]
    eligible = np.hypot(offsets[:, 0], offsets[:, 1]) <= region.radius
    if cfg.ground_z is not None:
        eligible &= cloud[:, 2] >= cfg.ground_z
    merge_above = cfg.merge_when == MergeRule.ANGLE_ABOVE
    reach = index.radius * index.radius

    merged = np.zeros(cloud.shape[0], dtype=bool)
    merged[seed] = True
    frontier = np.array([seed], dtype=np.intp)

    while frontier.shape[0]:
        reached: list[NDArray[np.intp]] = []
        for key, members in index.group_by_cell(frontier):
            candidates = index.neighborhood(key)
            candidates = candidates[eligible[candidates] & ~merged[candidates]]
            if candidates.shape[0] == 0:
                continue
            for start in range(0, members.shape[0], _FRONTIER_CHUNK):
                chunk = members[start : start + _FRONTIER_CHUNK]
                close = cdist(cloud[chunk], cloud[candidates], "sqeuclidean") <= reach
                rows, cols = np.nonzero(close)
                if rows.shape[0] == 0:
                    continue
                t, s = cloud[chunk[rows]], cloud[candidates[cols]]
                duplicate = np.all(t == s, axis=1)
                with np.errstate(invalid="ignore"):
                    angles = pair_angles(sensor, t, s)
                accepted = angles > cfg.lambda_theta if merge_above else angles < cfg.lambda_theta
                accepted = (accepted & ~np.isnan(angles)) | duplicate
                reached.append(candidates[cols[accepted]])
        if not reached:
            break
        frontier = np.unique(np.concatenate(reached)).astype(np.intp)
        merged[frontier] = True

    return np.flatnonzero(merged).astype(np.intp)
