"""Unit tests for oriented-box geometry."""

from __future__ import annotations

import math

import numpy as np
import pytest

from src.domain.geometry import (
    BOUNDARY_TOLERANCE,
    bev_corners,
    bev_intersection_area,
    box_volume,
    iou_3d,
    min_oriented_box,
    point_in_box,
    points_in_box,
)
from src.domain.value_objects import Box7, Point3
from src.shared.exceptions import EmptyClusterError, GeometryError


def unit_box(cx: float = 0.0, cy: float = 0.0, cz: float = 0.0, yaw: float = 0.0) -> Box7:
    return Box7(cx=cx, cy=cy, cz=cz, w=1.0, l=1.0, h=1.0, yaw=yaw)


def brute_force_min_area(xy: np.ndarray) -> float:
    angles = np.deg2rad(np.arange(0.0, 90.0, 0.1))
    c, s = np.cos(angles)[:, None], np.sin(angles)[:, None]
    u = c * xy[:, 0] + s * xy[:, 1]
    v = -s * xy[:, 0] + c * xy[:, 1]
    areas = (u.max(axis=1) - u.min(axis=1)) * (v.max(axis=1) - v.min(axis=1))
    return float(areas.min())


@pytest.mark.unit
@pytest.mark.fast
class TestPointInBox:
    """Tests for closed-box containment."""

    def test_center_is_inside(self) -> None:
        """The box center is inside the box."""
        assert point_in_box(Point3(x=0.0, y=0.0, z=0.0), unit_box())

    def test_point_beyond_half_extent_is_outside(self) -> None:
        """A point past the half-extent along x is outside."""
        assert not point_in_box(Point3(x=0.51, y=0.0, z=0.0), unit_box())

    def test_boundary_point_is_inside(self) -> None:
        """Points on a face count as inside."""
        assert point_in_box(Point3(x=0.5, y=-0.5, z=0.5), unit_box())

    def test_rotated_box_uses_local_frame(self) -> None:
        """A point on the heading of a quarter-turned box is inside."""
        box = Box7(cx=0.0, cy=0.0, cz=0.0, w=1.0, l=2.0, h=1.0, yaw=math.pi / 4)
        assert point_in_box(Point3(x=0.6, y=0.6, z=0.0), box)

    def test_tolerance_widens_the_box(self) -> None:
        """A positive tolerance admits points just outside."""
        p = Point3(x=0.5 + 1e-10, y=0.0, z=0.0)
        assert not point_in_box(p, unit_box())
        assert point_in_box(p, unit_box(), tol=BOUNDARY_TOLERANCE)

    def test_mask_over_many_points(self) -> None:
        """The vectorized mask agrees with the scalar check."""
        points = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.4, -0.4]])
        mask = points_in_box(points, unit_box())
        assert mask.tolist() == [True, False, True]


@pytest.mark.unit
@pytest.mark.fast
class TestBevIntersectionArea:
    """Tests for rotated rectangle intersection."""

    def test_identical_squares(self) -> None:
        """Identical unit squares overlap by their full area."""
        assert bev_intersection_area(unit_box(), unit_box()) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint_squares(self) -> None:
        """Far apart squares do not overlap."""
        assert bev_intersection_area(unit_box(), unit_box(cx=10.0)) == 0.0

    def test_half_overlap(self) -> None:
        """Squares shifted by half a side overlap by half."""
        assert bev_intersection_area(unit_box(), unit_box(cx=0.5)) == pytest.approx(0.5, abs=1e-12)

    def test_symmetric(self) -> None:
        """Argument order does not matter."""
        a = Box7(cx=0.2, cy=0.1, cz=0.0, w=1.3, l=2.1, h=1.0, yaw=0.4)
        b = Box7(cx=-0.3, cy=0.4, cz=0.0, w=0.9, l=1.7, h=1.0, yaw=-1.1)
        assert bev_intersection_area(a, b) == pytest.approx(bev_intersection_area(b, a), abs=1e-12)

    def test_corners_are_counter_clockwise(self) -> None:
        """Corner order yields a positive shoelace area equal to w*l."""
        box = Box7(cx=1.0, cy=2.0, cz=0.0, w=1.5, l=3.0, h=1.0, yaw=0.7)
        x, y = bev_corners(box).T
        shoelace = 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
        assert shoelace == pytest.approx(4.5)


@pytest.mark.unit
@pytest.mark.slow
class TestBevIntersectionMonteCarlo:
    """Compare the exact area with uniform point sampling."""

    def test_agrees_with_sampling_on_random_pairs(self) -> None:
        """Exact and sampled areas agree within 1e-2 on 100 rotated pairs."""
        rng = np.random.default_rng(7)
        samples = 1_000_000

        for _ in range(100):
            boxes = [
                Box7(
                    cx=float(rng.uniform(-0.3, 0.3)),
                    cy=float(rng.uniform(-0.3, 0.3)),
                    cz=0.0,
                    w=float(rng.uniform(0.5, 1.5)),
                    l=float(rng.uniform(0.5, 1.5)),
                    h=1.0,
                    yaw=float(rng.uniform(-math.pi, math.pi)),
                )
                for _ in range(2)
            ]
            corners = np.vstack([bev_corners(b) for b in boxes])
            low, high = corners.min(axis=0), corners.max(axis=0)
            xy = rng.uniform(low, high, size=(samples, 2))
            points = np.column_stack([xy, np.zeros(samples)])
            inside = points_in_box(points, boxes[0]) & points_in_box(points, boxes[1])
            estimate = float(inside.mean()) * float(np.prod(high - low))

            assert bev_intersection_area(boxes[0], boxes[1]) == pytest.approx(estimate, abs=1e-2)


@pytest.mark.unit
@pytest.mark.fast
class TestIou3d:
    """Tests for 3D intersection over union."""

    def test_identity(self) -> None:
        """A box has IoU exactly 1 with itself."""
        box = Box7(cx=3.0, cy=-1.0, cz=0.5, w=1.7, l=4.1, h=1.5, yaw=0.3)
        assert iou_3d(box, box) == 1.0

    def test_half_shifted_cubes(self) -> None:
        """Unit cubes offset by half a side have IoU one third."""
        assert iou_3d(unit_box(), unit_box(cx=0.5)) == pytest.approx(1.0 / 3.0, abs=1e-9)

    def test_disjoint(self) -> None:
        """Disjoint boxes have zero IoU."""
        assert iou_3d(unit_box(), unit_box(cx=5.0)) == 0.0

    def test_vertically_disjoint(self) -> None:
        """Boxes stacked without z overlap have zero IoU."""
        assert iou_3d(unit_box(), unit_box(cz=1.5)) == 0.0

    def test_symmetric_and_bounded(self) -> None:
        """IoU is symmetric and within [0, 1] on random boxes."""
        rng = np.random.default_rng(3)
        for _ in range(50):
            a, b = (
                Box7(
                    cx=float(rng.uniform(-1, 1)),
                    cy=float(rng.uniform(-1, 1)),
                    cz=float(rng.uniform(-0.5, 0.5)),
                    w=float(rng.uniform(0.5, 2)),
                    l=float(rng.uniform(0.5, 4)),
                    h=float(rng.uniform(0.5, 2)),
                    yaw=float(rng.uniform(-math.pi, math.pi)),
                )
                for _ in range(2)
            )
            forward, backward = iou_3d(a, b), iou_3d(b, a)
            assert forward == pytest.approx(backward, abs=1e-12)
            assert 0.0 <= forward <= 1.0

    def test_half_turn_invariance(self) -> None:
        """Adding pi to both yaws leaves IoU unchanged."""
        a = Box7(cx=0.0, cy=0.0, cz=0.0, w=1.0, l=3.0, h=1.0, yaw=0.2)
        b = Box7(cx=0.4, cy=0.3, cz=0.1, w=1.2, l=2.5, h=1.0, yaw=0.9)
        turned_a = Box7(cx=0.0, cy=0.0, cz=0.0, w=1.0, l=3.0, h=1.0, yaw=0.2 + math.pi)
        turned_b = Box7(cx=0.4, cy=0.3, cz=0.1, w=1.2, l=2.5, h=1.0, yaw=0.9 + math.pi)
        assert iou_3d(turned_a, turned_b) == pytest.approx(iou_3d(a, b), abs=1e-9)


@pytest.mark.unit
@pytest.mark.fast
class TestBoxVolume:
    """Tests for box volume."""

    def test_unit_cube(self) -> None:
        """A unit cube has volume 1."""
        assert box_volume(unit_box()) == 1.0

    def test_product_of_extents(self) -> None:
        """Volume is the product of the extents."""
        assert box_volume(Box7(cx=0, cy=0, cz=0, w=2, l=3, h=4)) == 24.0

    def test_yaw_invariant(self) -> None:
        """Rotating a box does not change its volume."""
        box = Box7(cx=0, cy=0, cz=0, w=2, l=3, h=4, yaw=0.0)
        rotated = Box7(cx=0, cy=0, cz=0, w=2, l=3, h=4, yaw=1.2)
        assert box_volume(box) == box_volume(rotated)


@pytest.mark.unit
@pytest.mark.fast
class TestMinOrientedBox:
    """Tests for the rotating-calipers tight box."""

    def test_axis_aligned_rectangle(self) -> None:
        """Corners of a 2x1 rectangle give the rectangle itself."""
        points = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [2.0, 1.0, 0.0], [0.0, 1.0, 0.0]])
        box = min_oriented_box(points, min_extent=0.1)

        assert sorted([box.l, box.w]) == pytest.approx([1.0, 2.0])
        assert box.h == pytest.approx(0.1)
        assert box.cx == pytest.approx(1.0)
        assert box.cy == pytest.approx(0.5)
        assert math.sin(2.0 * box.yaw) == pytest.approx(0.0, abs=1e-12)
        assert box.label == "unknown"

    def test_diamond_gives_quarter_turned_square(self) -> None:
        """A diamond is enclosed by a square of side sqrt(2) at 45 degrees."""
        points = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
        box = min_oriented_box(points)

        assert box.l * box.w == pytest.approx(2.0)
        assert box.l == pytest.approx(math.sqrt(2.0))
        assert math.remainder(box.yaw - math.pi / 4, math.pi / 2) == pytest.approx(0.0, abs=1e-12)

    def test_single_point_gets_minimum_extents(self) -> None:
        """A lone point yields a minimum-extent cube around it."""
        box = min_oriented_box([Point3(x=3.0, y=-2.0, z=1.0)])

        assert (box.w, box.l, box.h) == pytest.approx((0.1, 0.1, 0.1))
        assert (box.cx, box.cy, box.cz) == pytest.approx((3.0, -2.0, 1.0))

    def test_collinear_points(self) -> None:
        """Collinear points span the line and get the minimum width."""
        points = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 0.2], [2.0, 2.0, 0.4]])
        box = min_oriented_box(points)

        assert box.l == pytest.approx(2.0 * math.sqrt(2.0))
        assert box.w == pytest.approx(0.1)
        assert box.h == pytest.approx(0.4)
        assert points_in_box(points, box, tol=BOUNDARY_TOLERANCE).all()

    def test_empty_input_raises(self) -> None:
        """An empty cluster has no box."""
        with pytest.raises(EmptyClusterError, match="empty cluster"):
            min_oriented_box(np.empty((0, 3)))

    def test_non_positive_min_extent_raises(self) -> None:
        """The extent floor must be positive."""
        with pytest.raises(GeometryError):
            min_oriented_box(np.zeros((1, 3)), min_extent=0.0)


@pytest.mark.unit
@pytest.mark.slow
class TestMinOrientedBoxOracle:
    """Compare the calipers result with a brute-force angle sweep."""

    def test_random_point_sets(self) -> None:
        """Area never exceeds the 0.1-degree sweep and every point is enclosed."""
        rng = np.random.default_rng(11)

        for _ in range(100):
            count = int(rng.integers(3, 40))
            points = rng.normal(size=(count, 3)) * rng.uniform(0.5, 3.0, size=3)
            box = min_oriented_box(points)

            assert box.l * box.w <= brute_force_min_area(points[:, :2]) + 1e-6
            assert points_in_box(points, box, tol=BOUNDARY_TOLERANCE).all()
