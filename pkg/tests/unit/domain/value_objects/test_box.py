"""Unit tests for the oriented box value object."""

from __future__ import annotations

import math

import pytest
from pydantic import ValidationError

from src.domain.value_objects import Box7, Point3
from src.domain.value_objects.box import normalize_yaw


@pytest.mark.unit
@pytest.mark.fast
class TestNormalizeYaw:
    """Tests for yaw wrapping."""

    @pytest.mark.parametrize(
        ("yaw", "expected"),
        [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi / 2, -math.pi / 2)],
    )
    def test_wraps_into_half_open_interval(self, yaw: float, expected: float) -> None:
        """Angles land in (-pi, pi]."""
        assert normalize_yaw(yaw) == pytest.approx(expected)


@pytest.mark.unit
@pytest.mark.fast
class TestBox7:
    """Tests for box invariants."""

    def test_yaw_is_normalized_on_construction(self) -> None:
        """Stored yaw is always wrapped."""
        box = Box7(cx=0.0, cy=0.0, cz=0.0, w=1.0, l=1.0, h=1.0, yaw=2 * math.pi + 0.5)
        assert box.yaw == pytest.approx(0.5)

    @pytest.mark.parametrize("field", ["w", "l", "h"])
    def test_extents_must_be_positive(self, field: str) -> None:
        """Zero extents are rejected."""
        values = {"cx": 0.0, "cy": 0.0, "cz": 0.0, "w": 1.0, "l": 1.0, "h": 1.0, field: 0.0}
        with pytest.raises(ValidationError):
            Box7.model_validate(values)

    def test_rejects_non_finite_center(self) -> None:
        """Centers are finite."""
        with pytest.raises(ValidationError):
            Box7(cx=math.inf, cy=0.0, cz=0.0, w=1.0, l=1.0, h=1.0)

    def test_relabeled_keeps_geometry(self) -> None:
        """Relabeling changes only the label."""
        box = Box7(cx=1.0, cy=2.0, cz=3.0, w=1.0, l=2.0, h=3.0, yaw=0.4, label="car")
        other = box.relabeled("unknown")
        assert other.is_unknown and not box.is_unknown
        assert other.same_geometry(box)

    def test_center(self) -> None:
        """The center as an array."""
        box = Box7(cx=1.0, cy=2.0, cz=3.0, w=1.0, l=1.0, h=1.0)
        assert box.center.tolist() == [1.0, 2.0, 3.0]


@pytest.mark.unit
@pytest.mark.fast
class TestPoint3:
    """Tests for cloud points."""

    def test_array_round_trip(self) -> None:
        """Points convert to and from arrays."""
        point = Point3.from_array((1.0, -2.0, 0.5))
        assert point.as_array().tolist() == [1.0, -2.0, 0.5]

    def test_rejects_nan(self) -> None:
        """Coordinates are finite."""
        with pytest.raises(ValidationError):
            Point3(x=math.nan, y=0.0, z=0.0)
