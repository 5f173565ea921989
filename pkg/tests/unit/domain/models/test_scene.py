"""Unit tests for the scene entity."""

from __future__ import annotations

import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.domain.models import Scene


@pytest.mark.unit
@pytest.mark.fast
class TestScene:
    """Tests for scene invariants and conversions."""

    def test_empty_points_is_valid(self) -> None:
        """A scene may hold no points."""
        scene = Scene(scene_id="empty")
        assert scene.cloud().shape == (0, 3)

    def test_requires_scene_id(self) -> None:
        """Scene ids cannot be empty."""
        with pytest.raises(ValidationError):
            Scene(scene_id="")

    def test_rejects_non_finite_points(self) -> None:
        """All coordinates are finite."""
        with pytest.raises(ValidationError):
            Scene(scene_id="s", points=[(0.0, math.nan, 1.0)])

    def test_object_ids_match_points(self) -> None:
        """Per-point object ids are absent or one per point."""
        with pytest.raises(ValidationError, match="point_object_ids"):
            Scene(scene_id="s", points=[(0.0, 0.0, 0.0)], point_object_ids=[0, 1])

    def test_cloud_array(self) -> None:
        """Points convert to an (N, 3) float array in order."""
        scene = Scene(scene_id="s", points=[(1.0, 2.0, 3.0), (4.0, 5.0, 6.0)])
        assert np.array_equal(scene.cloud(), np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]))
