"""
Value objects for the domain layer.

Immutable, self-validating geometric primitives: cloud points and
yaw-oriented boxes.
"""

from .box import Box7, normalize_yaw
from .point import Point3

__all__ = ["Box7", "Point3", "normalize_yaw"]
