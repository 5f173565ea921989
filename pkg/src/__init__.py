"""Open-set LIDAR 3D object detection."""

__version__ = "0.1.0"
