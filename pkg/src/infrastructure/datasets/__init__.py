"""Dataset adapters: KITTI readers and the synthetic scanner."""

from .kitti import VelodyneScan, read_kitti_labels, read_kitti_velodyne
from .synthetic import SyntheticScene, generate_scene, synth_generate

__all__ = [
    "SyntheticScene",
    "VelodyneScan",
    "generate_scene",
    "read_kitti_labels",
    "read_kitti_velodyne",
    "synth_generate",
]
