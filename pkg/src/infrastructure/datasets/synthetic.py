"""
Desk-scale synthetic LIDAR scenes.

Boxes are placed on flat ground around a spinning scanner at the cloud
origin and ray-cast at a fixed angular grid; each ray keeps its nearest
hit, so near objects are dense and back faces are missing. Objects keep
to separate bearings unless occlusion is allowed.

A simulated closed-set detector reports known objects with their true
box and an embedding near the class prototype, and reports unknown
objects as one to three anchor boxes of the most similar known class
with an embedding near the center of the embedding space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from shapely.geometry import Point as ShapelyPoint
from shapely.geometry import Polygon

from config.settings import UNKNOWN_LABEL, ShapeTemplate, SynthConfig
from src.domain.geometry import bev_corners, bev_polygon, to_box_frame
from src.domain.models.detection import ClosedSetDetection, DetectionSet
from src.domain.models.head import Prototypes
from src.domain.models.scene import Scene
from src.domain.value_objects.box import Box7
from src.infrastructure.observability import get_logger
from src.infrastructure.workers import parallel_map
from src.shared.exceptions import PlacementError

logger = get_logger(__name__)

MAX_DUPLICATES = 3
ANCHOR_JITTER = 0.15
ANCHOR_YAW_JITTER = 0.3
_DIRECTION_FLOOR = 1e-15


@dataclass(frozen=True)
class PlacedObject:
    """A sampled object before visibility is known."""

    box: Box7
    template: ShapeTemplate
    known: bool


@dataclass(frozen=True)
class SyntheticScene:
    """
    One generated scene and its simulated detector output.

    ``object_classes[k]`` is the true template name of ``scene.gt_boxes[k]``,
    including the names of unknown classes.
    """

    scene: Scene
    detections: DetectionSet
    object_classes: list[str]


def scene_id_for(index: int) -> str:
    return f"scene_{index:06d}"


@lru_cache(maxsize=8)
def ray_directions(
    azimuth_resolution_deg: float,
    elevation_resolution_deg: float,
    elevation_limits_deg: tuple[float, float],
) -> NDArray[np.float64]:
    """Unit ray directions of one sweep, elevation-major."""
    azimuths = np.deg2rad(np.arange(0.0, 360.0, azimuth_resolution_deg))
    bottom, top = elevation_limits_deg
    elevations = np.deg2rad(np.arange(bottom, top + 1e-9, elevation_resolution_deg))
    el, az = np.meshgrid(elevations, azimuths, indexing="ij")
    directions = np.stack(
        [np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1
    ).reshape(-1, 3)
    directions.setflags(write=False)
    return directions


def ray_box_distances(directions: NDArray[np.float64], box: Box7) -> NDArray[np.float64]:
    """
    Entry distance of each ray from the origin into ``box``, ``inf`` on a miss.

    Slab test in the box frame; rays starting inside the box never hit it.
    """
    origin = to_box_frame(np.zeros((1, 3)), box)[0]
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    local = np.empty_like(directions)
    local[:, 0] = c * directions[:, 0] + s * directions[:, 1]
    local[:, 1] = -s * directions[:, 0] + c * directions[:, 1]
    local[:, 2] = directions[:, 2]
    local = np.where(np.abs(local) < _DIRECTION_FLOOR, _DIRECTION_FLOOR, local)

    half = np.array([box.l, box.w, box.h], dtype=np.float64) / 2.0
    t1 = (-half - origin) / local
    t2 = (half - origin) / local
    near = np.minimum(t1, t2).max(axis=1)
    far = np.maximum(t1, t2).min(axis=1)
    hit = (near <= far) & (near > 0.0)
    return np.where(hit, near, np.inf)


def cast_rays(
    directions: NDArray[np.float64], boxes: list[Box7]
) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """Nearest hit per ray: hit points and the index of the box each lies on."""
    if not boxes:
        return np.zeros((0, 3)), np.zeros(0, dtype=np.int64)
    distances = np.stack([ray_box_distances(directions, box) for box in boxes])
    owner = np.argmin(distances, axis=0)
    nearest = distances[owner, np.arange(directions.shape[0])]
    hit = np.isfinite(nearest)
    points = directions[hit] * nearest[hit, None]
    return points, owner[hit].astype(np.int64)


def confusable_class(template: ShapeTemplate, known: list[ShapeTemplate]) -> int:
    """Index of the known template whose mean volume is closest."""
    volume = math.prod(template.mean_extents())
    return min(range(len(known)), key=lambda i: abs(math.prod(known[i].mean_extents()) - volume))


def _sample_box(rng: np.random.Generator, template: ShapeTemplate, cfg: SynthConfig) -> Box7:
    length = rng.uniform(*template.length)
    width = rng.uniform(*template.width)
    height = rng.uniform(*template.height)
    distance = rng.uniform(*cfg.range_limits)
    bearing = rng.uniform(-math.pi, math.pi)
    return Box7(
        cx=distance * math.cos(bearing),
        cy=distance * math.sin(bearing),
        cz=-cfg.sensor_height + height / 2.0,
        w=width,
        l=length,
        h=height,
        yaw=rng.uniform(-math.pi, math.pi),
        label=template.name,
    )


def column_spacing(box: Box7, azimuth_resolution_deg: float) -> float:
    """
    Widest horizontal gap between neighboring scan columns on the faces
    of ``box`` that face the scanner.

    Along a face at perpendicular distance ``p`` the gap at a point ``q``
    is ``|q|^2 * step / p``; it peaks at a corner.
    """
    step = math.radians(azimuth_resolution_deg)
    corners = bev_corners(box)
    widest = 0.0
    for a, b in zip(corners, np.roll(corners, -1, axis=0), strict=True):
        edge = b - a
        normal = np.array([edge[1], -edge[0]]) / float(np.hypot(edge[0], edge[1]))
        p = -float(normal @ a)
        if p <= 0.0:
            continue
        reach = max(float(a @ a), float(b @ b))
        widest = max(widest, reach * step / p)
    return widest


def bearing_span(box: Box7) -> tuple[float, float]:
    """Bearing of the box center and the half-width of its footprint's bearing interval."""
    middle = math.atan2(box.cy, box.cx)
    corners = bev_corners(box)
    half = max(
        abs(math.remainder(math.atan2(float(y), float(x)) - middle, math.tau)) for x, y in corners
    )
    return middle, half


def spans_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    """Whether two bearing intervals from :func:`bearing_span` intersect."""
    return abs(math.remainder(a[0] - b[0], math.tau)) < a[1] + b[1]


def _fits(candidate: Polygon, placed: list[Polygon], min_gap: float) -> bool:
    if candidate.distance(ShapelyPoint(0.0, 0.0)) <= 0.0:
        return False
    return all(candidate.distance(other) >= min_gap for other in placed)


def _acceptable(
    box: Box7, placed: list[PlacedObject], footprint: Polygon, cfg: SynthConfig
) -> bool:
    if not _fits(footprint, [bev_polygon(obj.box) for obj in placed], cfg.min_gap):
        return False
    if not cfg.allow_occlusion:
        span = bearing_span(box)
        if any(spans_overlap(span, bearing_span(obj.box)) for obj in placed):
            return False
    return column_spacing(box, cfg.azimuth_resolution_deg) <= cfg.max_column_spacing


def place_objects(rng: np.random.Generator, cfg: SynthConfig) -> list[PlacedObject]:
    """
    Sample objects whose footprints keep ``min_gap`` from each other.

    Unless ``allow_occlusion`` is set, no two objects share a bearing, so
    every object is seen unshadowed. Objects whose visible faces would be
    scanned coarser than ``max_column_spacing`` are redrawn.

    Raises:
        PlacementError: An object could not be placed within
            ``max_placement_attempts`` draws
    """
    low, high = cfg.objects_per_scene
    count = int(rng.integers(low, high + 1))
    placed: list[PlacedObject] = []
    for _ in range(count):
        known = not cfg.unknown_templates or rng.random() >= cfg.unknown_ratio
        pool = cfg.known_templates if known else cfg.unknown_templates
        template = pool[int(rng.integers(len(pool)))]
        for _attempt in range(cfg.max_placement_attempts):
            box = _sample_box(rng, template, cfg)
            if _acceptable(box, placed, bev_polygon(box), cfg):
                placed.append(PlacedObject(box=box, template=template, known=known))
                break
        else:
            raise PlacementError(
                f"could not place object {len(placed) + 1} of {count} after "
                f"{cfg.max_placement_attempts} attempts; lower the object density or min_gap, "
                "or raise max_column_spacing"
            )
    return placed


def _embedding(rng: np.random.Generator, center: NDArray[np.float64], sigma: float) -> list[float]:
    noise = rng.standard_normal(center.shape[0])
    embedding: list[float] = (center + sigma * noise).tolist()
    return embedding


def _anchor_boxes(
    rng: np.random.Generator,
    object_points: NDArray[np.float64],
    truth: Box7,
    anchor: ShapeTemplate,
    cfg: SynthConfig,
) -> list[Box7]:
    """Anchor-shaped boxes of the confusable class, centered near visible points."""
    length, width, height = anchor.mean_extents()
    boxes: list[Box7] = []
    for _ in range(int(rng.integers(1, MAX_DUPLICATES + 1))):
        pivot = object_points[int(rng.integers(object_points.shape[0]))]
        offset = rng.normal(0.0, ANCHOR_JITTER, 2)
        boxes.append(
            Box7(
                cx=float(pivot[0] + offset[0]),
                cy=float(pivot[1] + offset[1]),
                cz=-cfg.sensor_height + height / 2.0,
                w=width,
                l=length,
                h=height,
                yaw=truth.yaw + rng.uniform(-ANCHOR_YAW_JITTER, ANCHOR_YAW_JITTER),
                label=anchor.name,
            )
        )
    return boxes


def generate_scene(cfg: SynthConfig, index: int) -> SyntheticScene:
    """One scene from the stream seeded by ``(cfg.seed, index)``."""
    rng = np.random.default_rng([cfg.seed, index])
    scene_id = scene_id_for(index)
    objects = place_objects(rng, cfg)

    directions = ray_directions(
        cfg.azimuth_resolution_deg, cfg.elevation_resolution_deg, cfg.elevation_limits_deg
    )
    points, owner = cast_rays(directions, [obj.box for obj in objects])

    hits = np.bincount(owner, minlength=len(objects))
    annotated = [k for k in range(len(objects)) if hits[k] >= cfg.min_object_points]
    object_ids = np.full(len(objects), -1, dtype=np.int64)
    object_ids[annotated] = np.arange(len(annotated))

    class_names = [t.name for t in cfg.known_templates]
    prototypes = Prototypes(num_classes=len(class_names)).matrix()
    origin = np.zeros(len(class_names))

    gt_boxes: list[Box7] = []
    object_classes: list[str] = []
    detections: list[ClosedSetDetection] = []
    for k in annotated:
        obj = objects[k]
        object_id = int(object_ids[k])
        object_classes.append(obj.template.name)
        if obj.known:
            gt_boxes.append(obj.box)
            t = class_names.index(obj.template.name)
            detections.append(
                ClosedSetDetection(
                    box=obj.box,
                    embedding=_embedding(rng, prototypes[t], cfg.embedding_noise),
                    object_id=object_id,
                )
            )
            continue
        gt_boxes.append(obj.box.relabeled(UNKNOWN_LABEL))
        anchor = cfg.known_templates[confusable_class(obj.template, cfg.known_templates)]
        for box in _anchor_boxes(rng, points[owner == k], obj.box, anchor, cfg):
            detections.append(
                ClosedSetDetection(
                    box=box,
                    embedding=_embedding(rng, origin, cfg.embedding_noise),
                    object_id=object_id,
                )
            )

    scene = Scene(
        scene_id=scene_id,
        points=points.tolist(),
        gt_boxes=gt_boxes,
        point_object_ids=object_ids[owner].tolist(),
    )
    logger.debug(
        "scene_generated",
        scene_id=scene_id,
        points=int(points.shape[0]),
        objects=len(objects),
        annotated=len(annotated),
        detections=len(detections),
    )
    return SyntheticScene(
        scene=scene,
        detections=DetectionSet(scene_id=scene_id, class_names=class_names, detections=detections),
        object_classes=object_classes,
    )


def synth_generate(cfg: SynthConfig, workers: int | None = None) -> list[SyntheticScene]:
    """
    ``cfg.scenes`` scenes, generated in parallel.

    Every scene draws from its own seed stream, so the output does not
    depend on the pool size.
    """
    scenes = parallel_map(lambda i: generate_scene(cfg, i), list(range(cfg.scenes)), workers)
    logger.info("scenes_generated", scenes=len(scenes), seed=cfg.seed)
    return scenes

