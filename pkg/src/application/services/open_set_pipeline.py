"""
Open-set detection: prototype scoring, EDS proposals, clustering recovery.

``run_mluc`` diverts low-EDS detections to unknown-object recovery: seed a
point inside the box, grow a depth cluster in the surrounding cylinder,
fit a tight box and suppress duplicates largest first. ``run_naive``
relabels low-confidence detections as unknown without touching geometry.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from config.settings import UNKNOWN_LABEL, NmsPriority, PipelineConfig, SeedPick
from src.domain.clustering import NeighborIndex, build_index, extract_region, grow_cluster
from src.domain.geometry import (
    BOUNDARY_TOLERANCE,
    PointsLike,
    as_points,
    bev_area,
    box_volume,
    iou_3d,
    min_oriented_box,
    points_in_box,
)
from src.domain.metric import as_embedding, class_probabilities, eds, logit_probabilities
from src.domain.models.detection import ClosedSetDetection, Detection, Diagnostics, OpenSetResult
from src.domain.models.head import HeadKind, Prototypes
from src.domain.value_objects.box import Box7
from src.domain.value_objects.point import Point3
from src.infrastructure.observability import get_logger, get_metrics_collector
from src.shared.exceptions import NoSeedPointError, ProposalError, ValidationException

logger = get_logger(__name__)

RawDetection = ClosedSetDetection | tuple[Box7, Sequence[float] | NDArray[np.float64]]


def default_class_names(num_classes: int) -> list[str]:
    return [f"class_{t}" for t in range(1, num_classes + 1)]


def _unpack(det: RawDetection) -> tuple[Box7, NDArray[np.float64]]:
    if isinstance(det, ClosedSetDetection):
        return det.box, np.asarray(det.embedding, dtype=np.float64)
    box, embedding = det
    return box, np.asarray(embedding, dtype=np.float64)


def score_detections(
    dets: Sequence[RawDetection],
    protos: Prototypes,
    kind: HeadKind = HeadKind.METRIC,
    class_names: Sequence[str] | None = None,
) -> list[Detection]:
    """
    Probabilities, naive score, EDS and argmax label for each detection.

    Metric heads turn distances to the prototypes into probabilities;
    softmax heads apply a plain softmax to their logits. EDS is measured
    on the head output in both cases.
    """
    names = (
        list(class_names) if class_names is not None else default_class_names(protos.num_classes)
    )
    if len(names) != protos.num_classes:
        raise ValidationException(
            f"expected {protos.num_classes} class names, got {len(names)}", field="class_names"
        )

    scored: list[Detection] = []
    for det in dets:
        box, raw = _unpack(det)
        embedding = as_embedding(raw, protos)
        if kind == HeadKind.METRIC:
            probs = class_probabilities(embedding, protos)
        else:
            probs = logit_probabilities(embedding)
        prob_list = probs.tolist()
        scored.append(
            Detection(
                box=box.relabeled(names[int(np.argmax(probs))]),
                embedding=embedding.tolist(),
                probs=prob_list,
                naive_score=max(prob_list),
                eds_score=eds(embedding, protos),
            )
        )
    return scored


def select_unknown_proposals(dets: Sequence[Detection], cfg: PipelineConfig) -> list[Detection]:
    """Detections whose EDS falls below ``lambda_eds``, in input order."""
    return [det for det in dets if det.eds_score < cfg.lambda_eds]


def _seed_generator(cfg: PipelineConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng([cfg.rng_seed, stream])


def pick_seed_index(
    det: Detection,
    cloud: PointsLike,
    cfg: PipelineConfig,
    stream: int = 0,
) -> int:
    """
    Index of the cloud point that seeds clustering for ``det``.

    ``center_nearest`` takes the in-box point nearest the box center, lowest
    index on ties; ``random`` draws uniformly from the in-box points with a
    generator derived from ``rng_seed`` and ``stream``.

    Raises:
        NoSeedPointError: The box contains no cloud point
    """
    points = as_points(cloud)
    inside = np.flatnonzero(points_in_box(points, det.box, tol=BOUNDARY_TOLERANCE))
    if inside.shape[0] == 0:
        raise NoSeedPointError("no cloud point inside the detection box")
    if cfg.seed_pick == SeedPick.RANDOM:
        return int(inside[int(_seed_generator(cfg, stream).integers(inside.shape[0]))])
    offsets = points[inside] - det.box.center
    return int(inside[int(np.argmin(np.einsum("ij,ij->i", offsets, offsets)))])


def pick_seed(det: Detection, cloud: PointsLike, cfg: PipelineConfig, stream: int = 0) -> Point3:
    """The seed point itself; see :func:`pick_seed_index`."""
    return Point3.from_array(as_points(cloud)[pick_seed_index(det, cloud, cfg, stream)])


def _priority(box: Box7, priority: NmsPriority) -> float:
    return box_volume(box) if priority == NmsPriority.VOLUME else bev_area(box)


def nms_largest_first(
    boxes: Sequence[Box7],
    iou_threshold: float,
    priority: NmsPriority = NmsPriority.VOLUME,
) -> list[Box7]:
    """
    Largest-first suppression.

    A box survives if its IoU with every box kept before it is at most
    ``iou_threshold``.
    """
    order = sorted(range(len(boxes)), key=lambda i: -_priority(boxes[i], priority))
    kept: list[Box7] = []
    for i in order:
        candidate = boxes[i]
        if all(iou_3d(candidate, other) <= iou_threshold for other in kept):
            kept.append(candidate)
    return kept


@dataclass(frozen=True)
class Recovery:
    """Outcome of one proposal: a fitted box, a dropped cluster, or a skip."""

    box: Box7 | None = None
    cluster_size: int = 0
    skip_reason: str | None = None

    @property
    def skipped(self) -> bool:
        return self.skip_reason is not None

    @property
    def dropped(self) -> bool:
        return self.box is None and not self.skipped


@dataclass
class ProposalRecoverer:
    """
    Recovers unknown boxes from one scene's cloud.

    The neighbor index is built on first use and recoveries are cached by
    detection position, so threshold sweeps cluster each proposal once.
    """

    cloud: NDArray[np.float64]
    cfg: PipelineConfig
    _index: NeighborIndex | None = field(default=None, init=False, repr=False)
    _cache: dict[int, Recovery] = field(default_factory=dict, init=False, repr=False)

    @property
    def index(self) -> NeighborIndex:
        if self._index is None:
            self._index = build_index(self.cloud, self.cfg.cluster.neighbor_radius)
        return self._index

    def recover(self, position: int, det: Detection) -> Recovery:
        if position not in self._cache:
            self._cache[position] = recover_unknown_box(
                det, self.cloud, self.index, self.cfg, position
            )
        return self._cache[position]


def recover_unknown_box(
    det: Detection,
    cloud: PointsLike,
    index: NeighborIndex,
    cfg: PipelineConfig,
    stream: int = 0,
) -> Recovery:
    """Seed, region, growth and tight box for a single proposal."""
    points = as_points(cloud)
    cluster_cfg = cfg.cluster
    try:
        seed = pick_seed(det, points, cfg, stream)
        region = extract_region(points, seed, cluster_cfg.region_radius, cluster_cfg.ground_z)
        members = grow_cluster(points, index, region.seed, region, cluster_cfg)
    except ProposalError as exc:
        return Recovery(skip_reason=exc.error_code)

    if members.shape[0] < cluster_cfg.min_cluster_points:
        return Recovery(cluster_size=int(members.shape[0]))
    box = min_oriented_box(points[members], min_extent=cfg.min_box_extent, label=UNKNOWN_LABEL)
    return Recovery(box=box, cluster_size=int(members.shape[0]))


def assemble_mluc(
    scored: Sequence[Detection],
    cfg: PipelineConfig,
    recoverer: ProposalRecoverer,
    scene_id: str = "",
) -> OpenSetResult:
    """Partition by EDS, recover a box per proposal and suppress duplicates."""
    metrics = get_metrics_collector()
    known: list[Detection] = []
    recovered: list[Box7] = []
    diagnostics = Diagnostics()

    for position, det in enumerate(scored):
        if not det.eds_score < cfg.lambda_eds:
            known.append(det)
            continue
        diagnostics.proposals += 1
        outcome = recoverer.recover(position, det)
        if outcome.skipped:
            diagnostics.skipped_proposals += 1
            metrics.increment_counter("skipped_proposals", {"reason": outcome.skip_reason or ""})
            logger.warning(
                "proposal_skipped",
                scene_id=scene_id,
                detection=position,
                reason=outcome.skip_reason,
            )
        elif outcome.box is None:
            diagnostics.dropped_clusters += 1
            metrics.increment_counter("dropped_clusters")
            logger.warning(
                "cluster_dropped",
                scene_id=scene_id,
                detection=position,
                cluster_size=outcome.cluster_size,
                min_cluster_points=cfg.cluster.min_cluster_points,
            )
        else:
            metrics.record_histogram("cluster_size_points", float(outcome.cluster_size))
            recovered.append(outcome.box)

    unknown = nms_largest_first(recovered, cfg.nms_iou, cfg.nms_priority)
    metrics.increment_counter("proposals", value=float(diagnostics.proposals))
    metrics.increment_counter("unknown_boxes", value=float(len(unknown)))
    return OpenSetResult(scene_id=scene_id, known=known, unknown=unknown, diagnostics=diagnostics)


def run_mluc(
    cloud: PointsLike,
    dets: Sequence[RawDetection],
    protos: Prototypes,
    cfg: PipelineConfig,
    kind: HeadKind = HeadKind.METRIC,
    class_names: Sequence[str] | None = None,
    scene_id: str = "",
) -> OpenSetResult:
    """
    Full open-set pass over one scene.

    Known detections are exactly the non-proposals, unchanged. Proposal
    failures are counted in the diagnostics and never abort the scene.
    """
    scored = score_detections(dets, protos, kind, class_names)
    recoverer = ProposalRecoverer(cloud=as_points(cloud), cfg=cfg)
    return assemble_mluc(scored, cfg, recoverer, scene_id)


def run_naive(dets: Sequence[Detection], cfg: PipelineConfig, scene_id: str = "") -> OpenSetResult:
    """Relabel detections scoring below ``lambda_naive`` as unknown, geometry unchanged."""
    known: list[Detection] = []
    unknown: list[Box7] = []
    for det in dets:
        if det.naive_score < cfg.lambda_naive:
            unknown.append(det.box.relabeled(UNKNOWN_LABEL))
        else:
            known.append(det)
    return OpenSetResult(
        scene_id=scene_id,
        known=known,
        unknown=unknown,
        diagnostics=Diagnostics(proposals=len(unknown)),
    )


def run_eds_relabel(
    dets: Sequence[Detection], cfg: PipelineConfig, scene_id: str = ""
) -> OpenSetResult:
    """
    Divert detections by EDS as MLUC does, but keep each proposal's own box.

    Proposals are relabeled unknown and deduplicated largest-first; no
    cluster is grown.
    """
    proposals = select_unknown_proposals(dets, cfg)
    known = [det for det in dets if not det.eds_score < cfg.lambda_eds]
    relabeled = [det.box.relabeled(UNKNOWN_LABEL) for det in proposals]
    unknown = nms_largest_first(relabeled, cfg.nms_iou, cfg.nms_priority)
    return OpenSetResult(
        scene_id=scene_id,
        known=known,
        unknown=unknown,
        diagnostics=Diagnostics(proposals=len(proposals)),
    )
