"""
Open-set evaluation.

Greedy score-ordered matching, interpolated average precision, known mAP
over the classes with ground truth, class-agnostic unknown AP and
recall, and the harmonic mean that combines known and unknown quality.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import Self

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field, model_validator

from config.settings import ApMethod, EvalConfig, UnknownScore
from src.domain.geometry import box_volume, iou_3d
from src.domain.models.detection import OpenSetResult
from src.domain.models.scene import Scene
from src.domain.value_objects.box import Box7
from src.infrastructure.observability import get_logger
from src.shared.exceptions import SceneMismatchError, ValidationException

logger = get_logger(__name__)

HARMONIC_TOLERANCE = 1e-6

ScoredBox = tuple[Box7, float]


class MatchResult(BaseModel):
    """Detections in score order with their true-positive flags."""

    scores: list[float] = Field(default_factory=list)
    true_positive: list[bool] = Field(default_factory=list)
    num_gt: int = Field(default=0, ge=0)

    @property
    def matched_gt(self) -> int:
        return sum(self.true_positive)

    def merged(self, other: MatchResult) -> MatchResult:
        return MatchResult(
            scores=self.scores + other.scores,
            true_positive=self.true_positive + other.true_positive,
            num_gt=self.num_gt + other.num_gt,
        )


class EvalReport(BaseModel):
    """Open-set metrics in percent."""

    map_known: float = Field(ge=0.0, le=100.0)
    ap_unknown: float = Field(ge=0.0, le=100.0)
    recall_unknown: float = Field(ge=0.0, le=100.0)
    map_harm: float = Field(ge=0.0, le=100.0)
    per_class_ap: dict[str, float] = Field(default_factory=dict)
    gt_counts: dict[str, int] = Field(default_factory=dict)
    scenes: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def validate_harmonic(self) -> Self:
        """The combined score is the harmonic mean of its own fields."""
        if abs(map_harm(self.map_known, self.ap_unknown) - self.map_harm) > HARMONIC_TOLERANCE:
            raise ValueError("map_harm is inconsistent with map_known and ap_unknown")
        return self


class SweepPoint(BaseModel):
    """Metrics of one threshold of a sweep."""

    threshold: float
    recall_unknown: float = Field(ge=0.0, le=100.0)
    ap_unknown: float = Field(ge=0.0, le=100.0)
    map_known: float = Field(ge=0.0, le=100.0)
    map_harm: float = Field(ge=0.0, le=100.0)

    @classmethod
    def from_report(cls, threshold: float, report: EvalReport) -> SweepPoint:
        return cls(
            threshold=threshold,
            recall_unknown=report.recall_unknown,
            ap_unknown=report.ap_unknown,
            map_known=report.map_known,
            map_harm=report.map_harm,
        )


def match_detections(
    dets: Sequence[ScoredBox], gts: Sequence[Box7], iou_threshold: float
) -> MatchResult:
    """
    Greedy matching in descending score order.

    Each detection takes the unmatched ground truth of highest IoU, provided
    it reaches ``iou_threshold``; each ground truth is matched at most once.
    """
    order = sorted(range(len(dets)), key=lambda i: -dets[i][1])
    matched = [False] * len(gts)
    scores: list[float] = []
    flags: list[bool] = []

    for i in order:
        box, score = dets[i]
        best, best_iou = -1, iou_threshold
        for j, gt in enumerate(gts):
            if matched[j]:
                continue
            overlap = iou_3d(box, gt)
            if overlap >= best_iou and (best < 0 or overlap > best_iou):
                best, best_iou = j, overlap
        if best >= 0:
            matched[best] = True
        scores.append(float(score))
        flags.append(best >= 0)

    return MatchResult(scores=scores, true_positive=flags, num_gt=len(gts))


def _recall_samples(points: int) -> NDArray[np.float64]:
    """11 points include recall 0; any other count samples k/N for k = 1..N."""
    if points == 11:
        return np.linspace(0.0, 1.0, 11)
    return np.arange(1, points + 1, dtype=np.float64) / points


def _percent(fraction: float) -> float:
    return min(100.0, max(0.0, fraction * 100.0))


def average_precision(
    flags: Sequence[bool],
    scores: Sequence[float],
    num_gt: int,
    interpolation_points: int = 40,
    method: ApMethod = ApMethod.INTERPOLATED,
) -> float:
    """
    Area under the interpolated precision-recall curve, in percent.

    Precision at recall r is the best precision reached at any recall of at
    least r. ``interpolated`` averages it over sampled recalls;
    ``continuous`` integrates it over every recall step.
    """
    if num_gt < 0:
        raise ValidationException("num_gt cannot be negative", field="num_gt")
    if len(flags) != len(scores):
        raise ValidationException("flags and scores differ in length", field="flags")
    if num_gt == 0:
        logger.info("no_ground_truth", detections=len(flags))
        return 0.0
    if not flags:
        return 0.0

    order = np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")
    tp = np.asarray(flags, dtype=np.float64)[order]
    tp_cum = np.cumsum(tp)
    fp_cum = np.cumsum(1.0 - tp)
    recall = tp_cum / num_gt
    precision = tp_cum / (tp_cum + fp_cum)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]

    if method == ApMethod.CONTINUOUS:
        steps = np.diff(np.concatenate([[0.0], recall]))
        return _percent(float(np.sum(steps * envelope)))

    samples = _recall_samples(interpolation_points)
    positions = np.searchsorted(recall, samples, side="left")
    reachable = positions < recall.shape[0]
    sampled = np.zeros_like(samples)
    sampled[reachable] = envelope[positions[reachable]]
    return _percent(float(sampled.mean()))


def map_harm(map_known: float, ap_unknown: float) -> float:
    """Harmonic mean of known mAP and unknown AP; zero when both are zero."""
    total = map_known + ap_unknown
    if total == 0.0:
        return 0.0
    return 2.0 * map_known * ap_unknown / total


def recall_unknown(
    unknown_dets: Sequence[Box7], unknown_gts: Sequence[Box7], iou_threshold: float = 0.1
) -> float:
    """Percentage of unknown ground truths matched by some unknown box."""
    if not unknown_gts:
        return 0.0
    scored = [(box, box_volume(box)) for box in unknown_dets]
    result = match_detections(scored, unknown_gts, iou_threshold)
    return 100.0 * result.matched_gt / len(unknown_gts)


def _unknown_score(box: Box7, cfg: EvalConfig) -> float:
    return box_volume(box) if cfg.unknown_score == UnknownScore.VOLUME else 1.0


def pair_results(
    scenes: Sequence[Scene], results: Sequence[OpenSetResult]
) -> list[tuple[Scene, OpenSetResult]]:
    """
    Align results with ground-truth scenes by scene id.

    Scenes without a result are evaluated against an empty result.

    Raises:
        SceneMismatchError: A result names a scene with no ground truth
    """
    by_id = {scene.scene_id: scene for scene in scenes}
    unmatched = sorted({r.scene_id for r in results} - by_id.keys())
    if unmatched:
        raise SceneMismatchError(
            f"no ground truth for scene ids: {', '.join(unmatched)}", scene_ids=unmatched
        )
    results_by_id = {r.scene_id: r for r in results}
    return [
        (scene, results_by_id.get(scene.scene_id, OpenSetResult(scene_id=scene.scene_id)))
        for scene in scenes
    ]


def evaluate(
    scenes: Sequence[Scene], results: Sequence[OpenSetResult], cfg: EvalConfig
) -> EvalReport:
    """
    Per-class AP, known mAP, unknown AP and recall, and their harmonic mean.

    Known detections are scored by their naive confidence. Ground truths
    whose label is not a configured known class count as unknown, matched
    class-agnostically at ``unknown_iou_threshold``.
    """
    pairs = pair_results(scenes, results)
    known_classes = list(cfg.class_iou_thresholds)

    per_class_ap: dict[str, float] = {}
    gt_counts: dict[str, int] = {}
    for name in known_classes:
        matches = MatchResult()
        for scene, result in pairs:
            dets = [(d.box, d.naive_score) for d in result.known if d.box.label == name]
            gts = [b for b in scene.gt_boxes if b.label == name]
            matches = matches.merged(match_detections(dets, gts, cfg.class_iou_thresholds[name]))
        gt_counts[name] = matches.num_gt
        per_class_ap[name] = average_precision(
            matches.true_positive,
            matches.scores,
            matches.num_gt,
            cfg.interpolation_points,
            cfg.ap_method,
        )

    evaluated = [per_class_ap[name] for name in known_classes if gt_counts[name] > 0]
    known_map = float(np.mean(evaluated)) if evaluated else 0.0

    unknown_matches = MatchResult()
    for scene, result in pairs:
        dets = [(box, _unknown_score(box, cfg)) for box in result.unknown]
        gts = [b for b in scene.gt_boxes if b.label not in cfg.class_iou_thresholds]
        unknown_matches = unknown_matches.merged(
            match_detections(dets, gts, cfg.unknown_iou_threshold)
        )
    gt_counts["unknown"] = unknown_matches.num_gt

    unknown_ap = average_precision(
        unknown_matches.true_positive,
        unknown_matches.scores,
        unknown_matches.num_gt,
        cfg.interpolation_points,
        cfg.ap_method,
    )
    unknown_recall = (
        100.0 * unknown_matches.matched_gt / unknown_matches.num_gt
        if unknown_matches.num_gt
        else 0.0
    )

    return EvalReport(
        map_known=known_map,
        ap_unknown=unknown_ap,
        recall_unknown=unknown_recall,
        map_harm=map_harm(known_map, unknown_ap),
        per_class_ap=per_class_ap,
        gt_counts=gt_counts,
        scenes=len(pairs),
    )


def choose_operating_point(
    points: Sequence[SweepPoint], closed_set_map_known: float, max_degradation: float
) -> tuple[int, bool]:
    """
    Index of the best harmonic mean among points that keep known mAP within
    ``max_degradation`` of the closed-set value, and whether the rule had to
    fall back to the lowest threshold.
    """
    if not points:
        raise ValidationException("a sweep needs at least one threshold", field="thresholds")
    floor = (1.0 - max_degradation) * closed_set_map_known
    eligible = [i for i, point in enumerate(points) if point.map_known >= floor]
    if not eligible:
        logger.warning(
            "operating_point_fallback",
            closed_set_map_known=closed_set_map_known,
            max_degradation=max_degradation,
            threshold=points[0].threshold,
        )
        return 0, True
    best = max(eligible, key=lambda i: (points[i].map_harm, -i))
    return best, False
