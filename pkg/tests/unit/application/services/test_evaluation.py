"""Unit tests for open-set evaluation."""

from __future__ import annotations

import pytest

from config.settings import ApMethod, EvalConfig
from src.application.services.evaluation import (
    EvalReport,
    SweepPoint,
    average_precision,
    choose_operating_point,
    evaluate,
    map_harm,
    match_detections,
    recall_unknown,
)
from src.domain.models import OpenSetResult, Scene
from src.domain.value_objects import Box7
from src.shared.exceptions import SceneMismatchError, ValidationException

# (known mAP, unknown AP, harmonic mean) as published for closed-set, supervised,
# naive, dropout, point-embedding and metric-clustering detectors and their ablations
PUBLISHED_TRIPLES = [
    (78.9, 0.0, 0.0),
    (70.5, 0.0, 0.0),
    (78.4, 61.7, 69.1),
    (76.6, 80.6, 78.5),
    (75.3, 3.0, 5.7),
    (63.8, 3.9, 7.3),
    (75.9, 0.1, 0.2),
    (64.1, 2.6, 5.0),
    (74.1, 1.1, 2.1),
    (65.9, 1.1, 2.2),
    (79.4, 13.2, 22.6),
    (66.8, 9.7, 16.9),
    (77.6, 5.2, 9.8),
    (78.7, 8.3, 15.1),
    (65.9, 4.7, 8.8),
    (66.1, 5.8, 10.6),
]


def box(cx: float = 0.0, label: str | None = "car") -> Box7:
    return Box7(cx=cx, cy=0.0, cz=0.0, w=1.0, l=1.0, h=1.0, yaw=0.0, label=label)


def sweep_point(threshold: float, map_known: float, ap_unknown: float) -> SweepPoint:
    return SweepPoint(
        threshold=threshold,
        recall_unknown=0.0,
        ap_unknown=ap_unknown,
        map_known=map_known,
        map_harm=map_harm(map_known, ap_unknown),
    )


@pytest.mark.unit
@pytest.mark.fast
class TestMatchDetections:
    """Tests for greedy score-ordered matching."""

    def test_overlapping_detection_is_true_positive(self) -> None:
        """IoU 0.9 clears a 0.5 threshold."""
        det = Box7(cx=0.05, cy=0.0, cz=0.0, w=1.0, l=1.0, h=1.0)
        result = match_detections([(det, 0.9)], [box()], 0.5)
        assert result.true_positive == [True]

    def test_ground_truth_matched_once(self) -> None:
        """A second detection on the same object is a false positive."""
        result = match_detections([(box(), 0.5), (box(), 0.9)], [box()], 0.5)
        assert result.scores == [0.9, 0.5]
        assert result.true_positive == [True, False]
        assert result.matched_gt == 1

    def test_low_overlap_is_false_positive(self) -> None:
        """IoU 0.05 misses a 0.1 threshold."""
        det = box(cx=0.9)
        result = match_detections([(det, 1.0)], [box()], 0.1)
        assert result.true_positive == [False]

    def test_best_overlap_wins(self) -> None:
        """A detection takes the ground truth it overlaps most."""
        result = match_detections([(box(cx=0.9), 1.0)], [box(), box(cx=1.0)], 0.1)
        assert result.true_positive == [True]
        second = match_detections([(box(), 0.5)], [box(cx=1.0)], 0.1)
        assert second.true_positive == [False]


@pytest.mark.unit
@pytest.mark.fast
class TestAveragePrecision:
    """Tests for interpolated average precision."""

    def test_single_true_positive(self) -> None:
        """One hit on one object is perfect."""
        assert average_precision([True], [0.9], 1) == 100.0

    def test_no_detections(self) -> None:
        """Missing every object scores zero."""
        assert average_precision([], [], 2) == 0.0

    def test_no_ground_truth(self) -> None:
        """No objects and no detections is defined as zero."""
        assert average_precision([], [], 0) == 0.0

    def test_trailing_false_positive(self) -> None:
        """Full recall at precision one comes before the false positive."""
        assert average_precision([True, False], [0.9, 0.8], 1) == pytest.approx(100.0)

    def test_leading_false_positive(self) -> None:
        """A higher-scored miss halves precision at every recall."""
        assert average_precision([False, True], [0.9, 0.8], 1) == pytest.approx(50.0)

    def test_half_recall(self) -> None:
        """Reaching half the objects covers half the 40 samples."""
        assert average_precision([True], [1.0], 2) == pytest.approx(50.0)

    def test_eleven_point_includes_zero_recall(self) -> None:
        """Eleven samples run from recall 0 to 1."""
        ap = average_precision([True], [1.0], 2, interpolation_points=11)
        assert ap == pytest.approx(100.0 * 6 / 11)

    def test_continuous(self) -> None:
        """The continuous area integrates every recall step."""
        ap = average_precision(
            [True, False, True], [0.9, 0.8, 0.7], 2, method=ApMethod.CONTINUOUS
        )
        assert ap == pytest.approx(100.0 * (0.5 * 1.0 + 0.5 * 2.0 / 3.0))

    def test_monotone_under_new_top_hit(self) -> None:
        """Adding a true positive above every score never lowers AP."""
        flags, scores = [False, True, False, True], [0.8, 0.7, 0.6, 0.5]
        before = average_precision(flags, scores, 4)
        after = average_precision([True, *flags], [0.9, *scores], 4)
        assert after >= before

    def test_length_mismatch(self) -> None:
        """Every flag needs a score."""
        with pytest.raises(ValidationException):
            average_precision([True], [], 1)


@pytest.mark.unit
@pytest.mark.fast
class TestMapHarm:
    """Tests for the harmonic mean of known and unknown quality."""

    @pytest.mark.parametrize(("known", "unknown", "expected"), PUBLISHED_TRIPLES)
    def test_published_triples(self, known: float, unknown: float, expected: float) -> None:
        """Published combined scores are reproduced within rounding."""
        assert map_harm(known, unknown) == pytest.approx(expected, abs=0.1)

    def test_zero_unknown(self) -> None:
        """No unknown quality means no combined score."""
        assert map_harm(80.0, 0.0) == 0.0
        assert map_harm(0.0, 0.0) == 0.0

    def test_properties(self) -> None:
        """Symmetric, idempotent and bounded by twice the minimum."""
        assert map_harm(30.0, 70.0) == map_harm(70.0, 30.0)
        assert map_harm(42.0, 42.0) == pytest.approx(42.0)
        assert map_harm(10.0, 90.0) <= 2 * 10.0


@pytest.mark.unit
@pytest.mark.fast
class TestRecallUnknown:
    """Tests for class-agnostic unknown recall."""

    def test_all_matched(self) -> None:
        """Every unknown object found."""
        gts = [box(label="unknown"), box(cx=5.0, label="unknown")]
        assert recall_unknown(gts, gts) == 100.0

    def test_no_detections(self) -> None:
        """Nothing found."""
        assert recall_unknown([], [box(label="unknown")]) == 0.0

    def test_two_of_three(self) -> None:
        """Two matches over three objects."""
        gts = [box(cx=x, label="unknown") for x in (0.0, 5.0, 10.0)]
        assert recall_unknown(gts[:2], gts) == pytest.approx(66.67, abs=0.01)


@pytest.mark.unit
@pytest.mark.fast
class TestEvaluate:
    """Tests for whole-dataset evaluation."""

    @pytest.fixture
    def scenes(self) -> list[Scene]:
        return [
            Scene(scene_id="a", gt_boxes=[box(), box(cx=5.0, label="unknown")]),
            Scene(scene_id="b", gt_boxes=[box(label="pedestrian"), box(cx=9.0, label="trailer")]),
        ]

    def test_perfect_results(self, scenes: list[Scene]) -> None:
        """Ground truth used as output scores 100 everywhere."""
        known = list(EvalConfig().class_iou_thresholds)
        results = [OpenSetResult.from_ground_truth(s, known) for s in scenes]
        report = evaluate(scenes, results, EvalConfig())
        assert report.map_known == pytest.approx(100.0)
        assert report.ap_unknown == pytest.approx(100.0)
        assert report.recall_unknown == pytest.approx(100.0)
        assert report.map_harm == pytest.approx(100.0)
        assert report.gt_counts == {"car": 1, "pedestrian": 1, "cyclist": 0, "unknown": 2}
        assert report.scenes == 2

    def test_empty_results(self, scenes: list[Scene]) -> None:
        """Scenes without output score zero."""
        report = evaluate(scenes, [], EvalConfig())
        assert (report.map_known, report.ap_unknown, report.map_harm) == (0.0, 0.0, 0.0)

    def test_classes_without_ground_truth_are_not_averaged(self, scenes: list[Scene]) -> None:
        """Cyclist has no objects and stays out of the known mean."""
        known = list(EvalConfig().class_iou_thresholds)
        results = [OpenSetResult.from_ground_truth(scenes[0], known)]
        report = evaluate(scenes, results, EvalConfig())
        assert report.per_class_ap == {"car": 100.0, "pedestrian": 0.0, "cyclist": 0.0}
        assert report.map_known == pytest.approx(50.0)

    def test_unmatched_scene_id(self, scenes: list[Scene]) -> None:
        """Results for scenes without ground truth are rejected."""
        with pytest.raises(SceneMismatchError, match="ghost"):
            evaluate(scenes, [OpenSetResult(scene_id="ghost")], EvalConfig())

    def test_report_checks_harmonic_mean(self) -> None:
        """A report whose combined score disagrees with its parts is invalid."""
        with pytest.raises(ValueError, match="map_harm"):
            EvalReport(map_known=50.0, ap_unknown=50.0, recall_unknown=0.0, map_harm=10.0)


@pytest.mark.unit
@pytest.mark.fast
class TestChooseOperatingPoint:
    """Tests for the degradation-bounded operating point."""

    def test_single_point(self) -> None:
        """A lone threshold is chosen, as a fallback when it misses the known-mAP floor."""
        assert choose_operating_point([sweep_point(1.0, 70.0, 5.0)], 80.0, 0.1) == (0, True)
        assert choose_operating_point([sweep_point(1.0, 75.0, 5.0)], 80.0, 0.1) == (0, False)

    def test_best_harmonic_among_eligible(self) -> None:
        """Points below 90% of the closed-set mAP are passed over."""
        points = [
            sweep_point(0.0, 80.0, 0.0),
            sweep_point(1.0, 78.0, 10.0),
            sweep_point(2.0, 60.0, 40.0),
        ]
        assert choose_operating_point(points, 80.0, 0.1) == (1, False)

    def test_fallback_to_lowest_threshold(self) -> None:
        """When no point qualifies, the lowest threshold is returned."""
        points = [sweep_point(1.0, 10.0, 5.0), sweep_point(2.0, 5.0, 9.0)]
        assert choose_operating_point(points, 80.0, 0.1) == (0, True)
