"""
Threshold sweeps and operating-point selection.

Each scene is scored once and every proposal is clustered at most once;
the thresholds only change which detections are diverted.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

from pydantic import BaseModel, Field

from config.settings import EvalConfig, PipelineConfig
from src.application.services.evaluation import (
    EvalReport,
    SweepPoint,
    choose_operating_point,
    evaluate,
)
from src.application.services.open_set_pipeline import (
    ProposalRecoverer,
    assemble_mluc,
    run_eds_relabel,
    run_naive,
)
from src.domain.models.detection import Detection, OpenSetResult
from src.domain.models.scene import Scene
from src.infrastructure.observability import get_logger
from src.infrastructure.workers import parallel_map
from src.shared.exceptions import ValidationException

logger = get_logger(__name__)

THRESHOLD_TOLERANCE = 1e-12


class SweepMode(str, Enum):
    """Which threshold is swept."""

    MLUC = "mluc"
    NAIVE = "naive"
    EDS_RELABEL = "eds_relabel"


class SweepResult(BaseModel):
    """Sweep rows, the closed-set reference and the chosen row."""

    mode: SweepMode
    points: list[SweepPoint]
    closed_set_map_known: float
    operating_index: int = Field(ge=0)
    fallback: bool = False

    @property
    def operating_point(self) -> SweepPoint:
        return self.points[self.operating_index]


@dataclass
class SceneInputs:
    """A ground-truth scene with its scored detections and cached recoveries."""

    scene: Scene
    scored: list[Detection]
    recoverer: ProposalRecoverer

    @classmethod
    def prepare(cls, scene: Scene, scored: list[Detection], cfg: PipelineConfig) -> SceneInputs:
        recoverer = ProposalRecoverer(cloud=scene.cloud(), cfg=cfg)
        return cls(scene=scene, scored=scored, recoverer=recoverer)


def parse_thresholds(text: str) -> list[float]:
    """
    Expand ``a:b:step`` into ``a, a+step, ...`` up to ``b`` inclusive.

    Ends are inclusive within 1e-12; a bare number is a single threshold.

    Raises:
        ValidationException: Malformed text, ``a > b`` or ``step <= 0``
    """
    parts = text.split(":")
    try:
        values = [float(part) for part in parts]
    except ValueError as exc:
        raise ValidationException(f"invalid threshold range '{text}'", field="thresholds") from exc
    if len(values) == 1:
        return values
    if len(values) != 3:
        raise ValidationException("threshold range must be a:b:step", field="thresholds")
    start, stop, step = values
    if not step > 0.0:
        raise ValidationException("threshold step must be positive", field="thresholds")
    if start > stop + THRESHOLD_TOLERANCE:
        raise ValidationException("threshold range start exceeds its end", field="thresholds")

    thresholds: list[float] = []
    k = 0
    while (value := start + k * step) <= stop + THRESHOLD_TOLERANCE:
        thresholds.append(min(value, stop) if abs(value - stop) <= THRESHOLD_TOLERANCE else value)
        k += 1
    return thresholds


def _with_threshold(cfg: PipelineConfig, mode: SweepMode, threshold: float) -> PipelineConfig:
    key = "lambda_naive" if mode == SweepMode.NAIVE else "lambda_eds"
    return PipelineConfig.model_validate({**cfg.model_dump(), key: threshold})


def results_at(
    inputs: Sequence[SceneInputs],
    cfg: PipelineConfig,
    mode: SweepMode,
    threshold: float,
    workers: int | None = None,
) -> list[OpenSetResult]:
    """Open-set results of every scene at one threshold."""
    configured = _with_threshold(cfg, mode, threshold)

    def run(item: SceneInputs) -> OpenSetResult:
        if mode == SweepMode.MLUC:
            return assemble_mluc(item.scored, configured, item.recoverer, item.scene.scene_id)
        if mode == SweepMode.EDS_RELABEL:
            return run_eds_relabel(item.scored, configured, item.scene.scene_id)
        return run_naive(item.scored, configured, item.scene.scene_id)

    return parallel_map(run, inputs, workers)


def sweep_thresholds(
    inputs: Sequence[SceneInputs],
    thresholds: Sequence[float],
    cfg: PipelineConfig,
    eval_cfg: EvalConfig,
    mode: SweepMode = SweepMode.MLUC,
    workers: int | None = None,
) -> SweepResult:
    """
    One evaluated point per threshold and the operating point.

    The operating point maximizes the harmonic mean among thresholds whose
    known mAP stays within ``max_known_degradation`` of the closed-set
    detector (threshold 0); when none does, the lowest threshold is chosen.

    Raises:
        ValidationException: ``thresholds`` is empty or not ascending
    """
    if not thresholds:
        raise ValidationException("a sweep needs at least one threshold", field="thresholds")
    if any(b < a for a, b in zip(thresholds, thresholds[1:], strict=False)):
        raise ValidationException("thresholds must be sorted ascending", field="thresholds")

    scenes = [item.scene for item in inputs]
    closed_set = evaluate(scenes, results_at(inputs, cfg, mode, 0.0, workers), eval_cfg)

    points: list[SweepPoint] = []
    for threshold in thresholds:
        results = results_at(inputs, cfg, mode, threshold, workers)
        report: EvalReport = evaluate(scenes, results, eval_cfg)
        points.append(SweepPoint.from_report(threshold, report))
        logger.info(
            "sweep_point",
            mode=mode.value,
            threshold=threshold,
            recall_unknown=report.recall_unknown,
            ap_unknown=report.ap_unknown,
            map_known=report.map_known,
            map_harm=report.map_harm,
        )

    index, fallback = choose_operating_point(
        points, closed_set.map_known, eval_cfg.max_known_degradation
    )
    return SweepResult(
        mode=mode,
        points=points,
        closed_set_map_known=closed_set.map_known,
        operating_index=index,
        fallback=fallback,
    )
