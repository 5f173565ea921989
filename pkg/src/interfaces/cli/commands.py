"""Command implementations of the ``osd`` tool."""

from __future__ import annotations

import argparse
import csv
from io import StringIO
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel

from config.settings import ApplicationSettings, ClusterConfig, EvalConfig, PipelineConfig
from src.application.services.evaluation import evaluate
from src.application.services.features import box_features
from src.application.services.head_trainer import embed, train
from src.application.services.open_set_pipeline import (
    ProposalRecoverer,
    assemble_mluc,
    default_class_names,
    run_eds_relabel,
    run_naive,
    score_detections,
)
from src.application.services.threshold_sweep import (
    SceneInputs,
    SweepMode,
    SweepResult,
    parse_thresholds,
    sweep_thresholds,
)
from src.domain.models.detection import Detection, DetectionSet, Diagnostics, OpenSetResult
from src.domain.models.head import HeadKind, HeadModel, Prototypes, TrainSample
from src.domain.models.scene import Scene
from src.infrastructure.datasets.synthetic import synth_generate
from src.infrastructure.observability import get_logger
from src.infrastructure.persistence.documents import load_scene, read_document, write_document
from src.infrastructure.persistence.repositories import DatasetLayout, ResultRepository
from src.infrastructure.rendering import render_bev
from src.infrastructure.workers import parallel_map
from src.interfaces.cli.manifest import ManifestRecorder
from src.shared.exceptions import ValidationException

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_DIAGNOSTICS = 2

SWEEP_COLUMNS = ("threshold", "recall_unknown", "ap_unknown", "map_known", "map_harm")

C = TypeVar("C", bound=BaseModel)


def _override(section: C, values: dict[str, Any]) -> C:
    """A copy of ``section`` with the non-None ``values`` applied and re-validated."""
    updates = {key: value for key, value in values.items() if value is not None}
    return type(section).model_validate({**section.model_dump(), **updates})


def _require_dir(path: Path, name: str) -> Path:
    if not path.is_dir():
        raise ValidationException(f"{name} directory {path} does not exist", field=name)
    return path


def _pipeline_config(args: argparse.Namespace, settings: ApplicationSettings) -> PipelineConfig:
    values: dict[str, Any] = {
        "lambda_eds": getattr(args, "lambda_eds", None),
        "lambda_naive": getattr(args, "lambda_naive", None),
        "seed_pick": getattr(args, "seed_pick", None),
        "rng_seed": getattr(args, "rng_seed", None),
    }
    if args.cluster_config is not None:
        values["cluster"] = read_document(args.cluster_config, ClusterConfig).model_dump()
    return _override(settings.pipeline, values)


def _eval_config(args: argparse.Namespace, settings: ApplicationSettings) -> EvalConfig:
    if args.iou_config is not None:
        return read_document(args.iou_config, EvalConfig)
    if args.preset == "udi":
        return EvalConfig.udi()
    if args.preset == "kitti":
        return EvalConfig.kitti()
    return settings.evaluation


def _load_model(path: Path | None) -> HeadModel | None:
    return read_document(path, HeadModel) if path is not None else None


def _score_scene(
    scene: Scene,
    detection_set: DetectionSet | None,
    model: HeadModel | None,
    known_classes: list[str],
) -> list[Detection]:
    """
    Scored detections of one scene.

    Without a model the sidecar embeddings are scored directly; with one,
    each box's point features are embedded by the trained head.
    """
    raw = list(detection_set.detections) if detection_set is not None else []
    if model is None:
        names = known_classes
        if detection_set is not None and detection_set.class_names:
            names = list(detection_set.class_names)
        return score_detections(raw, Prototypes(num_classes=len(names)), HeadKind.METRIC, names)

    cloud = scene.cloud()
    embedded = [(det.box, embed(model, box_features(cloud, det.box))) for det in raw]
    names = model.class_names or default_class_names(model.num_classes)
    return score_detections(embedded, Prototypes(num_classes=model.num_classes), model.kind, names)


def _scored_scenes(
    layout: DatasetLayout, model: HeadModel | None, settings: ApplicationSettings
) -> list[tuple[Scene, list[Detection]]]:
    scenes = layout.scenes.list_all()
    sidecars = {d.scene_id: d for d in layout.detections.list_all()}
    missing = [s.scene_id for s in scenes if s.scene_id not in sidecars]
    if missing:
        logger.warning("detections_missing", scenes=len(missing), first=missing[0])

    def score(scene: Scene) -> tuple[Scene, list[Detection]]:
        sidecar = sidecars.get(scene.scene_id)
        return scene, _score_scene(scene, sidecar, model, settings.known_classes)

    return parallel_map(score, scenes)


def cmd_synth(args: argparse.Namespace, settings: ApplicationSettings) -> int:
    """Generate a synthetic dataset with detection sidecars."""
    values: dict[str, Any] = {
        "seed": args.seed,
        "scenes": args.scenes,
        "unknown_ratio": args.unknown_ratio,
        "embedding_noise": args.noise,
    }
    if args.density is not None:
        low, _ = settings.synthesis.objects_per_scene
        values["objects_per_scene"] = (min(low, args.density), args.density)
    cfg = _override(settings.synthesis, values)

    recorder = ManifestRecorder("synth")
    recorder.configure(synthesis=cfg)
    layout = DatasetLayout(args.out)

    generated = synth_generate(cfg)

    def save(index: int) -> None:
        layout.scenes.save(generated[index].scene)
        layout.detections.save(generated[index].detections)

    parallel_map(save, list(range(len(generated))))

    recorder.manifest.outputs = {
        "scenes": str(layout.scenes.root),
        "detections": str(layout.detections.root),
    }
    recorder.manifest.extra = {
        "scene_ids": [item.scene.scene_id for item in generated],
        "points": sum(len(item.scene.points) for item in generated),
        "gt_boxes": sum(len(item.scene.gt_boxes) for item in generated),
    }
    recorder.write(args.out)
    return EXIT_OK


def cmd_train(args: argparse.Namespace, settings: ApplicationSettings) -> int:
    """Train the classification head on ground-truth boxes of the known classes."""
    layout = DatasetLayout.open(_require_dir(args.data, "data"))
    names = settings.known_classes
    cfg = _override(
        settings.training,
        {
            "epochs": args.epochs,
            "learning_rate": args.lr,
            "batch_size": args.batch_size,
            "seed": args.seed,
        },
    )
    kind = HeadKind.METRIC if args.head == "metric" else HeadKind.SOFTMAX_CLASSIFIER

    samples: list[TrainSample] = []
    for scene in layout.scenes.list_all():
        cloud = scene.cloud()
        samples.extend(
            TrainSample(
                features=box_features(cloud, box).tolist(),
                label=names.index(str(box.label)) + 1,
            )
            for box in scene.gt_boxes
            if box.label in names
        )

    outcome = train(samples, cfg, kind, num_classes=len(names), class_names=names)
    write_document(args.out, outcome.model)

    recorder = ManifestRecorder("train")
    recorder.configure(training=cfg, known_classes=names)
    recorder.manifest.inputs = {"data": str(args.data)}
    recorder.manifest.outputs = {"model": str(args.out)}
    recorder.manifest.epoch_losses = outcome.epoch_losses
    recorder.manifest.extra = {
        "head": kind.value,
        "samples": len(samples),
        "initial_loss": outcome.initial_loss,
    }
    recorder.write(args.out)
    return EXIT_OK


def _mode(args: argparse.Namespace) -> SweepMode:
    if args.naive and args.no_cluster:
        raise ValidationException("--no-cluster cannot be combined with --naive", field="mode")
    if args.naive:
        return SweepMode.NAIVE
    return SweepMode.EDS_RELABEL if args.no_cluster else SweepMode.MLUC


def cmd_detect(args: argparse.Namespace, settings: ApplicationSettings) -> int:
    """Open-set detection over every scene of a dataset."""
    if args.lambda_naive is not None and not args.naive:
        raise ValidationException("--lambda-naive requires --naive", field="lambda_naive")
    mode = _mode(args)
    layout = DatasetLayout.open(_require_dir(args.scenes, "scenes"))
    model = _load_model(args.model)
    cfg = _pipeline_config(args, settings)
    results_repo = ResultRepository(args.out)

    recorder = ManifestRecorder("detect")
    recorder.configure(pipeline=cfg, known_classes=settings.known_classes)

    def detect(item: tuple[Scene, list[Detection]]) -> OpenSetResult:
        scene, scored = item
        if mode == SweepMode.NAIVE:
            result = run_naive(scored, cfg, scene.scene_id)
        elif mode == SweepMode.EDS_RELABEL:
            result = run_eds_relabel(scored, cfg, scene.scene_id)
        else:
            recoverer = ProposalRecoverer(cloud=scene.cloud(), cfg=cfg)
            result = assemble_mluc(scored, cfg, recoverer, scene.scene_id)
        results_repo.save(result)
        return result

    results = parallel_map(detect, _scored_scenes(layout, model, settings))
    diagnostics = sum((r.diagnostics for r in results), Diagnostics())

    recorder.manifest.inputs = {"scenes": str(args.scenes), "model": str(args.model or "")}
    recorder.manifest.outputs = {"results": str(args.out)}
    recorder.manifest.diagnostics = diagnostics
    recorder.manifest.extra = {
        "mode": mode.value,
        "scenes": len(results),
        "unknown_boxes": sum(len(r.unknown) for r in results),
        "skipped_by_scene": {
            r.scene_id: r.diagnostics.skipped_proposals
            for r in results
            if r.diagnostics.skipped_proposals
        },
    }
    recorder.write(args.out)

    if diagnostics.skipped_proposals:
        logger.warning(
            "detect_completed_with_diagnostics",
            skipped_proposals=diagnostics.skipped_proposals,
            dropped_clusters=diagnostics.dropped_clusters,
        )
        return EXIT_DIAGNOSTICS
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, settings: ApplicationSettings) -> int:
    """Score result documents against ground-truth scenes."""
    eval_cfg = _eval_config(args, settings)
    scenes = DatasetLayout.open(_require_dir(args.gt, "gt")).scenes.list_all()
    results = ResultRepository(
        _require_dir(args.det, "det"), known_classes=list(eval_cfg.class_iou_thresholds)
    ).list_all()
    report = evaluate(scenes, results, eval_cfg)

    print(f"scenes          {report.scenes}")
    for name, ap in report.per_class_ap.items():
        print(f"AP[{name}]{' ' * max(1, 12 - len(name))}{ap:.2f}  (gt {report.gt_counts[name]})")
    print(f"mAP_known       {report.map_known:.2f}")
    print(f"AP_unknown      {report.ap_unknown:.2f}  (gt {report.gt_counts.get('unknown', 0)})")
    print(f"Recall_unknown  {report.recall_unknown:.2f}")
    print(f"mAP_harm        {report.map_harm:.2f}")

    if args.report is not None:
        write_document(args.report, report)
        recorder = ManifestRecorder("eval")
        recorder.configure(evaluation=eval_cfg)
        recorder.manifest.inputs = {"gt": str(args.gt), "det": str(args.det)}
        recorder.manifest.outputs = {"report": str(args.report)}
        recorder.manifest.diagnostics = sum((r.diagnostics for r in results), Diagnostics())
        recorder.write(args.report)
    return EXIT_OK


def sweep_table(result: SweepResult) -> str:
    """Comma-separated sweep rows with a footer marking the operating point."""
    buffer = StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)

    def row(label: str, index: int) -> list[str]:
        point = result.points[index]
        return [
            label,
            f"{point.recall_unknown:.4f}",
            f"{point.ap_unknown:.4f}",
            f"{point.map_known:.4f}",
            f"{point.map_harm:.4f}",
        ]

    for index, point in enumerate(result.points):
        writer.writerow(row(format(point.threshold, ".10g"), index))
    chosen = row(f"operating_point={result.operating_point.threshold:.10g}", result.operating_index)
    writer.writerow(chosen)
    return buffer.getvalue()


def cmd_sweep(args: argparse.Namespace, settings: ApplicationSettings) -> int:
    """Evaluate a range of thresholds and pick the operating point."""
    thresholds = parse_thresholds(args.thresholds)
    layout = DatasetLayout.open(_require_dir(args.scenes, "scenes"))
    model = _load_model(args.model)
    cfg = _pipeline_config(args, settings)
    eval_cfg = _eval_config(args, settings)
    mode = _mode(args)

    inputs = [
        SceneInputs.prepare(scene, scored, cfg)
        for scene, scored in _scored_scenes(layout, model, settings)
    ]
    result = sweep_thresholds(inputs, thresholds, cfg, eval_cfg, mode)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(sweep_table(result), encoding="utf-8")

    recorder = ManifestRecorder("sweep")
    recorder.configure(pipeline=cfg, evaluation=eval_cfg, known_classes=settings.known_classes)
    recorder.manifest.inputs = {"scenes": str(args.scenes), "model": str(args.model or "")}
    recorder.manifest.outputs = {"table": str(args.out)}
    recorder.manifest.extra = {
        "mode": mode.value,
        "thresholds": thresholds,
        "closed_set_map_known": result.closed_set_map_known,
        "operating_threshold": result.operating_point.threshold,
        "fallback": result.fallback,
    }
    recorder.write(args.out)
    return EXIT_OK


def cmd_plot(args: argparse.Namespace, _settings: ApplicationSettings) -> int:
    """Draw one scene and optionally its result from above as SVG."""
    scene = load_scene(args.scene)
    result = read_document(args.det, OpenSetResult) if args.det is not None else None
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(render_bev(scene, result), encoding="utf-8")

    recorder = ManifestRecorder("plot")
    recorder.manifest.inputs = {"scene": str(args.scene), "det": str(args.det or "")}
    recorder.manifest.outputs = {"svg": str(args.out)}
    recorder.write(args.out)
    return EXIT_OK
