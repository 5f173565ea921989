"""
Application services orchestrating the open-set detection workflow.

Feature extraction and the classification head, the open-set pipeline
(scoring, proposals, clustering recovery, suppression), evaluation and
threshold sweeps.
"""

from .evaluation import EvalReport, SweepPoint, evaluate, map_harm
from .features import FEATURE_DIM, FEATURE_NAMES, box_features, feature_extract
from .head_trainer import TrainingOutcome, embed, embed_batch, initialize_head, train
from .open_set_pipeline import (
    assemble_mluc,
    nms_largest_first,
    run_eds_relabel,
    run_mluc,
    run_naive,
    score_detections,
    select_unknown_proposals,
)
from .threshold_sweep import SceneInputs, SweepMode, SweepResult, parse_thresholds, sweep_thresholds

__all__ = [
    "FEATURE_DIM",
    "FEATURE_NAMES",
    "EvalReport",
    "SceneInputs",
    "SweepMode",
    "SweepPoint",
    "SweepResult",
    "TrainingOutcome",
    "assemble_mluc",
    "box_features",
    "embed",
    "embed_batch",
    "evaluate",
    "feature_extract",
    "initialize_head",
    "map_harm",
    "nms_largest_first",
    "parse_thresholds",
    "run_eds_relabel",
    "run_mluc",
    "run_naive",
    "score_detections",
    "select_unknown_proposals",
    "sweep_thresholds",
    "train",
]
