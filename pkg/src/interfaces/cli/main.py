"""Argument parsing and dispatch for the ``osd`` command."""

from __future__ import annotations

import argparse
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import NoReturn

from pydantic import ValidationError

from config.settings import ApplicationSettings, SeedPick, get_settings
from src import __version__
from src.infrastructure.initialization import initialize_infrastructure
from src.infrastructure.observability import bind_command, get_logger, get_metrics_collector
from src.interfaces.cli.commands import (
    EXIT_BAD_INPUT,
    cmd_detect,
    cmd_eval,
    cmd_plot,
    cmd_sweep,
    cmd_synth,
    cmd_train,
)
from src.shared.exceptions import ApplicationError

logger = get_logger(__name__)

Handler = Callable[[argparse.Namespace, ApplicationSettings], int]

COMMANDS: dict[str, Handler] = {
    "synth": cmd_synth,
    "train": cmd_train,
    "detect": cmd_detect,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "plot": cmd_plot,
}


class OsdArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the bad-input status."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_pipeline_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", type=Path, help="Trained head; sidecar embeddings when omitted")
    parser.add_argument("--cluster-config", type=Path, help="ClusterConfig JSON document")
    parser.add_argument("--seed-pick", choices=[s.value for s in SeedPick], help="Seed rule")
    parser.add_argument("--rng-seed", type=int, help="Seed for random seed picking")
    parser.add_argument(
        "--no-cluster",
        action="store_true",
        help="Relabel EDS proposals as unknown without recovering their boxes",
    )


def _add_eval_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--iou-config", type=Path, help="EvalConfig JSON document")
    parser.add_argument("--preset", choices=["default", "udi", "kitti"], default="default")


def build_parser() -> argparse.ArgumentParser:
    parser = OsdArgumentParser(prog="osd", description="Open-set LIDAR 3D object detection")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="Override OSD_OBSERVABILITY__LOG_LEVEL")
    parser.add_argument("--metrics", type=Path, help="Write Prometheus counters to this file")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    synth = commands.add_parser("synth", help="Generate synthetic scenes and detections")
    synth.add_argument("--out", type=Path, required=True)
    synth.add_argument("--seed", type=int)
    synth.add_argument("--scenes", type=int)
    synth.add_argument("--unknown-ratio", type=float)
    synth.add_argument("--density", type=_positive_int, help="Maximum objects per scene")
    synth.add_argument("--noise", type=float, help="Embedding noise sigma")

    train = commands.add_parser("train", help="Train the classification head")
    train.add_argument("--data", type=Path, required=True)
    train.add_argument("--out", type=Path, required=True)
    train.add_argument("--head", choices=["metric", "softmax"], default="metric")
    train.add_argument("--epochs", type=int)
    train.add_argument("--lr", type=float)
    train.add_argument("--batch-size", type=_positive_int)
    train.add_argument("--seed", type=int)

    detect = commands.add_parser("detect", help="Run open-set detection")
    detect.add_argument("--scenes", type=Path, required=True)
    detect.add_argument("--out", type=Path, required=True)
    mode = detect.add_mutually_exclusive_group()
    mode.add_argument("--lambda-eds", type=float, help="EDS threshold for unknown proposals")
    mode.add_argument("--naive", action="store_true", help="Naive max-softmax baseline")
    detect.add_argument("--lambda-naive", type=float, help="Naive confidence threshold")
    _add_pipeline_options(detect)

    evaluate = commands.add_parser("eval", help="Evaluate results against ground truth")
    evaluate.add_argument("--gt", type=Path, required=True)
    evaluate.add_argument("--det", type=Path, required=True)
    evaluate.add_argument("--report", type=Path, help="Write the EvalReport document here")
    _add_eval_options(evaluate)

    sweep = commands.add_parser("sweep", help="Sweep a threshold and pick the operating point")
    sweep.add_argument("--scenes", type=Path, required=True)
    sweep.add_argument("--thresholds", required=True, help="a:b:step, ends inclusive")
    sweep.add_argument("--out", type=Path, required=True)
    sweep.add_argument("--naive", action="store_true", help="Sweep the naive threshold instead")
    _add_pipeline_options(sweep)
    _add_eval_options(sweep)

    plot = commands.add_parser("plot", help="Draw a scene from above as SVG")
    plot.add_argument("--scene", type=Path, required=True)
    plot.add_argument("--det", type=Path, help="OpenSetResult document to overlay")
    plot.add_argument("--out", type=Path, required=True)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run one command.

    Returns 0 on success, 1 for bad input of any kind and 2 when a command
    completed but reported diagnostics.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_BAD_INPUT

    try:
        settings = get_settings()
    except (ApplicationError, ValidationError) as exc:
        print(f"osd: error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    initialize_infrastructure(settings, args.log_level)
    bind_command(args.command)
    logger.info("command_started")
    try:
        status = COMMANDS[args.command](args, settings)
    except ApplicationError as exc:
        logger.error("command_failed", error_code=exc.error_code)
        print(f"osd: error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ValidationError as exc:
        logger.error("command_failed", error_code="VALIDATION_ERROR")
        print(f"osd: error: invalid option value: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OSError as exc:
        logger.error("command_failed", error_code="IO_ERROR")
        print(f"osd: error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    if args.metrics is not None:
        get_metrics_collector().write_textfile(args.metrics)
    logger.info("command_finished", status=status)
    return status
