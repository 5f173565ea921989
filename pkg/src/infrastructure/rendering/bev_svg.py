"""Bird's-eye-view SVG drawings of a scene and its detections."""

from __future__ import annotations

from collections.abc import Sequence
from io import StringIO
from typing import Any

import matplotlib as mpl
from matplotlib.axes import Axes
from matplotlib.figure import Figure
from matplotlib.lines import Line2D
from matplotlib.patches import Polygon as PolygonPatch

from src.domain.geometry import bev_corners
from src.domain.models.detection import OpenSetResult
from src.domain.models.scene import Scene
from src.domain.value_objects.box import Box7

HASH_SALT = "osd-bev"
FIGURE_SIZE = (8.0, 8.0)

GT_STYLE = {"edgecolor": "black", "linestyle": "solid", "linewidth": 1.2}
KNOWN_STYLE = {"edgecolor": "tab:blue", "linestyle": "dashed", "linewidth": 1.0}
UNKNOWN_STYLE = {"edgecolor": "tab:red", "linestyle": "solid", "linewidth": 1.8}


def _add_boxes(axes: Axes, boxes: Sequence[Box7], style: dict[str, Any]) -> None:
    for box in boxes:
        patch = PolygonPatch(bev_corners(box), closed=True, fill=False, **style)
        axes.add_patch(patch)


def render_bev(scene: Scene, result: OpenSetResult | None = None, title: str | None = None) -> str:
    """
    SVG text of the scene seen from above.

    Points are dots, ground-truth boxes solid black, known detections
    dashed blue and unknown boxes thick red. Output is byte-identical for
    identical inputs.
    """
    with mpl.rc_context({"svg.hashsalt": HASH_SALT, "svg.fonttype": "none"}):
        figure = Figure(figsize=FIGURE_SIZE)
        axes = figure.add_subplot()
        cloud = scene.cloud()
        if cloud.shape[0]:
            axes.scatter(cloud[:, 0], cloud[:, 1], s=0.5, c="0.55", linewidths=0)

        _add_boxes(axes, scene.gt_boxes, GT_STYLE)
        if result is not None:
            _add_boxes(axes, [d.box for d in result.known], KNOWN_STYLE)
            _add_boxes(axes, result.unknown, UNKNOWN_STYLE)

        axes.autoscale_view()
        axes.set_aspect("equal", adjustable="datalim")
        axes.set_xlabel("x (m)")
        axes.set_ylabel("y (m)")
        axes.set_title(title or scene.scene_id)
        axes.legend(
            handles=[
                Line2D([], [], color="black", linestyle="solid", label="ground truth"),
                Line2D([], [], color="tab:blue", linestyle="dashed", label="known"),
                Line2D([], [], color="tab:red", linestyle="solid", linewidth=1.8, label="unknown"),
            ],
            loc="upper right",
            fontsize="small",
        )

        buffer = StringIO()
        figure.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()
