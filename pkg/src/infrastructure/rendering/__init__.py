"""Static renderings."""

from .bev_svg import render_bev

__all__ = ["render_bev"]
