"""Figure rendering for rlnc-relay experiment CSVs."""

from .figures import FigureSpec, RenderError, build_figure, collect_series, render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "RenderError", "build_figure", "collect_series",
           "render"]
