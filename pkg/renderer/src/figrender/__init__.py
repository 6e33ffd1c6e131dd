"""figrender: deterministic figures from tickclock benchmark CSV files."""

from .core import (
    KINDS,
    REQUIRED_COLUMNS,
    PlotSpec,
    RenderError,
    build_figure,
    read_table,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "REQUIRED_COLUMNS",
    "PlotSpec",
    "RenderError",
    "build_figure",
    "read_table",
    "render",
    "__version__",
]
