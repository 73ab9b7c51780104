"""Sweep charts for edgeoffload scenario CSV files."""

from .charts import FIGURES, STYLES, FigureSpec, SeriesStyle, build_figure, render
from .schema import COLUMNS, POLICIES, EmptyCsvError, SchemaMismatch, SweepRow, read_rows

__all__ = [
    "COLUMNS",
    "FIGURES",
    "POLICIES",
    "STYLES",
    "EmptyCsvError",
    "FigureSpec",
    "SchemaMismatch",
    "SeriesStyle",
    "SweepRow",
    "build_figure",
    "read_rows",
    "render",
]
