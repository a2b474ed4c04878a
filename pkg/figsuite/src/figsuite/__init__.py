"""Offline rendering of acspin experiment CSVs into publication figures.

Strictly a consumer of the versioned CSV schema written by the acspin
command line; no physics is recomputed here, and byte-identical inputs
produce pixel-identical images.
"""
from .csvio import SchemaError, read_csv, require_columns
from .surfaces import render_grid_surfaces
from .trace import render_multipole_trace

__version__ = "0.1.0"

__all__ = [
    "SchemaError",
    "read_csv",
    "require_columns",
    "render_grid_surfaces",
    "render_multipole_trace",
]
